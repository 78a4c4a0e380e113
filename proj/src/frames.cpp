#include "voleta/frames.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <opencv2/core.hpp>
#include <opencv2/imgproc.hpp>

#include "voleta/errors.hpp"
#include "voleta/kernels.hpp"

namespace voleta {

namespace {

constexpr int kHashSide = 32;
constexpr int kBlockSide = 8;

void check_frame(const Frame& frame)
{
    if (frame.rgb.empty() || frame.width() < 8 || frame.height() < 8)
        throw_invalid("frame '" + frame.id + "' is smaller than 8x8");
}

} // namespace

PerceptualHash perceptual_hash(const Frame& frame)
{
    check_frame(frame);
    const cv::Mat gray = to_luma(frame.rgb);
    cv::Mat small;
    cv::resize(gray, small, cv::Size(kHashSide, kHashSide), 0, 0, cv::INTER_AREA);
    cv::Mat coeffs;
    cv::dct(small, coeffs);

    std::array<double, kBlockSide * kBlockSide> block{};
    for (int r = 0; r < kBlockSide; ++r)
        for (int c = 0; c < kBlockSide; ++c)
            block[r * kBlockSide + c] = coeffs.at<double>(r, c);

    // Median of the 63 AC coefficients (odd count, so a single middle element).
    std::array<double, kBlockSide * kBlockSide - 1> ac{};
    std::copy(block.begin() + 1, block.end(), ac.begin());
    auto mid = ac.begin() + ac.size() / 2;
    std::nth_element(ac.begin(), mid, ac.end());
    const double median = *mid;

    PerceptualHash h;
    for (std::size_t i = 0; i < block.size(); ++i)
        if (block[i] > median)
            h.bits |= std::uint64_t{1} << i;
    return h;
}

int hamming_distance(PerceptualHash a, PerceptualHash b)
{
    return std::popcount(a.bits ^ b.bits);
}

double high_frequency_energy(const cv::Mat& gray)
{
    CV_Assert(gray.type() == CV_64F);
    cv::Mat spectrum;
    cv::dft(gray, spectrum, cv::DFT_COMPLEX_OUTPUT);

    const int w = gray.cols;
    const int h = gray.rows;
    const double radius = std::min(w, h) / 16.0;
    const double r2 = radius * radius;

    double sum = 0.0;
    std::size_t count = 0;
    for (int v = 0; v < h; ++v) {
        // Signed frequency == position relative to the centre after an fftshift.
        const int fv = v <= h / 2 ? v : v - h;
        const auto* row = spectrum.ptr<cv::Vec2d>(v);
        for (int u = 0; u < w; ++u) {
            const int fu = u <= w / 2 ? u : u - w;
            if (static_cast<double>(fu) * fu + static_cast<double>(fv) * fv <= r2)
                continue;
            sum += std::log1p(std::hypot(row[u][0], row[u][1]));
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double blur_score(const Frame& frame, std::span<const int> radii, Exec exec)
{
    if (radii.empty())
        throw_invalid("blur_score: empty radius list");
    for (int r : radii)
        if (r < 0)
            throw_invalid("blur_score: negative radius");
    check_frame(frame);

    const cv::Mat gray = to_luma(frame.rgb);
    const double base = high_frequency_energy(gray);
    double blurred_sum = 0.0;
    for (int r : radii) {
        if (r == 0) {
            blurred_sum += base;
            continue;
        }
        const cv::Mat b = exec == Exec::parallel ? kernels::gaussian_blur(gray, r)
                                                 : kernels::serial::gaussian_blur(gray, r);
        blurred_sum += high_frequency_energy(b);
    }
    return base - blurred_sum / static_cast<double>(radii.size());
}

std::vector<int> radius_range(int lo, int hi, int step)
{
    if (step <= 0 || lo < 0 || hi < lo)
        throw_invalid("radius_range: need 0 <= lo <= hi and step > 0");
    std::vector<int> out;
    for (int r = lo; r <= hi; r += step)
        out.push_back(r);
    return out;
}

std::vector<int> parse_radii(const std::string& text)
{
    auto to_int = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw InvalidInput("cannot parse radius list '" + text + "'");
        }
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string p; std::getline(ss, p, ':');)
            parts.push_back(p);
        if (parts.size() != 3)
            throw InvalidInput("radius range must be lo:hi:step, got '" + text + "'");
        return radius_range(to_int(parts[0]), to_int(parts[1]), to_int(parts[2]));
    }
    std::vector<int> out;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
        out.push_back(to_int(p));
    if (out.empty())
        throw InvalidInput("empty radius list");
    return out;
}

KeyframeSelection select_from_features(std::span<const Frame> frames, std::span<const FrameFeatures> features,
                                       const KeyframeParams& params)
{
    if (frames.empty())
        throw_invalid("select_keyframes: no frames");
    if (features.size() != frames.size())
        throw_invalid("select_keyframes: feature count does not match frame count");
    if (params.hamming_threshold < 0 || params.hamming_threshold > 64)
        throw_invalid("select_keyframes: hamming threshold outside [0,64]");

    KeyframeSelection sel;
    sel.features.assign(features.begin(), features.end());
    const FrameFeatures* last_kept = nullptr;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = features[i];
        const int idx = frames[i].index;
        if (f.blur_score < params.blur_threshold) {
            sel.rejected_blurry.push_back(idx);
        } else if (last_kept && hamming_distance(f.hash, last_kept->hash) <= params.hamming_threshold) {
            sel.rejected_duplicate.push_back(idx);
        } else {
            sel.kept.push_back(idx);
            last_kept = &f;
        }
    }
    sel.retention_ratio = static_cast<double>(sel.kept.size()) / static_cast<double>(frames.size());
    sel.empty_selection = sel.kept.empty();
    return sel;
}

KeyframeSelection select_keyframes(std::span<const Frame> frames, const KeyframeParams& params)
{
    if (frames.empty())
        throw_invalid("select_keyframes: no frames");
    if (params.radii.empty())
        throw_invalid("select_keyframes: empty radius list");
    const auto features = kernels::frame_features(frames, params.radii);
    return select_from_features(frames, features, params);
}

std::string hash_hex(PerceptualHash h)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.bits));
    return buf;
}

} // namespace voleta
