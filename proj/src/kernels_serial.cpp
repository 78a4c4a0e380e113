#include <cmath>

#include "voleta/errors.hpp"
#include "voleta/kernels.hpp"

namespace voleta::kernels {

namespace detail {

std::vector<double> gaussian_taps(int radius)
{
    const double sigma = 0.3 * (radius - 1) + 0.8;
    std::vector<double> taps(2 * radius + 1);
    double sum = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        taps[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
        sum += taps[k + radius];
    }
    for (auto& t : taps)
        t /= sum;
    return taps;
}

int reflect101(int i, int n)
{
    if (n == 1)
        return 0;
    // Fold into one period of the mirrored sequence 0..n-1..1.
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0)
        i += period;
    return i < n ? i : period - i;
}

double tetra_chunk(std::span<const Vec3> v, std::span<const Triangle> t, std::size_t begin, std::size_t end)
{
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& tri = t[i];
        sum += v[tri[0]].dot(v[tri[1]].cross(v[tri[2]]));
    }
    return sum;
}

} // namespace detail

namespace serial {

double signed_volume(std::span<const Vec3> vertices, std::span<const Triangle> triangles)
{
    const std::size_t n = triangles.size();
    double total = 0.0;
    for (std::size_t b = 0; b < n; b += kReductionChunk)
        total += detail::tetra_chunk(vertices, triangles, b, std::min(n, b + kReductionChunk));
    return total / 6.0;
}

cv::Mat gaussian_blur(const cv::Mat& gray, int radius)
{
    CV_Assert(gray.type() == CV_64F);
    if (radius < 0)
        throw_invalid("gaussian_blur: negative radius");
    if (radius == 0)
        return gray.clone();
    const auto taps = detail::gaussian_taps(radius);
    const int w = gray.cols, h = gray.rows;

    cv::Mat tmp(h, w, CV_64F), out(h, w, CV_64F);
    for (int y = 0; y < h; ++y) {
        const auto* src = gray.ptr<double>(y);
        auto* dst = tmp.ptr<double>(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[k + radius] * src[detail::reflect101(x + k, w)];
            dst[x] = acc;
        }
    }
    for (int y = 0; y < h; ++y) {
        auto* dst = out.ptr<double>(y);
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[k + radius] * tmp.at<double>(detail::reflect101(y + k, h), x);
            dst[x] = acc;
        }
    }
    return out;
}

std::vector<NearestHit> nearest(const KdTree& tree, std::span<const Vec3> queries)
{
    std::vector<NearestHit> out(queries.size());
    for (std::size_t i = 0; i < queries.size(); ++i)
        out[i] = tree.nearest(queries[i]);
    return out;
}

std::vector<FrameFeatures> frame_features(std::span<const Frame> frames, std::span<const int> radii)
{
    std::vector<FrameFeatures> out(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        out[i].hash = perceptual_hash(frames[i]);
        out[i].blur_score = blur_score(frames[i], radii, Exec::serial);
    }
    return out;
}

} // namespace serial
} // namespace voleta::kernels
