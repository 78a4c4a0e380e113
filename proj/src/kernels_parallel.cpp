#include <exception>
#include <mutex>

#include <omp.h>

#include "voleta/errors.hpp"
#include "voleta/kernels.hpp"

namespace voleta::kernels {

namespace {

// Exceptions must not escape an OpenMP region; the first one is rethrown after the join.
class ErrorSlot {
public:
    template <class F>
    void run(F&& f) noexcept
    {
        try {
            f();
        } catch (...) {
            std::lock_guard lock(mu_);
            if (!err_)
                err_ = std::current_exception();
        }
    }
    void rethrow() const
    {
        if (err_)
            std::rethrow_exception(err_);
    }

private:
    std::mutex mu_;
    std::exception_ptr err_;
};

} // namespace

double signed_volume(std::span<const Vec3> vertices, std::span<const Triangle> triangles)
{
    const std::size_t n = triangles.size();
    const auto chunks = static_cast<std::ptrdiff_t>((n + kReductionChunk - 1) / kReductionChunk);
    std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < chunks; ++c) {
        const std::size_t b = static_cast<std::size_t>(c) * kReductionChunk;
        partial[static_cast<std::size_t>(c)] = detail::tetra_chunk(vertices, triangles, b, std::min(n, b + kReductionChunk));
    }
    double total = 0.0;
    for (double p : partial)
        total += p;
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
#pragma omp parallel for schedule(static)
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
#pragma omp parallel for schedule(static)
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
    const auto n = static_cast<std::ptrdiff_t>(queries.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        out[static_cast<std::size_t>(i)] = tree.nearest(queries[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<FrameFeatures> frame_features(std::span<const Frame> frames, std::span<const int> radii)
{
    std::vector<FrameFeatures> out(frames.size());
    const auto n = static_cast<std::ptrdiff_t>(frames.size());
    ErrorSlot errors;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        errors.run([&] {
            const auto& f = frames[static_cast<std::size_t>(i)];
            auto& dst = out[static_cast<std::size_t>(i)];
            dst.hash = perceptual_hash(f);
            // Inner blur stays serial: the frame loop already owns the threads.
            dst.blur_score = blur_score(f, radii, Exec::serial);
        });
    }
    errors.rethrow();
    return out;
}

} // namespace voleta::kernels
