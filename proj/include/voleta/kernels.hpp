#pragma once

// Data-parallel inner loops. Every kernel in `voleta::kernels` has a single-threaded
// twin in `voleta::kernels::serial` that is kept as the reference for tests and
// benchmarks. Parallel and serial variants return bit-identical results.

#include <cstdint>
#include <span>
#include <vector>

#include <opencv2/core.hpp>

#include "voleta/frames.hpp"
#include "voleta/image.hpp"
#include "voleta/kdtree.hpp"
#include "voleta/mesh.hpp"

namespace voleta {

namespace kernels {

/// Triangles per partial sum in volume/area reductions. Fixed so the summation order,
/// and therefore the result, does not depend on the thread count.
inline constexpr std::size_t kReductionChunk = 4096;

double signed_volume(std::span<const Vec3> vertices, std::span<const Triangle> triangles);

/// Separable Gaussian blur of a CV_64F image; kernel half-width `radius`,
/// sigma = 0.3 * (radius - 1) + 0.8, reflect-101 borders. Radius 0 returns a copy.
cv::Mat gaussian_blur(const cv::Mat& gray, int radius);

std::vector<NearestHit> nearest(const KdTree& tree, std::span<const Vec3> queries);

std::vector<FrameFeatures> frame_features(std::span<const Frame> frames, std::span<const int> radii);

namespace serial {

double signed_volume(std::span<const Vec3> vertices, std::span<const Triangle> triangles);
cv::Mat gaussian_blur(const cv::Mat& gray, int radius);
std::vector<NearestHit> nearest(const KdTree& tree, std::span<const Vec3> queries);
std::vector<FrameFeatures> frame_features(std::span<const Frame> frames, std::span<const int> radii);

} // namespace serial

/// Shared helpers used by both variants.
namespace detail {

std::vector<double> gaussian_taps(int radius);
int reflect101(int i, int n);
double tetra_chunk(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
                   std::size_t begin, std::size_t end);

} // namespace detail

} // namespace kernels
} // namespace voleta
