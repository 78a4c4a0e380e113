#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "voleta/image.hpp"

namespace voleta {

/// 64-bit DCT perceptual hash. Bit i (row-major over the 8x8 low-frequency block)
/// is set iff coefficient i exceeds the median of the 63 non-DC coefficients.
struct PerceptualHash {
    std::uint64_t bits = 0;

    friend bool operator==(PerceptualHash, PerceptualHash) = default;
};

enum class Exec { parallel, serial };

struct FrameFeatures {
    PerceptualHash hash;
    double blur_score = 0.0;
};

PerceptualHash perceptual_hash(const Frame& frame);

int hamming_distance(PerceptualHash a, PerceptualHash b);

/// Mean log(1 + |F|) of the centred 2-D spectrum of a CV_64F image, taken outside
/// the disc of radius min(w,h)/16 around DC.
double high_frequency_energy(const cv::Mat& gray);

/// energy(frame) - mean_r energy(blur(frame, r)). Larger means sharper.
double blur_score(const Frame& frame, std::span<const int> radii, Exec exec = Exec::parallel);

/// Even radii lo, lo+step, ..., hi (inclusive).
std::vector<int> radius_range(int lo, int hi, int step);
/// Parses "lo:hi:step" or a comma list "0,2,4".
std::vector<int> parse_radii(const std::string& text);

struct KeyframeSelection {
    std::vector<int> kept;
    std::vector<int> rejected_blurry;
    std::vector<int> rejected_duplicate;
    double retention_ratio = 0.0;
    bool empty_selection = false; ///< every frame failed the blur gate
    std::vector<FrameFeatures> features; ///< per input frame, input order
};

struct KeyframeParams {
    int hamming_threshold = 12;
    double blur_threshold = 0.0;
    std::vector<int> radii = radius_range(0, 30, 2);
};

/// Single forward pass in capture order over precomputed features.
KeyframeSelection select_keyframes(std::span<const Frame> frames, const KeyframeParams& params);

/// The sequential fold itself, for callers that already hold per-frame features.
KeyframeSelection select_from_features(std::span<const Frame> frames, std::span<const FrameFeatures> features,
                                       const KeyframeParams& params);

std::string hash_hex(PerceptualHash h);

} // namespace voleta
