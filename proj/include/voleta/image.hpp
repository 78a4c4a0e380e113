#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

namespace voleta {

/// One RGB capture. `rgb` is CV_8UC3 in R,G,B channel order.
struct Frame {
    int index = 0;
    std::string id;
    cv::Mat rgb;

    int width() const { return rgb.cols; }
    int height() const { return rgb.rows; }
};

using FrameSet = std::vector<Frame>;

/// Metric depth raster; 0 marks a pixel without a valid return.
struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    DepthMap() = default;
    DepthMap(int w, int h, double fill = 0.0) : width(w), height(h), values(static_cast<size_t>(w) * h, fill) {}

    double& at(int x, int y) { return values[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return values[static_cast<size_t>(y) * width + x]; }
};

enum class MaskKind { food, reference };

struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;
    MaskKind kind = MaskKind::food;

    BinaryMask() = default;
    BinaryMask(int w, int h, MaskKind k = MaskKind::food)
        : width(w), height(h), bits(static_cast<size_t>(w) * h, 0), kind(k) {}

    bool test(int x, int y) const { return bits[static_cast<size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool on = true) { bits[static_cast<size_t>(y) * width + x] = on ? 1 : 0; }
    std::size_t count() const;
    bool empty() const { return count() == 0; }
};

/// RGBA raster, CV_8UC4 in R,G,B,A order.
struct RgbaImage {
    cv::Mat rgba;
};

/// BT.601 luma as CV_64F, values in [0,255].
cv::Mat to_luma(const cv::Mat& rgb);

/// Frame from a CV_8UC3 RGB matrix.
Frame make_frame(int index, std::string id, cv::Mat rgb);

} // namespace voleta
