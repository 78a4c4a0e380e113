#include "voleta/image.hpp"

#include <algorithm>

#include "voleta/errors.hpp"

namespace voleta {

std::size_t BinaryMask::count() const
{
    return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

cv::Mat to_luma(const cv::Mat& rgb)
{
    if (rgb.type() != CV_8UC3)
        throw_invalid("to_luma: expected an 8-bit 3-channel raster");
    cv::Mat gray(rgb.rows, rgb.cols, CV_64F);
    for (int y = 0; y < rgb.rows; ++y) {
        const auto* src = rgb.ptr<cv::Vec3b>(y);
        auto* dst = gray.ptr<double>(y);
        for (int x = 0; x < rgb.cols; ++x)
            dst[x] = 0.299 * src[x][0] + 0.587 * src[x][1] + 0.114 * src[x][2];
    }
    return gray;
}

Frame make_frame(int index, std::string id, cv::Mat rgb)
{
    Frame f;
    f.index = index;
    f.id = std::move(id);
    f.rgb = std::move(rgb);
    return f;
}

} // namespace voleta
