#pragma once

// Synthetic rasters, meshes and scenes shared by the unit and acceptance suites.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <unistd.h>

#include <opencv2/core.hpp>

#include "voleta/image.hpp"
#include "voleta/mesh.hpp"
#include "voleta/sceneio.hpp"

namespace fixtures {

using namespace voleta;
namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag)
    {
        static int counter = 0;
        path_ = fs::temp_directory_path() / ("voleta_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline cv::Mat gray_to_rgb(const cv::Mat& gray8)
{
    std::vector<cv::Mat> ch{gray8, gray8, gray8};
    cv::Mat rgb;
    cv::merge(ch, rgb);
    return rgb;
}

/// Checkerboard of `cell`-pixel squares; `inverted` swaps black and white.
inline Frame checkerboard(int index, int w, int h, int cell, bool inverted = false)
{
    cv::Mat g(h, w, CV_8U);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const bool on = ((x / cell) + (y / cell)) % 2 == 0;
            g.at<std::uint8_t>(y, x) = (on != inverted) ? 230 : 25;
        }
    return make_frame(index, "checker" + std::to_string(index), gray_to_rgb(g));
}

inline Frame uniform_frame(int index, int w, int h, std::uint8_t value)
{
    return make_frame(index, "uniform" + std::to_string(index), cv::Mat(h, w, CV_8UC3, cv::Scalar(value, value, value)));
}

inline Frame noise_frame(int index, int w, int h, std::uint64_t seed)
{
    cv::Mat rgb(h, w, CV_8UC3);
    cv::RNG rng(seed);
    rng.fill(rgb, cv::RNG::UNIFORM, 0, 256);
    return make_frame(index, "noise" + std::to_string(index), rgb);
}

/// Smooth random texture: a few Gaussian blobs of random position, size and polarity.
/// Distinct seeds give distinct low-frequency content.
inline Frame blob_frame(int index, int w, int h, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    cv::Mat acc(h, w, CV_64F, cv::Scalar(128.0));
    for (int b = 0; b < 6; ++b) {
        const double cx = u(rng) * w, cy = u(rng) * h, s = (0.08 + 0.2 * u(rng)) * w, a = (u(rng) - 0.5) * 220.0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                acc.at<double>(y, x) += a * std::exp(-((x - cx) * (x - cx) + (y - cy) * (y - cy)) / (2 * s * s));
    }
    // Fine texture so the frame is sharp.
    cv::RNG r(seed ^ 0x9e3779b97f4a7c15ULL);
    cv::Mat noise(h, w, CV_64F);
    r.fill(noise, cv::RNG::NORMAL, 0.0, 12.0);
    acc += noise;
    cv::Mat g;
    acc.convertTo(g, CV_8U);
    return make_frame(index, "blob" + std::to_string(index), gray_to_rgb(g));
}

/// Every pixel + delta, saturated to [0,255].
inline Frame brightened(const Frame& f, int delta)
{
    cv::Mat out;
    f.rgb.convertTo(out, CV_8UC3, 1.0, delta);
    return make_frame(f.index, f.id + "_bright", out);
}

inline BinaryMask rect_mask(int w, int h, int x0, int y0, int rw, int rh, MaskKind kind = MaskKind::food)
{
    BinaryMask m(w, h, kind);
    for (int y = y0; y < y0 + rh; ++y)
        for (int x = x0; x < x0 + rw; ++x)
            m.set(x, y);
    return m;
}

/// Parameters of the synthetic few-shot scene: a unitless icosphere "food" whose
/// metric size is fixed by the block lengths, on a table seen from above.
struct SyntheticScene {
    int frames = 6;
    int image_side = 128;
    double unitless_radius = 10.0;
    double metric_radius = 0.03;        ///< meters
    double table_depth = 0.600;         ///< meters
    double ppu = 0.001;                 ///< meters per pixel
    int icosphere_subdivisions = 5;
    bool satellite = true;              ///< add a tiny isolated piece that cleanup must remove
    bool ground_truth = true;
    bool excluded = false;
    int scene_id = 1;
    std::string label = "synthetic_sphere";
    std::uint64_t seed = 11;

    double scale() const { return metric_radius / unitless_radius; }
    /// Block edge measured in mesh units so that 0.012 / l_avg == scale().
    double block_length() const { return 0.012 / scale(); }
    /// Height making the bounding-box potential equal the ball volume.
    double food_height() const { return M_PI / 3.0 * metric_radius; }
    double oracle_volume_m3() const { return 4.0 / 3.0 * M_PI * std::pow(metric_radius, 3); }
};

inline TriangleMesh synthetic_food_mesh(const SyntheticScene& s)
{
    auto food = make_icosphere(s.unitless_radius, s.icosphere_subdivisions, Vec3(1.0, -2.0, 0.5));
    if (s.satellite) {
        auto sat = make_icosphere(0.05 * s.unitless_radius * 0.2, 1, Vec3(3.0 * s.unitless_radius, 0.0, 0.0));
        food = merge_meshes({food, sat});
    }
    food.name = "food";
    return food;
}

/// Writes the scene in the canonical on-disk layout and returns its directory.
inline fs::path write_synthetic_scene(const fs::path& root, const SyntheticScene& s)
{
    const fs::path dir = root / ("scene_" + std::to_string(s.scene_id));
    for (const char* sub : {"rgb", "depth", "mask_food", "mask_ref", "meshes"})
        fs::create_directories(dir / sub);

    const int n = s.image_side;
    const int food_px = static_cast<int>(std::lround(2.0 * s.metric_radius / s.ppu));
    const int ref_px = 50;
    const double ref_real = ref_px * s.ppu;
    const auto food_mask = rect_mask(n, n, 8, 8, food_px, food_px, MaskKind::food);
    const auto ref_mask = rect_mask(n, n, n - ref_px - 4, n - ref_px - 4, ref_px, ref_px, MaskKind::reference);

    DepthMap depth(n, n, s.table_depth);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x)
            if (food_mask.test(x, y))
                depth.at(x, y) = s.table_depth - s.food_height();

    for (int i = 0; i < s.frames; ++i) {
        const std::string stem = "frame_" + std::to_string(i);
        save_frame_png(blob_frame(i, n, n, s.seed * 1000 + static_cast<std::uint64_t>(i)), dir / "rgb" / (stem + ".png"));
        save_depth_png(depth, dir / "depth" / (stem + ".png"), 0.001);
        save_mask_png(food_mask, dir / "mask_food" / (stem + ".png"));
        save_mask_png(ref_mask, dir / "mask_ref" / (stem + ".png"));
    }

    SceneMetadata meta;
    meta.label = s.label;
    meta.reference_real_w_m = ref_real;
    meta.reference_real_l_m = ref_real;
    meta.excluded = s.excluded;
    meta.scene_id = s.scene_id;
    write_metadata(meta, dir / "metadata.json");

    const double l = s.block_length();
    std::ofstream(dir / "blocks.json") << "{\"block_lengths\": [" << l * 0.98 << ", " << l * 1.02 << ", " << l << ", " << l << "]}\n";

    save_mesh(synthetic_food_mesh(s), dir / "meshes" / "food.ply");
    if (s.ground_truth) {
        auto gt = make_icosphere(s.metric_radius, 4, Vec3(0.2, 0.1, -0.05));
        gt.unit = LengthUnit::meters;
        save_mesh(gt, dir / "meshes" / "gt.ply");
    }
    return dir;
}

} // namespace fixtures
