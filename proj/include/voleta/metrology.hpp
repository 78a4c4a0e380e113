#pragma once

#include <span>
#include <string>

#include "voleta/image.hpp"

namespace voleta {

/// Edge length of one chessboard block on the reference board, in meters.
inline constexpr double kDefaultBlockEdgeM = 0.012;
inline constexpr double kDefaultFineTuneTolerance = 0.25;

struct PixelRect {
    int x = 0, y = 0, width = 0, height = 0;
};

/// Tight bounding box of a mask. `w <= l` always; `bbox` keeps the image orientation.
struct MaskExtent {
    int w = 0;
    int l = 0;
    PixelRect bbox;
};

enum class ScaleMethod { blocks, depth_corrected, one_shot };

/// Scaling factor with the inputs that produced it.
struct ScaleEstimate {
    double s_initial = 0.0;       ///< meters per mesh unit, from block lengths
    double s_fine = 0.0;          ///< after depth validation
    double l_avg = 0.0;           ///< mean block length, mesh units
    double ppu = 0.0;             ///< meters per pixel; 0 if depth validation did not run
    double potential_volume = 0.0; ///< m^3; 0 if depth validation did not run
    double unitless_volume = 0.0;
    double food_height = 0.0;     ///< meters
    MaskExtent food_extent;
    MaskExtent reference_extent;
    ScaleMethod method = ScaleMethod::blocks;
};

/// l_real / mean(block_lengths).
double scale_from_reference_blocks(std::span<const double> block_lengths, double l_real = kDefaultBlockEdgeM);

MaskExtent mask_extent(const BinaryMask& mask);

/// Meters per pixel at the reference plane: mean of the per-axis ratios, short real side
/// paired with the short pixel side.
double pixels_per_unit(const BinaryMask& ref_mask, double ref_real_w, double ref_real_l);

/// Mean depth over set mask pixels with a valid (non-zero) return.
double masked_mean_depth(const DepthMap& depth, const BinaryMask& mask);

double food_height(double d_r, double d_f);

/// Bounding-box volume (f_w * ppu) * (f_l * ppu) * f_h.
double potential_volume(double f_w, double f_l, double f_h, double ppu);

/// Keeps s if s^3 * unitless_volume is within `tolerance` (relative) of the potential
/// volume; otherwise returns the cube-root correction that hits the potential exactly.
double fine_tune_scale(double s, double unitless_volume, double potential, double tolerance = kDefaultFineTuneTolerance);

/// Candidate whose scaled volume lies closest to the potential volume; ties go to the smaller.
double select_scale_one_shot(std::span<const double> candidates, double unitless_volume, double potential);

/// Everything the depth check needs from one overhead view.
struct OverheadView {
    const DepthMap* depth = nullptr;
    const BinaryMask* food_mask = nullptr;
    const BinaryMask* reference_mask = nullptr;
    double reference_real_w = 0.0;
    double reference_real_l = 0.0;
};

struct DepthValidation {
    double ppu = 0.0;
    double d_r = 0.0;
    double d_f = 0.0;
    double food_height = 0.0;
    double potential_volume = 0.0;
    MaskExtent food_extent;
    MaskExtent reference_extent;
};

DepthValidation validate_with_depth(const OverheadView& view);

/// Full few-shot chain: blocks -> S, depth -> potential volume -> S_fine.
ScaleEstimate estimate_scale(std::span<const double> block_lengths, double l_real, double unitless_volume,
                             const OverheadView* view, double tolerance = kDefaultFineTuneTolerance);

std::string to_string(ScaleMethod m);

} // namespace voleta
