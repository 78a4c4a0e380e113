#include "voleta/metrology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voleta/errors.hpp"

namespace voleta {

namespace {

void require_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw InvalidInput(std::string(what) + " must be a positive finite number");
}

} // namespace

double scale_from_reference_blocks(std::span<const double> block_lengths, double l_real)
{
    if (block_lengths.empty())
        throw_invalid("scale_from_reference_blocks: no block lengths");
    require_positive(l_real, "l_real");
    double sum = 0.0;
    for (double l : block_lengths) {
        require_positive(l, "block length");
        sum += l;
    }
    const double l_avg = sum / static_cast<double>(block_lengths.size());
    return l_real / l_avg;
}

MaskExtent mask_extent(const BinaryMask& mask)
{
    int x0 = std::numeric_limits<int>::max(), y0 = x0, x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            if (mask.test(x, y)) {
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
            }
    if (x1 < 0)
        throw_invalid("mask_extent: mask has no set pixels");
    MaskExtent e;
    e.bbox = {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
    e.w = std::min(e.bbox.width, e.bbox.height);
    e.l = std::max(e.bbox.width, e.bbox.height);
    return e;
}

double pixels_per_unit(const BinaryMask& ref_mask, double ref_real_w, double ref_real_l)
{
    require_positive(ref_real_w, "reference real width");
    require_positive(ref_real_l, "reference real length");
    const auto e = mask_extent(ref_mask);
    const double real_short = std::min(ref_real_w, ref_real_l);
    const double real_long = std::max(ref_real_w, ref_real_l);
    return 0.5 * (real_short / e.w + real_long / e.l);
}

double masked_mean_depth(const DepthMap& depth, const BinaryMask& mask)
{
    if (depth.width != mask.width || depth.height != mask.height)
        throw IntegrityError("masked_mean_depth: depth " + std::to_string(depth.width) + "x" + std::to_string(depth.height) +
                             " vs mask " + std::to_string(mask.width) + "x" + std::to_string(mask.height));
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.bits.size(); ++i)
        if (mask.bits[i] && depth.values[i] > 0.0) {
            sum += depth.values[i];
            ++n;
        }
    if (n == 0)
        throw_invalid("masked_mean_depth: no valid depth under the mask");
    return sum / static_cast<double>(n);
}

double food_height(double d_r, double d_f)
{
    return std::abs(d_r - d_f);
}

double potential_volume(double f_w, double f_l, double f_h, double ppu)
{
    return (f_w * ppu) * (f_l * ppu) * f_h;
}

double fine_tune_scale(double s, double unitless_volume, double potential, double tolerance)
{
    require_positive(s, "scale");
    require_positive(unitless_volume, "unitless volume");
    require_positive(potential, "potential volume");
    if (!(tolerance > 0.0 && tolerance <= 1.0))
        throw_invalid("fine_tune_scale: tolerance must lie in (0,1]");
    const double v = s * s * s * unitless_volume;
    if (std::abs(v - potential) / potential <= tolerance)
        return s;
    return std::cbrt(potential / unitless_volume);
}

double select_scale_one_shot(std::span<const double> candidates, double unitless_volume, double potential)
{
    if (candidates.empty())
        throw_invalid("select_scale_one_shot: no candidates");
    require_positive(unitless_volume, "unitless volume");
    require_positive(potential, "potential volume");
    double best = 0.0;
    double best_dev = std::numeric_limits<double>::infinity();
    for (double c : candidates) {
        require_positive(c, "candidate scale");
        const double dev = std::abs(c * c * c * unitless_volume - potential);
        if (dev < best_dev || (dev == best_dev && c < best)) {
            best = c;
            best_dev = dev;
        }
    }
    return best;
}

DepthValidation validate_with_depth(const OverheadView& view)
{
    if (!view.depth || !view.food_mask || !view.reference_mask)
        throw_invalid("validate_with_depth: overhead view needs depth, food mask and reference mask");
    DepthValidation out;
    out.reference_extent = mask_extent(*view.reference_mask);
    out.food_extent = mask_extent(*view.food_mask);
    out.ppu = pixels_per_unit(*view.reference_mask, view.reference_real_w, view.reference_real_l);
    out.d_r = masked_mean_depth(*view.depth, *view.reference_mask);
    out.d_f = masked_mean_depth(*view.depth, *view.food_mask);
    out.food_height = food_height(out.d_r, out.d_f);
    out.potential_volume = potential_volume(out.food_extent.w, out.food_extent.l, out.food_height, out.ppu);
    return out;
}

ScaleEstimate estimate_scale(std::span<const double> block_lengths, double l_real, double unitless_volume,
                             const OverheadView* view, double tolerance)
{
    ScaleEstimate est;
    est.s_initial = scale_from_reference_blocks(block_lengths, l_real);
    est.l_avg = l_real / est.s_initial;
    est.unitless_volume = unitless_volume;
    est.s_fine = est.s_initial;
    est.method = ScaleMethod::blocks;
    if (view) {
        const auto dv = validate_with_depth(*view);
        est.ppu = dv.ppu;
        est.food_height = dv.food_height;
        est.food_extent = dv.food_extent;
        est.reference_extent = dv.reference_extent;
        est.potential_volume = dv.potential_volume;
        if (dv.potential_volume > 0.0) {
            est.s_fine = fine_tune_scale(est.s_initial, unitless_volume, dv.potential_volume, tolerance);
            if (est.s_fine != est.s_initial)
                est.method = ScaleMethod::depth_corrected;
        }
    }
    return est;
}

std::string to_string(ScaleMethod m)
{
    switch (m) {
    case ScaleMethod::blocks: return "blocks";
    case ScaleMethod::depth_corrected: return "depth-corrected";
    case ScaleMethod::one_shot: return "one-shot";
    }
    return "unknown";
}

} // namespace voleta
