#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "reference_data.hpp"
#include "voleta/errors.hpp"
#include "voleta/metrology.hpp"

using namespace voleta;
using fixtures::rect_mask;

TEST_SUITE("metrology") {

TEST_CASE("scale from block lengths")
{
    const std::vector<double> three{0.115, 0.115, 0.115};
    CHECK(std::abs(scale_from_reference_blocks(three, 0.012) - 0.1043478261) < 1e-9);
    CHECK(scale_from_reference_blocks(std::vector<double>{0.012}, 0.012) == doctest::Approx(1.0));
    CHECK(scale_from_reference_blocks(std::vector<double>{0.024, 0.024}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(scale_from_reference_blocks(std::vector<double>{}), InvalidInput);
    CHECK_THROWS_AS(scale_from_reference_blocks(std::vector<double>{0.1, 0.0}), InvalidInput);
    CHECK_THROWS_AS(scale_from_reference_blocks(std::vector<double>{0.1, -0.2}), InvalidInput);
    CHECK_THROWS_AS(scale_from_reference_blocks(three, 0.0), InvalidInput);
}

TEST_CASE("scale is inversely homogeneous in the block lengths")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> l(1 + rng() % 6);
        for (auto& x : l)
            x = u(rng);
        const double k = u(rng);
        auto scaled = l;
        for (auto& x : scaled)
            x *= k;
        CHECK(scale_from_reference_blocks(scaled) == doctest::Approx(scale_from_reference_blocks(l) / k).epsilon(1e-12));
    }
}

TEST_CASE("mask extent examples")
{
    BinaryMask single(10, 10);
    single.set(4, 7);
    const auto e1 = mask_extent(single);
    CHECK(e1.w == 1);
    CHECK(e1.l == 1);
    CHECK(e1.bbox.x == 4);
    CHECK(e1.bbox.y == 7);

    const auto e2 = mask_extent(rect_mask(300, 300, 5, 9, 238, 257));
    CHECK(e2.w == 238);
    CHECK(e2.l == 257);

    // Portrait bbox: sorted extents, original orientation kept in bbox.
    auto ell = rect_mask(40, 40, 0, 0, 3, 20);
    for (int x = 0; x < 10; ++x)
        ell.set(x, 19);
    const auto e3 = mask_extent(ell);
    CHECK(e3.w == 10);
    CHECK(e3.l == 20);
    CHECK(e3.bbox.width == 10);
    CHECK(e3.bbox.height == 20);

    const auto landscape = mask_extent(rect_mask(50, 50, 0, 0, 30, 5));
    CHECK(landscape.w == 5);
    CHECK(landscape.l == 30);
    CHECK(landscape.bbox.width == 30);

    CHECK_THROWS_AS(mask_extent(BinaryMask(8, 8)), InvalidInput);
}

TEST_CASE("adding pixels never shrinks the extent")
{
    std::mt19937_64 rng(2);
    BinaryMask m(64, 48);
    m.set(30, 20);
    auto prev = mask_extent(m);
    for (int i = 0; i < 300; ++i) {
        m.set(static_cast<int>(rng() % 64), static_cast<int>(rng() % 48));
        const auto e = mask_extent(m);
        CHECK(e.w >= prev.w);
        CHECK(e.l >= prev.l);
        prev = e;
    }
}

TEST_CASE("pixels per unit")
{
    CHECK(pixels_per_unit(rect_mask(120, 120, 10, 10, 100, 100, MaskKind::reference), 0.10, 0.10) ==
          doctest::Approx(0.001));
    const double ppu = pixels_per_unit(rect_mask(400, 400, 20, 10, 320, 360, MaskKind::reference), 0.05715, 0.0643);
    CHECK(ppu == doctest::Approx(0.0001786).epsilon(5e-4));
    CHECK(pixels_per_unit(rect_mask(250, 250, 0, 0, 100, 200, MaskKind::reference), 0.10, 0.10) ==
          doctest::Approx(0.00075));
    CHECK_THROWS_AS(pixels_per_unit(BinaryMask(5, 5), 0.1, 0.1), InvalidInput);
    CHECK_THROWS_AS(pixels_per_unit(rect_mask(5, 5, 0, 0, 2, 2), 0.0, 0.1), InvalidInput);
}

TEST_CASE("masked mean depth")
{
    const auto mask = rect_mask(10, 10, 0, 0, 4, 2);
    CHECK(masked_mean_depth(DepthMap(10, 10, 0.5), mask) == doctest::Approx(0.5));

    DepthMap split(10, 10, 0.0);
    for (int x = 0; x < 4; ++x) {
        split.at(x, 0) = 0.4;
        split.at(x, 1) = 0.6;
    }
    CHECK(masked_mean_depth(split, mask) == doctest::Approx(0.5));

    DepthMap holes(3, 1, 0.5);
    holes.at(2, 0) = 0.0;
    CHECK(masked_mean_depth(holes, rect_mask(3, 1, 0, 0, 3, 1)) == doctest::Approx(0.5));

    CHECK_THROWS_AS(masked_mean_depth(DepthMap(10, 10, 0.0), mask), InvalidInput);
    CHECK_THROWS_AS(masked_mean_depth(DepthMap(9, 10, 0.5), mask), IntegrityError);
}

TEST_CASE("food height")
{
    CHECK(food_height(0.600, 0.577) == doctest::Approx(0.023));
    CHECK(food_height(0.577, 0.600) == doctest::Approx(0.023));
    CHECK(food_height(0.5, 0.5) == 0.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const double a = u(rng), b = u(rng);
        CHECK(food_height(a, b) == food_height(b, a));
        CHECK(food_height(a, b) >= 0.0);
    }
}

TEST_CASE("potential volume reproduces published rows")
{
    for (const auto& row : refdata::kPotentialRows) {
        const double v = potential_volume(row.f_w, row.f_l, row.f_h_cm * 0.01, row.ppu_cm * 0.01) * 1e6;
        CAPTURE(row.id);
        CHECK(std::abs(v - row.volume_cm3) / row.volume_cm3 < 0.005);
    }
    CHECK(potential_volume(1, 1, 1.0, 1.0) == 1.0);
}

TEST_CASE("potential volume homogeneity")
{
    const double base = potential_volume(120, 90, 0.02, 0.0003);
    CHECK(potential_volume(120, 90, 0.06, 0.0003) == doctest::Approx(3.0 * base));
    CHECK(potential_volume(120, 90, 0.02, 0.0006) == doctest::Approx(4.0 * base));
}

TEST_CASE("fine-tune examples")
{
    CHECK(fine_tune_scale(0.1, 1000.0, 1.0, 0.25) == 0.1);
    CHECK(fine_tune_scale(0.2, 1000.0, 1.0, 0.25) == doctest::Approx(0.1).epsilon(1e-12));
    const double v = 0.105 * 0.105 * 0.105 * 1000.0;
    REQUIRE(std::abs(v - 1.0) < 0.25);
    CHECK(fine_tune_scale(0.105, 1000.0, 1.0, 0.25) == 0.105);
    CHECK_THROWS_AS(fine_tune_scale(0.0, 1000.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(fine_tune_scale(0.1, -1.0, 1.0), InvalidInput);
    CHECK_THROWS_AS(fine_tune_scale(0.1, 1000.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(fine_tune_scale(0.1, 1000.0, 1.0, 0.0), InvalidInput);
    CHECK_THROWS_AS(fine_tune_scale(0.1, 1000.0, 1.0, 1.5), InvalidInput);
}

TEST_CASE("fine-tune fixed point and correction exactness")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.01, 10.0), tol(0.01, 1.0);
    for (int i = 0; i < 300; ++i) {
        const double s = u(rng), vu = u(rng) * 100.0, t = tol(rng);
        CHECK(fine_tune_scale(s, vu, s * s * s * vu, t) == s);
        const double potential = u(rng);
        const double sf = fine_tune_scale(s, vu, potential, t);
        if (sf != s)
            CHECK(std::abs(sf * sf * sf * vu - potential) / potential < 1e-12);
        else
            CHECK(std::abs(s * s * s * vu - potential) / potential <= t);
    }
}

TEST_CASE("one-shot selection")
{
    CHECK(select_scale_one_shot(std::vector<double>{0.1, 0.2}, 1000.0, 1.0) == 0.1);
    CHECK(select_scale_one_shot(std::vector<double>{0.5}, 3.0, 7.0) == 0.5);
    CHECK(select_scale_one_shot(std::vector<double>{0.1, 0.1}, 5.0, 2.0) == 0.1);
    CHECK_THROWS_AS(select_scale_one_shot(std::vector<double>{}, 1.0, 1.0), InvalidInput);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> c(1 + rng() % 8);
        for (auto& x : c)
            x = u(rng);
        const double vu = 100.0 * u(rng), p = u(rng);
        const double pick = select_scale_one_shot(c, vu, p);
        const double dev = std::abs(pick * pick * pick * vu - p);
        for (double x : c)
            CHECK(dev <= std::abs(x * x * x * vu - p));
    }
}

TEST_CASE("depth validation on a synthetic overhead view")
{
    const int n = 100;
    const auto food = rect_mask(n, n, 10, 10, 40, 30);
    const auto ref = rect_mask(n, n, 60, 60, 25, 25, MaskKind::reference);
    DepthMap depth(n, n, 0.5);
    for (int y = 10; y < 40; ++y)
        for (int x = 10; x < 50; ++x)
            depth.at(x, y) = 0.47;
    const OverheadView view{&depth, &food, &ref, 0.025, 0.025};
    const auto dv = validate_with_depth(view);
    CHECK(dv.ppu == doctest::Approx(0.001));
    CHECK(dv.food_height == doctest::Approx(0.03));
    CHECK(dv.food_extent.w == 30);
    CHECK(dv.food_extent.l == 40);
    CHECK(dv.potential_volume == doctest::Approx(0.030 * 0.040 * 0.03));

    // A block scale that is far off gets corrected; one that is close is kept.
    const double vu = 36.0; // unitless volume
    const double exact = std::cbrt(dv.potential_volume / vu);
    const std::vector<double> far{0.012 / (2.0 * exact)};
    const auto corrected = estimate_scale(far, 0.012, vu, &view, 0.25);
    CHECK(corrected.method == ScaleMethod::depth_corrected);
    CHECK(corrected.s_fine == doctest::Approx(exact).epsilon(1e-12));
    const std::vector<double> near{0.012 / (1.02 * exact)};
    const auto kept = estimate_scale(near, 0.012, vu, &view, 0.25);
    CHECK(kept.method == ScaleMethod::blocks);
    CHECK(kept.s_fine == kept.s_initial);
    const auto blocks_only = estimate_scale(near, 0.012, vu, nullptr, 0.25);
    CHECK(blocks_only.ppu == 0.0);
    CHECK(to_string(ScaleMethod::depth_corrected) == "depth-corrected");

    const OverheadView missing{&depth, nullptr, &ref, 0.025, 0.025};
    CHECK_THROWS_AS(validate_with_depth(missing), InvalidInput);
}

} // TEST_SUITE
