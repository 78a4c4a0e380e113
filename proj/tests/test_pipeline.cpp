#include <doctest.h>

#include <fstream>
#include <random>
#include <set>

#include "fixtures.hpp"
#include "reference_data.hpp"
#include "voleta/errors.hpp"
#include "voleta/pipeline.hpp"

using namespace voleta;
namespace fs = std::filesystem;

namespace {

PipelineConfig fast_config()
{
    PipelineConfig c;
    c.samples = 2000;
    return c;
}

SceneRow volume_row(int id, double gt_cm3, double pred_cm3, bool excluded = false)
{
    SceneRow r;
    r.scene_id = id;
    r.label = "scene" + std::to_string(id);
    r.excluded = excluded;
    r.gt_volume = gt_cm3 / kCubicMetersToCm3;
    r.predicted_volume = pred_cm3 / kCubicMetersToCm3;
    return r;
}

std::vector<std::string> csv_lines(const std::string& csv)
{
    std::vector<std::string> out;
    std::istringstream in(csv);
    for (std::string line; std::getline(in, line);)
        out.push_back(line);
    return out;
}

} // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config defaults, validation and json round trip")
{
    PipelineConfig c;
    CHECK(c.hamming_threshold == 12);
    CHECK(c.blur_radii.size() == 16);
    CHECK(c.diameter_fraction == 0.05);
    CHECK_NOTHROW(c.validate());

    c.exclusions = {12, 15};
    c.one_shot_candidates = {0.1};
    c.reconstruction_provenance = {{"iterations", 15000}, {"resolution", "512x512"}};
    const auto back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));

    const auto from_string = config_from_json(nlohmann::json{{"blur_radii", "0:10:2"}});
    CHECK(from_string.blur_radii == std::vector<int>{0, 2, 4, 6, 8, 10});

    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"blur_radii", {1, 3}}}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"blur_radii", {32}}}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"hamming_threshold", 70}}), InvalidInput);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"diameter_fraction", "big"}}), ParseError);
    CHECK_THROWS_AS(config_from_json(nlohmann::json{{"samples", 0}}), InvalidInput);

    fixtures::TempDir tmp("config");
    std::ofstream(tmp / "c.json") << "{\"hamming_threshold\": 5}";
    CHECK(read_config(tmp / "c.json").hamming_threshold == 5);
    std::ofstream(tmp / "bad.json") << "{";
    CHECK_THROWS_AS(read_config(tmp / "bad.json"), ParseError);
    CHECK_THROWS_AS(read_config(tmp / "none.json"), IoError);
}

TEST_CASE("scene path names")
{
    for (auto p : {ScenePath::few_shot, ScenePath::one_shot, ScenePath::awaiting_reconstruction})
        CHECK(scene_path_from_string(to_string(p)) == p);
    CHECK_THROWS_AS(scene_path_from_string("two-shot"), ParseError);
}

TEST_CASE("aggregate reproduces the published MAPE")
{
    std::vector<SceneRow> rows;
    for (const auto& v : refdata::kVolumePairs)
        rows.push_back(volume_row(v.id, v.ground_truth, v.predicted));
    rows.push_back(volume_row(12, 100.0, 567.78, true));
    rows.push_back(volume_row(15, 100.0, 23.89, true));
    const auto a = aggregate(rows);
    CHECK(a.volume_scenes == 18);
    REQUIRE(a.mape);
    CHECK(std::abs(*a.mape - refdata::kPublishedMape) < 0.005);
}

TEST_CASE("aggregate edge cases")
{
    CHECK_FALSE(aggregate({}).mape);
    CHECK(*aggregate({volume_row(1, 50.0, 50.0)}).mape == 0.0);

    SceneRow c1 = volume_row(1, 10, 12), c2 = volume_row(2, 10, 9);
    c1.chamfer_with = 0.001;
    c1.chamfer_without = 0.1;
    c2.chamfer_with = 0.003;
    c2.chamfer_without = 0.2;
    SceneRow c3 = c2;
    c3.scene_id = 3;
    c3.excluded = true;
    const auto a = aggregate({c1, c2, c3});
    CHECK(a.chamfer_scenes == 2);
    CHECK(*a.chamfer_with_sum == doctest::Approx(0.004));
    CHECK(*a.chamfer_with_mean == doctest::Approx(0.002));
    CHECK(*a.chamfer_without_mean == doctest::Approx(0.15));
}

TEST_CASE("excluded rows never move the aggregates")
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(1.0, 400.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<SceneRow> rows;
        for (int i = 0; i < 10; ++i)
            rows.push_back(volume_row(i, u(rng), u(rng), i % 3 == 0));
        const auto before = aggregate(rows);
        for (auto& r : rows)
            if (r.excluded)
                r.predicted_volume = u(rng) / kCubicMetersToCm3;
        const auto after = aggregate(rows);
        CHECK(*before.mape == *after.mape);
    }
}

TEST_CASE("csv renders the published potential volume")
{
    VolumeReport rep;
    SceneRow r;
    r.scene_id = 1;
    r.label = "strawberry_2";
    r.ppu = 0.0001786;
    r.ref_w_px = 320;
    r.ref_l_px = 360;
    r.food_w_px = 238;
    r.food_l_px = 257;
    r.food_height = 0.02353;
    r.potential_volume = potential_volume(238, 257, 0.02353, 0.0001786);
    r.s_fine = 0.08955223881;
    rep.rows.push_back(r);
    const auto lines = csv_lines(render_csv(rep));
    REQUIRE(lines.size() == 2);
    CHECK(lines[1].find(",45.91,") != std::string::npos);
    CHECK(lines[1].find("0.01786") != std::string::npos);
    CHECK(lines[1].find("2.353") != std::string::npos);
    CHECK(lines[1].rfind("1,strawberry_2,easy,few-shot,false,", 0) == 0);
}

TEST_CASE("empty report renders header only")
{
    const auto lines = csv_lines(render_csv(VolumeReport{}));
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].rfind("scene_id,label,", 0) == 0);
}

TEST_CASE("csv quotes awkward labels")
{
    VolumeReport rep;
    SceneRow r;
    r.label = "bun, \"glazed\"";
    rep.rows.push_back(r);
    CHECK(render_csv(rep).find("\"bun, \"\"glazed\"\"\"") != std::string::npos);
}

TEST_CASE("two-decimal rendering")
{
    CHECK(format_fixed2(45.905) == "45.91"); // 45.905 is stored slightly above the midpoint
    CHECK(format_fixed2(0.125) == "0.12");   // exact tie, to even
    CHECK(format_fixed2(0.0) == "0.00");
}

TEST_CASE("report json round trip and format dispatch")
{
    VolumeReport rep;
    rep.rows.push_back(volume_row(1, 38.53, 40.06));
    rep.rows.back().diagnostics.push_back("note");
    rep.rows.push_back(volume_row(2, 280.36, 216.9, true));
    rep.rows.back().error = "boom";
    rep.aggregates = aggregate(rep.rows);
    rep.provenance = {{"k", 1}};
    const auto back = report_from_json(to_json(rep));
    CHECK(to_json(back) == to_json(rep));

    fixtures::TempDir tmp("report");
    emit_report(rep, ReportFormat::json, tmp / "r.json");
    CHECK(to_json(read_report(tmp / "r.json")) == to_json(rep));
    emit_report(rep, ReportFormat::csv, tmp / "r.csv");
    CHECK(csv_lines(render_csv(rep)).size() == 3);
    CHECK(format_for_path("a.csv") == ReportFormat::csv);
    CHECK(format_for_path("a.json") == ReportFormat::json);
    CHECK_THROWS_AS(format_for_path("a.txt"), InvalidInput);
    CHECK_THROWS_AS(report_from_json(nlohmann::json{{"rows", 3}}), ParseError);
}

TEST_CASE("few-shot synthetic scene hits the oracle volume")
{
    fixtures::TempDir tmp("fewshot");
    fixtures::SyntheticScene s;
    const auto scene = load_scene(fixtures::write_synthetic_scene(tmp.path(), s));
    const auto row = run_scene(scene, fast_config());
    CHECK(row.path == ScenePath::few_shot);
    CHECK(row.keyframe_count == 6);
    REQUIRE(row.predicted_volume);
    REQUIRE(row.s_fine);
    CHECK(*row.s_fine == doctest::Approx(s.scale()).epsilon(1e-12));
    const double oracle = std::pow(*row.s_fine, 3) * mesh_volume(make_icosphere(s.unitless_radius, s.icosphere_subdivisions));
    CHECK(std::abs(*row.predicted_volume - oracle) / oracle < 1e-9);
    CHECK(std::abs(*row.predicted_volume - s.oracle_volume_m3()) / s.oracle_volume_m3() < 0.01);
    CHECK(*row.ppu == doctest::Approx(0.001));
    CHECK(*row.food_w_px == 60);
    REQUIRE(row.chamfer_with);
    CHECK(*row.chamfer_with < *row.chamfer_without);
    CHECK(row.gt_volume);
}

TEST_CASE("wrong block lengths are corrected by depth")
{
    fixtures::TempDir tmp("corrected");
    fixtures::SyntheticScene s;
    s.ground_truth = false;
    const auto dir = fixtures::write_synthetic_scene(tmp.path(), s);
    std::ofstream(dir / "blocks.json") << "[" << 2.0 * s.block_length() << "]";
    const auto row = run_scene(load_scene(dir), fast_config());
    REQUIRE(row.s_fine);
    CHECK(*row.s_initial == doctest::Approx(0.5 * s.scale()));
    CHECK(*row.s_fine * *row.s_fine * *row.s_fine * *row.unitless_volume ==
          doctest::Approx(*row.potential_volume).epsilon(1e-12));
}

TEST_CASE("one-shot scene picks the closest pool candidate")
{
    fixtures::TempDir tmp("oneshot");
    fixtures::SyntheticScene s;
    s.frames = 1;
    s.ground_truth = false;
    const auto dir = fixtures::write_synthetic_scene(tmp.path(), s);
    fs::remove(dir / "blocks.json");
    const auto row = run_scene(load_scene(dir), fast_config(), {0.5 * s.scale(), s.scale(), 3.0 * s.scale()});
    CHECK(row.path == ScenePath::one_shot);
    CHECK(row.dispatch() == "one-shot");
    REQUIRE(row.s_fine);
    CHECK(*row.s_fine == s.scale());
}

TEST_CASE("scene without a food mesh awaits reconstruction")
{
    fixtures::TempDir tmp("await");
    fixtures::SyntheticScene s;
    s.frames = 2;
    const auto dir = fixtures::write_synthetic_scene(tmp.path(), s);
    fs::remove(dir / "meshes" / "food.ply");
    const auto row = run_scene(load_scene(dir), fast_config());
    CHECK(row.path == ScenePath::awaiting_reconstruction);
    CHECK_FALSE(row.predicted_volume);
    CHECK(row.potential_volume);
}

TEST_CASE("dataset run: determinism, dispatch totality, exclusion")
{
    fixtures::TempDir tmp("dataset_run");
    for (int id = 1; id <= 4; ++id) {
        fixtures::SyntheticScene s;
        s.scene_id = id;
        s.frames = id == 3 ? 1 : 3;
        s.metric_radius = 0.02 + 0.005 * id;
        s.image_side = 140;
        s.excluded = id == 4;
        s.icosphere_subdivisions = 3;
        fixtures::write_synthetic_scene(tmp.path(), s);
    }
    fs::create_directories(tmp / "scene_9" / "rgb"); // no frames: error row
    const auto manifest = scan_dataset(tmp.path());
    auto cfg = fast_config();
    const auto a = run_dataset(manifest, cfg);
    const auto b = run_dataset(manifest, cfg);
    CHECK(to_json(a).dump() == to_json(b).dump());
    CHECK(render_csv(a) == render_csv(b));

    REQUIRE(a.rows.size() == 5);
    const std::set<std::string> allowed{"few-shot", "one-shot", "awaiting-reconstruction", "excluded"};
    for (const auto& r : a.rows)
        CHECK(allowed.count(r.dispatch()) == 1);
    CHECK(a.rows[2].dispatch() == "one-shot");
    CHECK(a.rows[3].dispatch() == "excluded");
    CHECK(a.rows[4].error);
    for (std::size_t i = 1; i < a.rows.size(); ++i)
        CHECK(a.rows[i - 1].scene_id < a.rows[i].scene_id);

    const auto re = aggregate(a.rows);
    CHECK(std::abs(*re.mape - *a.aggregates.mape) < 1e-9);
    CHECK(a.aggregates.volume_scenes == 3);

    cfg.exclusions = {1};
    const auto c = run_dataset(manifest, cfg);
    CHECK(c.aggregates.volume_scenes == 2);
    CHECK(c.rows[0].dispatch() == "excluded");
}

} // TEST_SUITE
