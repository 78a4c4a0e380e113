#include "voleta/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "voleta/errors.hpp"
#include "voleta/mesh.hpp"

namespace voleta {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const
{
    if (hamming_threshold < 0 || hamming_threshold > 64)
        throw_invalid("config: hamming_threshold must lie in [0,64]");
    if (blur_radii.empty())
        throw_invalid("config: blur_radii must not be empty");
    for (int r : blur_radii)
        if (r < 0 || r > 30 || r % 2 != 0)
            throw_invalid("config: blur radii must be even integers in [0,30]");
    if (!(diameter_fraction >= 0.0 && diameter_fraction <= 1.0))
        throw_invalid("config: diameter_fraction must lie in [0,1]");
    if (!(fine_tune_tolerance > 0.0 && fine_tune_tolerance <= 1.0))
        throw_invalid("config: fine_tune_tolerance must lie in (0,1]");
    if (samples == 0)
        throw_invalid("config: samples must be positive");
    if (!(depth_scale > 0.0))
        throw_invalid("config: depth_scale must be positive");
    for (double c : one_shot_candidates)
        if (!(c > 0.0))
            throw_invalid("config: one_shot_candidates must be positive");
}

json to_json(const PipelineConfig& c)
{
    return json{{"hamming_threshold", c.hamming_threshold},
                {"blur_radii", c.blur_radii},
                {"blur_threshold", c.blur_threshold},
                {"diameter_fraction", c.diameter_fraction},
                {"fine_tune_tolerance", c.fine_tune_tolerance},
                {"samples", c.samples},
                {"seed", c.seed},
                {"icp",
                 {{"max_iterations", c.icp.max_iterations},
                  {"convergence_eps", c.icp.convergence_eps},
                  {"trim_fraction", c.icp.trim_fraction},
                  {"centroid_prealign", c.icp.centroid_prealign}}},
                {"depth_scale", c.depth_scale},
                {"exclusions", c.exclusions},
                {"one_shot_candidates", c.one_shot_candidates},
                {"reconstruction_provenance", c.reconstruction_provenance}};
}

PipelineConfig config_from_json(const json& j)
{
    PipelineConfig c;
    try {
        c.hamming_threshold = j.value("hamming_threshold", c.hamming_threshold);
        if (j.contains("blur_radii")) {
            const auto& r = j["blur_radii"];
            c.blur_radii = r.is_string() ? parse_radii(r.get<std::string>()) : r.get<std::vector<int>>();
        }
        c.blur_threshold = j.value("blur_threshold", c.blur_threshold);
        c.diameter_fraction = j.value("diameter_fraction", c.diameter_fraction);
        c.fine_tune_tolerance = j.value("fine_tune_tolerance", c.fine_tune_tolerance);
        c.samples = j.value("samples", c.samples);
        c.seed = j.value("seed", c.seed);
        if (j.contains("icp")) {
            const auto& i = j["icp"];
            c.icp.max_iterations = i.value("max_iterations", c.icp.max_iterations);
            c.icp.convergence_eps = i.value("convergence_eps", c.icp.convergence_eps);
            c.icp.trim_fraction = i.value("trim_fraction", c.icp.trim_fraction);
            c.icp.centroid_prealign = i.value("centroid_prealign", c.icp.centroid_prealign);
        }
        c.depth_scale = j.value("depth_scale", c.depth_scale);
        c.exclusions = j.value("exclusions", c.exclusions);
        c.one_shot_candidates = j.value("one_shot_candidates", c.one_shot_candidates);
        if (j.contains("reconstruction_provenance"))
            c.reconstruction_provenance = j["reconstruction_provenance"];
    } catch (const json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

PipelineConfig read_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path.string() + "'");
    try {
        return config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

std::string to_string(ScenePath p)
{
    switch (p) {
    case ScenePath::few_shot: return "few-shot";
    case ScenePath::one_shot: return "one-shot";
    case ScenePath::awaiting_reconstruction: return "awaiting-reconstruction";
    }
    return "few-shot";
}

ScenePath scene_path_from_string(const std::string& s)
{
    if (s == "few-shot") return ScenePath::few_shot;
    if (s == "one-shot") return ScenePath::one_shot;
    if (s == "awaiting-reconstruction") return ScenePath::awaiting_reconstruction;
    throw ParseError("unknown scene path '" + s + "'");
}

namespace {

bool is_excluded(const SceneRecord& scene, const PipelineConfig& config)
{
    return scene.metadata.excluded ||
           std::find(config.exclusions.begin(), config.exclusions.end(), scene.scene_id) != config.exclusions.end();
}

std::optional<DepthValidation> overhead_validation(const SceneRecord& scene, SceneRow& row)
{
    const auto oh = static_cast<std::size_t>(scene.overhead_index);
    if (oh >= scene.frames.size())
        return std::nullopt;
    const auto& depth = scene.depth_maps[oh];
    const auto& food = scene.food_masks[oh];
    const auto& ref = scene.reference_masks[oh];
    if (!depth || !food || !ref) {
        row.diagnostics.push_back("depth validation skipped: overhead frame lacks depth or masks");
        return std::nullopt;
    }
    if (!(scene.metadata.reference_real_w_m > 0.0 && scene.metadata.reference_real_l_m > 0.0)) {
        row.diagnostics.push_back("depth validation skipped: reference real dimensions missing from metadata");
        return std::nullopt;
    }
    OverheadView view{&*depth, &*food, &*ref, scene.metadata.reference_real_w_m, scene.metadata.reference_real_l_m};
    try {
        return validate_with_depth(view);
    } catch (const InvalidInput& e) {
        row.diagnostics.push_back(std::string("depth validation failed: ") + e.what());
        return std::nullopt;
    }
}

SceneRow run_with_selection(const SceneRecord& scene, const KeyframeSelection& sel, const PipelineConfig& config,
                            const std::vector<double>& pool)
{
    SceneRow row;
    row.scene_id = scene.scene_id;
    row.label = scene.label;
    row.difficulty = scene.difficulty;
    row.excluded = is_excluded(scene, config);
    row.frame_count = scene.frames.size();
    row.keyframe_count = sel.kept.size();
    if (sel.empty_selection)
        row.diagnostics.push_back("no frame passed the blur gate");

    const auto dv = overhead_validation(scene, row);
    if (dv) {
        row.ppu = dv->ppu;
        row.ref_w_px = dv->reference_extent.w;
        row.ref_l_px = dv->reference_extent.l;
        row.food_w_px = dv->food_extent.w;
        row.food_l_px = dv->food_extent.l;
        row.food_height = dv->food_height;
        row.potential_volume = dv->potential_volume;
    }
    const bool have_potential = row.potential_volume && *row.potential_volume > 0.0;

    if (scene.metadata.gt_volume_cm3)
        row.gt_volume = *scene.metadata.gt_volume_cm3 / kCubicMetersToCm3;

    if (!scene.meshes.food) {
        row.path = ScenePath::awaiting_reconstruction;
        return row;
    }

    const TriangleMesh cleaned = remove_isolated_pieces(load_mesh(*scene.meshes.food), config.diameter_fraction);
    if (cleaned.empty()) {
        row.path = sel.kept.size() == 1 ? ScenePath::one_shot : ScenePath::few_shot;
        row.diagnostics.push_back("food mesh is empty after cleanup");
        return row;
    }
    if (const auto open_edges = boundary_edge_count(cleaned); open_edges > 0)
        row.diagnostics.push_back("food mesh is not watertight: " + std::to_string(open_edges) + " boundary edges");
    const double unitless = mesh_volume(cleaned);
    row.unitless_volume = unitless;

    std::optional<double> block_scale;
    if (!scene.block_lengths.empty())
        block_scale = scale_from_reference_blocks(scene.block_lengths, scene.metadata.block_edge_m);
    row.s_initial = block_scale;

    if (sel.kept.size() == 1) {
        row.path = ScenePath::one_shot;
        std::vector<double> candidates = pool;
        candidates.insert(candidates.end(), config.one_shot_candidates.begin(), config.one_shot_candidates.end());
        if (block_scale)
            candidates.push_back(*block_scale);
        if (candidates.empty()) {
            row.diagnostics.push_back("one-shot path: no scale candidates available");
        } else if (have_potential && unitless > 0.0) {
            row.s_fine = select_scale_one_shot(candidates, unitless, *row.potential_volume);
        } else if (candidates.size() == 1) {
            row.s_fine = candidates.front();
        } else {
            row.diagnostics.push_back("one-shot path: no potential volume to choose among " +
                                      std::to_string(candidates.size()) + " candidates");
        }
    } else {
        row.path = ScenePath::few_shot;
        if (block_scale && have_potential && unitless > 0.0) {
            row.s_fine = fine_tune_scale(*block_scale, unitless, *row.potential_volume, config.fine_tune_tolerance);
        } else if (block_scale) {
            row.s_fine = block_scale;
        } else if (have_potential && unitless > 0.0) {
            row.s_fine = std::cbrt(*row.potential_volume / unitless);
            row.diagnostics.push_back("no block lengths: scale taken from the depth-derived potential volume");
        } else {
            row.diagnostics.push_back("few-shot path: neither block lengths nor depth validation available");
        }
    }

    if (!row.s_fine)
        return row;
    const TriangleMesh scaled = scale_mesh(cleaned, *row.s_fine, LengthUnit::meters);
    row.predicted_volume = mesh_volume(scaled);

    if (scene.meshes.ground_truth) {
        const TriangleMesh gt = load_mesh(*scene.meshes.ground_truth);
        row.gt_volume = mesh_volume(gt);
        EvalParams ep;
        ep.samples = config.samples;
        ep.seed = config.seed;
        ep.icp = config.icp;
        try {
            const auto ev = evaluate_pair(scaled, gt, ep);
            row.chamfer_with = ev.chamfer_with_transform;
            row.chamfer_without = ev.chamfer_without_transform;
            row.icp_rmse = ev.icp_rmse;
        } catch (const Error& e) {
            row.diagnostics.push_back(std::string("shape evaluation failed: ") + e.what());
        }
    }
    return row;
}

KeyframeSelection select_for(const SceneRecord& scene, const PipelineConfig& config)
{
    KeyframeParams kp;
    kp.hamming_threshold = config.hamming_threshold;
    kp.blur_threshold = config.blur_threshold;
    kp.radii = config.blur_radii;
    return select_keyframes(scene.frames, kp);
}

SceneRow error_row(const SceneSummary& s, const PipelineConfig& config, const std::string& what)
{
    SceneRow row;
    row.scene_id = s.scene_id;
    row.label = s.label;
    row.difficulty = s.difficulty;
    row.excluded = s.excluded ||
                   std::find(config.exclusions.begin(), config.exclusions.end(), s.scene_id) != config.exclusions.end();
    row.frame_count = s.frame_count;
    row.path = ScenePath::awaiting_reconstruction;
    row.error = what;
    return row;
}

} // namespace

SceneRow run_scene(const SceneRecord& scene, const PipelineConfig& config, const std::vector<double>& one_shot_pool)
{
    config.validate();
    return run_with_selection(scene, select_for(scene, config), config, one_shot_pool);
}

Aggregates aggregate(const std::vector<SceneRow>& rows)
{
    Aggregates a;
    std::vector<double> truth, pred;
    double with_sum = 0.0, without_sum = 0.0;
    for (const auto& r : rows) {
        if (r.excluded)
            continue;
        if (r.gt_volume && r.predicted_volume && *r.gt_volume > 0.0) {
            truth.push_back(*r.gt_volume);
            pred.push_back(*r.predicted_volume);
        }
        if (r.chamfer_with && r.chamfer_without) {
            with_sum += *r.chamfer_with;
            without_sum += *r.chamfer_without;
            ++a.chamfer_scenes;
        }
    }
    a.volume_scenes = truth.size();
    if (!truth.empty())
        a.mape = mape(truth, pred);
    if (a.chamfer_scenes > 0) {
        const auto n = static_cast<double>(a.chamfer_scenes);
        a.chamfer_with_sum = with_sum;
        a.chamfer_with_mean = with_sum / n;
        a.chamfer_without_sum = without_sum;
        a.chamfer_without_mean = without_sum / n;
    }
    return a;
}

VolumeReport run_dataset(const DatasetManifest& manifest, const PipelineConfig& config, const IngestConfig& ingest)
{
    config.validate();
    IngestConfig ing = ingest;
    ing.depth_scale = config.depth_scale;

    VolumeReport report;
    report.provenance = json{{"config", to_json(config)}};

    std::vector<SceneRow> rows;
    std::vector<const SceneSummary*> deferred;
    std::vector<double> pool;

    // Few-shot scenes first: their scale factors form the one-shot candidate pool.
    for (const auto& s : manifest.scenes) {
        try {
            const SceneRecord scene = load_scene(manifest.root / s.path, ing);
            const auto sel = select_for(scene, config);
            if (sel.kept.size() == 1 && scene.meshes.food) {
                deferred.push_back(&s);
                continue;
            }
            auto row = run_with_selection(scene, sel, config, {});
            if (row.path == ScenePath::few_shot && row.s_fine)
                pool.push_back(*row.s_fine);
            rows.push_back(std::move(row));
        } catch (const Error& e) {
            rows.push_back(error_row(s, config, e.what()));
        }
    }
    for (const auto* s : deferred) {
        try {
            const SceneRecord scene = load_scene(manifest.root / s->path, ing);
            rows.push_back(run_with_selection(scene, select_for(scene, config), config, pool));
        } catch (const Error& e) {
            rows.push_back(error_row(*s, config, e.what()));
        }
    }

    std::stable_sort(rows.begin(), rows.end(), [](const SceneRow& a, const SceneRow& b) { return a.scene_id < b.scene_id; });
    report.rows = std::move(rows);
    report.aggregates = aggregate(report.rows);
    if (report.aggregates.volume_scenes == 0)
        report.diagnostics.push_back("no evaluable scenes: aggregates are empty");
    return report;
}

} // namespace voleta
