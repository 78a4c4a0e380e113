// voleta: food-volume toolkit command line.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "voleta/errors.hpp"
#include "voleta/evalreg.hpp"
#include "voleta/frames.hpp"
#include "voleta/mesh.hpp"
#include "voleta/metrology.hpp"
#include "voleta/pipeline.hpp"
#include "voleta/sceneio.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace voleta;

namespace {

void write_json_out(const json& j, const std::string& path)
{
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

int cmd_keyframes(const std::string& input, int hamming, double blur_threshold, const std::string& radii,
                  const std::string& out)
{
    FrameSet frames;
    int i = 0;
    for (const auto& p : list_images(input))
        frames.push_back(load_frame(p, i++));
    if (frames.empty())
        throw EmptySceneError("no PNG/JPEG frames in '" + input + "'");
    KeyframeParams params;
    params.hamming_threshold = hamming;
    params.blur_threshold = blur_threshold;
    params.radii = parse_radii(radii);
    const auto sel = select_keyframes(frames, params);
    write_json_out(to_json(sel, frames, params), out);
    std::cerr << "kept " << sel.kept.size() << " of " << frames.size() << " frames\n";
    return sel.empty_selection ? 2 : 0;
}

int cmd_clean(const std::string& in, const std::string& out, double frac, bool weld)
{
    TriangleMesh mesh = load_mesh(in);
    if (weld)
        mesh = weld_vertices(mesh);
    const auto before = connected_components(mesh).size();
    const TriangleMesh cleaned = remove_isolated_pieces(mesh, frac);
    const auto after = cleaned.empty() ? 0 : connected_components(cleaned).size();
    save_mesh(cleaned, out);
    std::cout << "components " << before << " -> " << after << ", triangles " << mesh.triangles.size() << " -> "
              << cleaned.triangles.size() << '\n';
    return 0;
}

int cmd_volume(const std::string& in, std::optional<double> scale)
{
    TriangleMesh mesh = load_mesh(in);
    if (const auto open_edges = boundary_edge_count(mesh); open_edges > 0)
        std::cerr << "warning: mesh is not watertight (" << open_edges << " boundary edges)\n";
    if (scale)
        mesh = scale_mesh(mesh, *scale, LengthUnit::meters);
    else if (mesh.unit == LengthUnit::unitless)
        std::cerr << "note: no --scale given; coordinates are taken as meters\n";
    std::cout << format_fixed2(mesh_volume(mesh) * kCubicMetersToCm3) << '\n';
    return 0;
}

int cmd_scale(const std::string& scene_dir, const std::string& blocks_path, const std::string& mesh_path, double tolerance,
              double frac, double depth_scale, const std::string& out)
{
    IngestConfig ing;
    ing.depth_scale = depth_scale;
    const SceneRecord scene = load_scene(scene_dir, ing);
    const auto blocks = !blocks_path.empty() ? read_block_lengths(blocks_path) : scene.block_lengths;
    const fs::path mesh_file = !mesh_path.empty() ? fs::path(mesh_path) : scene.meshes.food.value_or(fs::path{});
    if (mesh_file.empty())
        throw InvalidInput("no food mesh given and none found in the scene");
    const double unitless = mesh_volume(remove_isolated_pieces(load_mesh(mesh_file), frac));

    const auto oh = static_cast<std::size_t>(scene.overhead_index);
    std::optional<OverheadView> view;
    if (scene.depth_maps[oh] && scene.food_masks[oh] && scene.reference_masks[oh])
        view = OverheadView{&*scene.depth_maps[oh], &*scene.food_masks[oh], &*scene.reference_masks[oh],
                            scene.metadata.reference_real_w_m, scene.metadata.reference_real_l_m};
    else
        std::cerr << "note: overhead frame lacks depth or masks; depth validation skipped\n";
    const auto est = estimate_scale(blocks, scene.metadata.block_edge_m, unitless, view ? &*view : nullptr, tolerance);
    json j = to_json(est);
    j["scene_id"] = scene.scene_id;
    j["overhead_index"] = scene.overhead_index;
    write_json_out(j, out);
    return 0;
}

int cmd_evaluate(const std::string& ours, const std::string& gt, std::size_t samples, std::uint64_t seed, int max_iter,
                 double eps, const std::string& out)
{
    EvalParams p;
    p.samples = samples;
    p.seed = seed;
    p.icp.max_iterations = max_iter;
    p.icp.convergence_eps = eps;
    const auto r = evaluate_pair(load_mesh(ours), load_mesh(gt), p);
    write_json_out(to_json(r), out);
    return 0;
}

void print_aggregates(const VolumeReport& r)
{
    const auto& a = r.aggregates;
    if (a.mape)
        std::cerr << "MAPE " << *a.mape << "% over " << a.volume_scenes << " scenes\n";
    if (a.chamfer_with_sum)
        std::cerr << "Chamfer w/ t.m sum " << *a.chamfer_with_sum << " mean " << *a.chamfer_with_mean << "; w/o t.m sum "
                  << *a.chamfer_without_sum << " mean " << *a.chamfer_without_mean << '\n';
    for (const auto& d : r.diagnostics)
        std::cerr << "note: " << d << '\n';
}

int cmd_report(const std::string& in, const std::string& format, const std::string& out)
{
    const auto report = read_report(in);
    const ReportFormat f = format.empty() ? format_for_path(out) : (format == "csv" ? ReportFormat::csv : ReportFormat::json);
    emit_report(report, f, out);
    print_aggregates(report);
    return 0;
}

int cmd_manifest(const std::string& root, const std::string& out)
{
    const auto m = scan_dataset(root);
    write_manifest(m, out.empty() ? fs::path(root) / "manifest.json" : fs::path(out));
    return 0;
}

int cmd_run(const std::string& root, const std::string& config_path, const std::string& out)
{
    const PipelineConfig config = config_path.empty() ? PipelineConfig{} : read_config(config_path);
    IngestConfig ing;
    ing.depth_scale = config.depth_scale;
    const auto manifest = scan_dataset(root, ing);
    const auto report = run_dataset(manifest, config, ing);
    emit_report(report, format_for_path(out), out);
    print_aggregates(report);
    int status = 0;
    for (const auto& row : report.rows)
        if (row.error && !row.excluded) {
            std::cerr << "scene " << row.scene_id << " failed: " << *row.error << '\n';
            status = 1;
        }
    return status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Food volume estimation toolkit: keyframes, mesh cleanup, metric scale, evaluation"};
    app.require_subcommand(1);

    std::string input, output, in_mesh, out_mesh, ours, gt, scene, blocks, mesh, config, format, dataset;
    int hamming = 12, max_iter = 50;
    double blur_threshold = 0.0, frac = 0.05, tolerance = kDefaultFineTuneTolerance, eps = 1e-6, depth_scale = 0.001;
    std::string radii = "0:30:2";
    bool weld = false;
    std::optional<double> scale;
    std::size_t samples = 100000;
    std::uint64_t seed = 42;

    auto* kf = app.add_subcommand("keyframes", "Select keyframes from a directory of frames");
    kf->add_option("--input", input, "Directory of PNG/JPEG frames")->required();
    kf->add_option("--hamming", hamming, "Duplicate threshold on the 64-bit hash")->check(CLI::Range(0, 64));
    kf->add_option("--blur-threshold", blur_threshold, "Minimum sharpness score");
    kf->add_option("--radii", radii, "Gaussian radii as lo:hi:step or a comma list");
    kf->add_option("--out", output, "Selection JSON (stdout if omitted)");

    auto* cm = app.add_subcommand("clean-mesh", "Remove isolated pieces from a mesh");
    cm->add_option("--in", in_mesh)->required();
    cm->add_option("--out", out_mesh)->required();
    cm->add_option("--diameter-frac", frac, "Fraction of the mesh AABB diagonal")->check(CLI::Range(0.0, 1.0));
    cm->add_flag("--weld", weld, "Merge coincident vertices before cleanup");

    auto* vol = app.add_subcommand("volume", "Print mesh volume in cm^3");
    vol->add_option("--in", in_mesh)->required();
    vol->add_option("--scale", scale, "Metric scale factor applied first");

    auto* sc = app.add_subcommand("scale", "Estimate the metric scale factor for a scene");
    sc->add_option("--scene", scene)->required();
    sc->add_option("--blocks", blocks, "Measured block lengths JSON (defaults to <scene>/blocks.json)");
    sc->add_option("--mesh", mesh, "Unitless food mesh (defaults to <scene>/meshes/food.*)");
    sc->add_option("--tolerance", tolerance)->check(CLI::Range(0.0, 1.0));
    sc->add_option("--diameter-frac", frac)->check(CLI::Range(0.0, 1.0));
    sc->add_option("--depth-scale", depth_scale, "Meters per raw depth unit");
    sc->add_option("--out", output);

    auto* ev = app.add_subcommand("evaluate", "Chamfer distance with and without ICP registration");
    ev->add_option("--ours", ours)->required();
    ev->add_option("--gt", gt)->required();
    ev->add_option("--samples", samples);
    ev->add_option("--seed", seed);
    ev->add_option("--max-iterations", max_iter);
    ev->add_option("--eps", eps, "ICP convergence threshold on rmse change");
    ev->add_option("--out", output);

    auto* rep = app.add_subcommand("report", "Re-render a JSON report");
    rep->add_option("--in", input)->required();
    rep->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));
    rep->add_option("--out", output)->required();

    auto* man = app.add_subcommand("manifest", "Scan a dataset root and write manifest.json");
    man->add_option("--dataset", dataset)->required();
    man->add_option("--out", output);

    auto* run = app.add_subcommand("run", "Run the full pipeline over a dataset");
    run->add_option("--dataset", dataset)->required();
    run->add_option("--config", config);
    run->add_option("--out", output)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*kf) return cmd_keyframes(input, hamming, blur_threshold, radii, output);
        if (*cm) return cmd_clean(in_mesh, out_mesh, frac, weld);
        if (*vol) return cmd_volume(in_mesh, scale);
        if (*sc) return cmd_scale(scene, blocks, mesh, tolerance, frac, depth_scale, output);
        if (*ev) return cmd_evaluate(ours, gt, samples, seed, max_iter, eps, output);
        if (*rep) return cmd_report(input, format, output);
        if (*man) return cmd_manifest(dataset, output);
        if (*run) return cmd_run(dataset, config, output);
    } catch (const voleta::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
