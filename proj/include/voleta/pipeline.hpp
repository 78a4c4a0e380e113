#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voleta/evalreg.hpp"
#include "voleta/frames.hpp"
#include "voleta/metrology.hpp"
#include "voleta/sceneio.hpp"

namespace voleta {

struct PipelineConfig {
    int hamming_threshold = 12;
    std::vector<int> blur_radii = radius_range(0, 30, 2);
    double blur_threshold = 0.0;
    double diameter_fraction = 0.05;
    double fine_tune_tolerance = kDefaultFineTuneTolerance;
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    IcpParams icp;
    double depth_scale = 0.001;
    std::vector<int> exclusions;             ///< scene ids excluded from aggregates
    std::vector<double> one_shot_candidates; ///< extra scale candidates for one-shot scenes
    nlohmann::json reconstruction_provenance = nlohmann::json::object();

    /// Throws InvalidInput when a field is outside its documented range.
    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& c);
PipelineConfig config_from_json(const nlohmann::json& j);
PipelineConfig read_config(const std::filesystem::path& path);

enum class ScenePath { few_shot, one_shot, awaiting_reconstruction };
std::string to_string(ScenePath p);
ScenePath scene_path_from_string(const std::string& s);

/// One report line. Metric quantities are SI (m, m^3, m/px); rendering converts.
struct SceneRow {
    int scene_id = 0;
    std::string label;
    Difficulty difficulty = Difficulty::easy;
    ScenePath path = ScenePath::few_shot;
    bool excluded = false;
    std::size_t frame_count = 0;
    std::size_t keyframe_count = 0;

    std::optional<double> s_initial;
    std::optional<double> s_fine;
    std::optional<double> ppu;
    std::optional<int> ref_w_px, ref_l_px;
    std::optional<int> food_w_px, food_l_px;
    std::optional<double> food_height;
    std::optional<double> potential_volume;
    std::optional<double> unitless_volume;
    std::optional<double> predicted_volume;
    std::optional<double> gt_volume;
    std::optional<double> chamfer_with;
    std::optional<double> chamfer_without;
    std::optional<double> icp_rmse;
    std::vector<std::string> diagnostics;
    std::optional<std::string> error; ///< set when the scene could not be processed at all

    /// Dispatch category: excluded wins, otherwise the path taken.
    std::string dispatch() const { return excluded ? "excluded" : to_string(path); }
};

struct Aggregates {
    std::size_t volume_scenes = 0;
    std::optional<double> mape;
    std::size_t chamfer_scenes = 0;
    std::optional<double> chamfer_with_sum, chamfer_with_mean;
    std::optional<double> chamfer_without_sum, chamfer_without_mean;
};

struct VolumeReport {
    std::vector<SceneRow> rows; ///< ordered by scene_id
    Aggregates aggregates;
    std::vector<std::string> diagnostics;
    nlohmann::json provenance = nlohmann::json::object();
};

/// Runs one scene. `one_shot_pool` holds the scale factors available to the one-shot path.
SceneRow run_scene(const SceneRecord& scene, const PipelineConfig& config, const std::vector<double>& one_shot_pool = {});

/// MAPE over included rows with both volumes; Chamfer sum/mean over included rows with both values.
Aggregates aggregate(const std::vector<SceneRow>& rows);

/// Loads every scene of the manifest, runs few-shot scenes first so their s_fine values
/// seed the one-shot candidate pool, then assembles rows by scene_id.
VolumeReport run_dataset(const DatasetManifest& manifest, const PipelineConfig& config,
                         const IngestConfig& ingest = {});

enum class ReportFormat { csv, json };

nlohmann::json to_json(const VolumeReport& r);
VolumeReport report_from_json(const nlohmann::json& j);
std::string render_csv(const VolumeReport& r);
void emit_report(const VolumeReport& r, ReportFormat format, const std::filesystem::path& path);
VolumeReport read_report(const std::filesystem::path& path);
ReportFormat format_for_path(const std::filesystem::path& path);

nlohmann::json to_json(const ScaleEstimate& e);
nlohmann::json to_json(const EvalResult& e);
nlohmann::json to_json(const KeyframeSelection& sel, std::span<const Frame> frames, const KeyframeParams& params);

/// Fixed two-decimal rendering (round-half-even on the binary value).
std::string format_fixed2(double v);

inline constexpr double kCubicMetersToCm3 = 1e6;
inline constexpr double kMetersToCm = 100.0;

} // namespace voleta
