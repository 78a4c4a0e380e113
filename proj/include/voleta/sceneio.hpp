#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "voleta/image.hpp"

namespace voleta {

enum class Difficulty { easy, medium, hard };

std::string to_string(Difficulty d);
Difficulty difficulty_from_string(const std::string& s);
/// >= 100 frames easy, 2..99 medium, 1 hard.
Difficulty difficulty_for_frame_count(std::size_t frames);

/// Sub-directory names inside a scene directory.
struct SceneLayout {
    std::string rgb = "rgb";
    std::string depth = "depth";
    std::string food_mask = "mask_food";
    std::string reference_mask = "mask_ref";
    std::string meshes = "meshes";
    std::string metadata = "metadata.json";
    std::string blocks = "blocks.json";
};

struct IngestConfig {
    double depth_scale = 0.001; ///< meters per raw 16-bit unit
    SceneLayout layout;
};

/// Contents of `<scene>/metadata.json`.
struct SceneMetadata {
    std::string label;
    double reference_real_w_m = 0.0;
    double reference_real_l_m = 0.0;
    double block_edge_m = 0.012;
    bool excluded = false;
    std::optional<int> overhead_index;
    std::optional<int> scene_id;
    std::optional<Difficulty> difficulty;
    std::optional<double> gt_volume_cm3;
};

struct SceneMeshes {
    std::optional<std::filesystem::path> food;
    std::optional<std::filesystem::path> reference;
    std::optional<std::filesystem::path> ground_truth;
};

/// A fully ingested scene. Every depth map / mask present matches its frame's size.
struct SceneRecord {
    int scene_id = 0;
    std::string label;
    Difficulty difficulty = Difficulty::easy;
    std::filesystem::path dir;
    FrameSet frames;
    std::vector<std::optional<DepthMap>> depth_maps;
    std::vector<std::optional<BinaryMask>> food_masks;
    std::vector<std::optional<BinaryMask>> reference_masks;
    int overhead_index = 0;
    SceneMeshes meshes;
    SceneMetadata metadata;
    std::vector<double> block_lengths; ///< measured reference-block edge lengths, mesh units

    bool one_shot() const { return frames.size() == 1; }
};

/// Per-scene line of the dataset manifest.
struct SceneSummary {
    int scene_id = 0;
    std::string label;
    Difficulty difficulty = Difficulty::easy;
    std::string path; ///< relative to the manifest root
    std::size_t frame_count = 0;
    std::size_t depth_count = 0;
    std::size_t food_mask_count = 0;
    std::size_t reference_mask_count = 0;
    bool has_food_mesh = false;
    bool has_reference_mesh = false;
    bool has_gt_mesh = false;
    bool has_blocks = false;
    bool excluded = false;
    std::optional<int> overhead_index;

    friend bool operator==(const SceneSummary&, const SceneSummary&) = default;
};

struct DatasetManifest {
    std::filesystem::path root;
    std::vector<SceneSummary> scenes;
};

Frame load_frame(const std::filesystem::path& path, int index);
DepthMap load_depth(const std::filesystem::path& path, double depth_scale = 0.001);
BinaryMask load_mask(const std::filesystem::path& path, MaskKind kind = MaskKind::food);
RgbaImage apply_mask_rgba(const Frame& frame, const BinaryMask& mask);

void save_depth_png(const DepthMap& depth, const std::filesystem::path& path, double depth_scale = 0.001);
void save_mask_png(const BinaryMask& mask, const std::filesystem::path& path);
void save_frame_png(const Frame& frame, const std::filesystem::path& path);

/// Image files in `dir` (png/jpg/jpeg), natural-sorted by stem.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);
bool natural_less(const std::string& a, const std::string& b);

SceneMetadata read_metadata(const std::filesystem::path& path);
void write_metadata(const SceneMetadata& meta, const std::filesystem::path& path);
/// Accepts `[l, ...]` or `{"block_lengths": [l, ...]}`.
std::vector<double> read_block_lengths(const std::filesystem::path& path);

SceneRecord load_scene(const std::filesystem::path& dir, const IngestConfig& config = {});

/// Summary from the directory listing alone (no image decoding).
SceneSummary scan_scene(const std::filesystem::path& dir, const std::filesystem::path& root, const IngestConfig& config = {});
DatasetManifest scan_dataset(const std::filesystem::path& root, const IngestConfig& config = {});

nlohmann::json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

} // namespace voleta
