#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "voleta/errors.hpp"
#include "voleta/pipeline.hpp"

namespace voleta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
json opt(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> get_opt(const json& j, const char* key)
{
    if (!j.contains(key) || j.at(key).is_null())
        return std::nullopt;
    return j.at(key).get<T>();
}

json to_json(const SceneRow& r)
{
    json j{{"scene_id", r.scene_id},
           {"label", r.label},
           {"difficulty", to_string(r.difficulty)},
           {"path", to_string(r.path)},
           {"dispatch", r.dispatch()},
           {"excluded", r.excluded},
           {"frame_count", r.frame_count},
           {"keyframe_count", r.keyframe_count},
           {"s_initial", opt(r.s_initial)},
           {"s_fine", opt(r.s_fine)},
           {"ppu_m_per_px", opt(r.ppu)},
           {"ref_w_px", opt(r.ref_w_px)},
           {"ref_l_px", opt(r.ref_l_px)},
           {"food_w_px", opt(r.food_w_px)},
           {"food_l_px", opt(r.food_l_px)},
           {"food_height_m", opt(r.food_height)},
           {"potential_volume_m3", opt(r.potential_volume)},
           {"unitless_volume", opt(r.unitless_volume)},
           {"predicted_volume_m3", opt(r.predicted_volume)},
           {"gt_volume_m3", opt(r.gt_volume)},
           {"chamfer_with_transform", opt(r.chamfer_with)},
           {"chamfer_without_transform", opt(r.chamfer_without)},
           {"icp_rmse", opt(r.icp_rmse)},
           {"diagnostics", r.diagnostics},
           {"error", opt(r.error)}};
    return j;
}

SceneRow row_from_json(const json& j)
{
    SceneRow r;
    r.scene_id = j.at("scene_id").get<int>();
    r.label = j.at("label").get<std::string>();
    r.difficulty = difficulty_from_string(j.at("difficulty").get<std::string>());
    r.path = scene_path_from_string(j.at("path").get<std::string>());
    r.excluded = j.at("excluded").get<bool>();
    r.frame_count = j.at("frame_count").get<std::size_t>();
    r.keyframe_count = j.at("keyframe_count").get<std::size_t>();
    r.s_initial = get_opt<double>(j, "s_initial");
    r.s_fine = get_opt<double>(j, "s_fine");
    r.ppu = get_opt<double>(j, "ppu_m_per_px");
    r.ref_w_px = get_opt<int>(j, "ref_w_px");
    r.ref_l_px = get_opt<int>(j, "ref_l_px");
    r.food_w_px = get_opt<int>(j, "food_w_px");
    r.food_l_px = get_opt<int>(j, "food_l_px");
    r.food_height = get_opt<double>(j, "food_height_m");
    r.potential_volume = get_opt<double>(j, "potential_volume_m3");
    r.unitless_volume = get_opt<double>(j, "unitless_volume");
    r.predicted_volume = get_opt<double>(j, "predicted_volume_m3");
    r.gt_volume = get_opt<double>(j, "gt_volume_m3");
    r.chamfer_with = get_opt<double>(j, "chamfer_with_transform");
    r.chamfer_without = get_opt<double>(j, "chamfer_without_transform");
    r.icp_rmse = get_opt<double>(j, "icp_rmse");
    r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    r.error = get_opt<std::string>(j, "error");
    return r;
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

template <class T, class F>
std::string cell(const std::optional<T>& v, F&& render)
{
    return v ? render(*v) : std::string{};
}

} // namespace

json to_json(const ScaleEstimate& e)
{
    auto extent = [](const MaskExtent& m) {
        return json{{"w", m.w}, {"l", m.l}, {"bbox", {m.bbox.x, m.bbox.y, m.bbox.width, m.bbox.height}}};
    };
    return json{{"s_initial", e.s_initial},
                {"s_fine", e.s_fine},
                {"l_avg", e.l_avg},
                {"ppu_m_per_px", e.ppu},
                {"potential_volume_m3", e.potential_volume},
                {"unitless_volume", e.unitless_volume},
                {"food_height_m", e.food_height},
                {"food_extent_px", extent(e.food_extent)},
                {"reference_extent_px", extent(e.reference_extent)},
                {"method", to_string(e.method)}};
}

json to_json(const EvalResult& e)
{
    json m = json::array();
    const auto h = e.transform.homogeneous();
    for (int r = 0; r < 4; ++r)
        m.push_back({h(r, 0), h(r, 1), h(r, 2), h(r, 3)});
    return json{{"chamfer_with_transform", e.chamfer_with_transform},
                {"chamfer_without_transform", e.chamfer_without_transform},
                {"chamfer_with_transform_e3", e.chamfer_with_transform * 1e3},
                {"chamfer_without_transform_e3", e.chamfer_without_transform * 1e3},
                {"transform", m},
                {"icp_rmse", e.icp_rmse},
                {"iterations", e.iterations_used}};
}

json to_json(const KeyframeSelection& sel, std::span<const Frame> frames, const KeyframeParams& params)
{
    std::map<int, std::string> status;
    for (int i : sel.kept) status[i] = "kept";
    for (int i : sel.rejected_blurry) status[i] = "blurry";
    for (int i : sel.rejected_duplicate) status[i] = "duplicate";
    auto ids = [&](const std::vector<int>& idx) {
        std::vector<std::string> out;
        for (int i : idx)
            for (const auto& f : frames)
                if (f.index == i)
                    out.push_back(f.id);
        return out;
    };
    json per_frame = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i)
        per_frame.push_back({{"id", frames[i].id},
                             {"index", frames[i].index},
                             {"hash", hash_hex(sel.features[i].hash)},
                             {"blur_score", sel.features[i].blur_score},
                             {"status", status[frames[i].index]}});
    return json{{"total", frames.size()},
                {"kept", ids(sel.kept)},
                {"rejected_blurry", ids(sel.rejected_blurry)},
                {"rejected_duplicate", ids(sel.rejected_duplicate)},
                {"retention_ratio", sel.retention_ratio},
                {"empty_selection", sel.empty_selection},
                {"params", {{"hamming_threshold", params.hamming_threshold},
                            {"blur_threshold", params.blur_threshold},
                            {"radii", params.radii}}},
                {"frames", per_frame}};
}

std::string format_fixed2(double v)
{
    // glibc printf rounds the exact binary value to nearest, ties to even.
    return fmt("%.2f", v);
}

json to_json(const VolumeReport& r)
{
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back(to_json(row));
    const auto& a = r.aggregates;
    json agg{{"volume_scenes", a.volume_scenes},
             {"mape_percent", opt(a.mape)},
             {"chamfer_scenes", a.chamfer_scenes},
             {"chamfer_with_sum", opt(a.chamfer_with_sum)},
             {"chamfer_with_mean", opt(a.chamfer_with_mean)},
             {"chamfer_without_sum", opt(a.chamfer_without_sum)},
             {"chamfer_without_mean", opt(a.chamfer_without_mean)}};
    return json{{"rows", rows}, {"aggregates", agg}, {"diagnostics", r.diagnostics}, {"provenance", r.provenance}};
}

VolumeReport report_from_json(const json& j)
{
    VolumeReport r;
    try {
        for (const auto& row : j.at("rows"))
            r.rows.push_back(row_from_json(row));
        const auto& a = j.at("aggregates");
        r.aggregates.volume_scenes = a.at("volume_scenes").get<std::size_t>();
        r.aggregates.mape = get_opt<double>(a, "mape_percent");
        r.aggregates.chamfer_scenes = a.at("chamfer_scenes").get<std::size_t>();
        r.aggregates.chamfer_with_sum = get_opt<double>(a, "chamfer_with_sum");
        r.aggregates.chamfer_with_mean = get_opt<double>(a, "chamfer_with_mean");
        r.aggregates.chamfer_without_sum = get_opt<double>(a, "chamfer_without_sum");
        r.aggregates.chamfer_without_mean = get_opt<double>(a, "chamfer_without_mean");
        r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
        r.provenance = j.at("provenance");
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return r;
}

std::string render_csv(const VolumeReport& r)
{
    std::ostringstream out;
    out << "scene_id,label,difficulty,dispatch,excluded,s_fine,ppu_cm,ref_w_px,ref_l_px,food_w_px,food_l_px,f_h_cm,"
           "potential_volume_cm3,predicted_volume_cm3,gt_volume_cm3,chamfer_with_e3,chamfer_without_e3\n";
    auto vol = [](double m3) { return format_fixed2(m3 * kCubicMetersToCm3); };
    auto ch = [](double d) { return format_fixed2(d * 1e3); };
    auto integer = [](int v) { return std::to_string(v); };
    for (const auto& row : r.rows) {
        out << row.scene_id << ',' << csv_field(row.label) << ',' << to_string(row.difficulty) << ',' << row.dispatch() << ','
            << (row.excluded ? "true" : "false") << ',' << cell(row.s_fine, [](double v) { return fmt("%.10g", v); }) << ','
            << cell(row.ppu, [](double v) { return fmt("%.5f", v * kMetersToCm); }) << ',' << cell(row.ref_w_px, integer)
            << ',' << cell(row.ref_l_px, integer) << ',' << cell(row.food_w_px, integer) << ','
            << cell(row.food_l_px, integer) << ','
            << cell(row.food_height, [](double v) { return fmt("%.3f", v * kMetersToCm); }) << ','
            << cell(row.potential_volume, vol) << ',' << cell(row.predicted_volume, vol) << ',' << cell(row.gt_volume, vol)
            << ',' << cell(row.chamfer_with, ch) << ',' << cell(row.chamfer_without, ch) << '\n';
    }
    return out.str();
}

ReportFormat format_for_path(const fs::path& path)
{
    const auto ext = path.extension().string();
    if (ext == ".csv")
        return ReportFormat::csv;
    if (ext == ".json")
        return ReportFormat::json;
    throw InvalidInput("report path must end in .csv or .json: '" + path.string() + "'");
}

void emit_report(const VolumeReport& r, ReportFormat format, const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    if (format == ReportFormat::csv)
        out << render_csv(r);
    else
        out << to_json(r).dump(2) << '\n';
    out.flush();
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

VolumeReport read_report(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open report '" + path.string() + "'");
    try {
        return report_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

} // namespace voleta
