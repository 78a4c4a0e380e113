#include "voleta/sceneio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "voleta/errors.hpp"

namespace voleta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_image(const fs::path& p)
{
    const auto ext = lower(p.extension().string());
    return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

std::string dims(int w, int h)
{
    return std::to_string(w) + "x" + std::to_string(h);
}

json read_json(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_json(const json& j, const fs::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

std::optional<fs::path> find_by_stem(const fs::path& dir, const std::string& stem)
{
    if (!fs::is_directory(dir))
        return std::nullopt;
    for (const char* ext : {".png", ".PNG", ".jpg", ".jpeg"}) {
        fs::path p = dir / (stem + ext);
        if (fs::exists(p))
            return p;
    }
    return std::nullopt;
}

std::optional<fs::path> find_mesh(const fs::path& dir, const std::string& stem)
{
    for (const char* ext : {".ply", ".obj"}) {
        fs::path p = dir / (stem + ext);
        if (fs::exists(p))
            return p;
    }
    return std::nullopt;
}

std::optional<int> leading_integer(const std::string& name)
{
    std::size_t i = 0;
    while (i < name.size() && !std::isdigit(static_cast<unsigned char>(name[i])))
        ++i;
    std::size_t j = i;
    while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j])))
        ++j;
    if (i == j || j - i > 9)
        return std::nullopt;
    return std::stoi(name.substr(i, j - i));
}

std::size_t count_images(const fs::path& dir)
{
    return fs::is_directory(dir) ? list_images(dir).size() : 0;
}

int default_overhead(const std::vector<std::optional<BinaryMask>>& refs)
{
    // Most fronto-parallel view: the largest reference bounding box.
    long best_area = -1;
    int best = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        if (!refs[i])
            continue;
        const auto& m = *refs[i];
        int x0 = m.width, y0 = m.height, x1 = -1, y1 = -1;
        for (int y = 0; y < m.height; ++y)
            for (int x = 0; x < m.width; ++x)
                if (m.test(x, y)) {
                    x0 = std::min(x0, x);
                    x1 = std::max(x1, x);
                    y0 = std::min(y0, y);
                    y1 = std::max(y1, y);
                }
        const long area = x1 < 0 ? 0 : static_cast<long>(x1 - x0 + 1) * (y1 - y0 + 1);
        if (area > best_area) {
            best_area = area;
            best = static_cast<int>(i);
        }
    }
    return best;
}

} // namespace

std::string to_string(Difficulty d)
{
    switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::medium: return "medium";
    case Difficulty::hard: return "hard";
    }
    return "easy";
}

Difficulty difficulty_from_string(const std::string& s)
{
    const auto l = lower(s);
    if (l == "easy") return Difficulty::easy;
    if (l == "medium") return Difficulty::medium;
    if (l == "hard") return Difficulty::hard;
    throw ParseError("unknown difficulty '" + s + "'");
}

Difficulty difficulty_for_frame_count(std::size_t frames)
{
    if (frames >= 100)
        return Difficulty::easy;
    if (frames >= 2)
        return Difficulty::medium;
    return Difficulty::hard;
}

bool natural_less(const std::string& a, const std::string& b)
{
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        const bool da = std::isdigit(static_cast<unsigned char>(a[i]));
        const bool db = std::isdigit(static_cast<unsigned char>(b[j]));
        if (da && db) {
            std::size_t ie = i, je = j;
            while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
            while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
            // Compare digit runs by value: strip leading zeros, then length, then lexically.
            std::size_t is = i, js = j;
            while (is + 1 < ie && a[is] == '0') ++is;
            while (js + 1 < je && b[js] == '0') ++js;
            if (ie - is != je - js)
                return ie - is < je - js;
            const int c = a.compare(is, ie - is, b, js, je - js);
            if (c != 0)
                return c < 0;
            if (ie - i != je - j)
                return ie - i < je - j;
            i = ie;
            j = je;
        } else {
            if (a[i] != b[j])
                return a[i] < b[j];
            ++i;
            ++j;
        }
    }
    return a.size() - i < b.size() - j;
}

std::vector<fs::path> list_images(const fs::path& dir)
{
    std::vector<fs::path> out;
    if (!fs::is_directory(dir))
        return out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && is_image(e.path()))
            out.push_back(e.path());
    std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) {
        const auto sa = a.stem().string(), sb = b.stem().string();
        if (sa != sb)
            return natural_less(sa, sb);
        return a.filename().string() < b.filename().string();
    });
    return out;
}

Frame load_frame(const fs::path& path, int index)
{
    cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
    if (bgr.empty())
        throw IoError("cannot read image '" + path.string() + "'");
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return make_frame(index, path.stem().string(), std::move(rgb));
}

DepthMap load_depth(const fs::path& path, double depth_scale)
{
    if (!(depth_scale > 0.0))
        throw_invalid("load_depth: depth scale must be positive");
    if (!fs::exists(path))
        throw IoError("cannot read depth map '" + path.string() + "'");
    cv::Mat raw = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (raw.empty())
        throw IoError("cannot read depth map '" + path.string() + "'");
    if (raw.depth() != CV_16U || raw.channels() != 1)
        throw FormatError("depth map '" + path.string() + "' is not 16-bit single-channel");
    DepthMap d(raw.cols, raw.rows);
    for (int y = 0; y < raw.rows; ++y) {
        const auto* row = raw.ptr<std::uint16_t>(y);
        for (int x = 0; x < raw.cols; ++x)
            d.at(x, y) = row[x] == 0 ? 0.0 : row[x] * depth_scale;
    }
    return d;
}

BinaryMask load_mask(const fs::path& path, MaskKind kind)
{
    if (!fs::exists(path))
        throw IoError("cannot read mask '" + path.string() + "'");
    cv::Mat gray = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (gray.empty())
        throw IoError("cannot read mask '" + path.string() + "'");
    BinaryMask m(gray.cols, gray.rows, kind);
    for (int y = 0; y < gray.rows; ++y) {
        const auto* row = gray.ptr<std::uint8_t>(y);
        for (int x = 0; x < gray.cols; ++x)
            m.set(x, y, row[x] > 127);
    }
    return m;
}

RgbaImage apply_mask_rgba(const Frame& frame, const BinaryMask& mask)
{
    if (frame.width() != mask.width || frame.height() != mask.height)
        throw IntegrityError("apply_mask_rgba: frame '" + frame.id + "' is " + dims(frame.width(), frame.height()) +
                             " but mask is " + dims(mask.width, mask.height));
    RgbaImage out{cv::Mat(frame.height(), frame.width(), CV_8UC4)};
    for (int y = 0; y < frame.height(); ++y) {
        const auto* src = frame.rgb.ptr<cv::Vec3b>(y);
        auto* dst = out.rgba.ptr<cv::Vec4b>(y);
        for (int x = 0; x < frame.width(); ++x)
            dst[x] = mask.test(x, y) ? cv::Vec4b(src[x][0], src[x][1], src[x][2], 255) : cv::Vec4b(0, 0, 0, 0);
    }
    return out;
}

void save_depth_png(const DepthMap& depth, const fs::path& path, double depth_scale)
{
    cv::Mat raw(depth.height, depth.width, CV_16U);
    for (int y = 0; y < depth.height; ++y)
        for (int x = 0; x < depth.width; ++x)
            raw.at<std::uint16_t>(y, x) = cv::saturate_cast<std::uint16_t>(std::lround(depth.at(x, y) / depth_scale));
    if (!cv::imwrite(path.string(), raw))
        throw IoError("cannot write '" + path.string() + "'");
}

void save_mask_png(const BinaryMask& mask, const fs::path& path)
{
    cv::Mat img(mask.height, mask.width, CV_8U);
    for (int y = 0; y < mask.height; ++y)
        for (int x = 0; x < mask.width; ++x)
            img.at<std::uint8_t>(y, x) = mask.test(x, y) ? 255 : 0;
    if (!cv::imwrite(path.string(), img))
        throw IoError("cannot write '" + path.string() + "'");
}

void save_frame_png(const Frame& frame, const fs::path& path)
{
    cv::Mat bgr;
    cv::cvtColor(frame.rgb, bgr, cv::COLOR_RGB2BGR);
    if (!cv::imwrite(path.string(), bgr))
        throw IoError("cannot write '" + path.string() + "'");
}

SceneMetadata read_metadata(const fs::path& path)
{
    const json j = read_json(path);
    SceneMetadata m;
    try {
        m.label = j.value("label", std::string{});
        m.reference_real_w_m = j.value("reference_real_w_m", 0.0);
        m.reference_real_l_m = j.value("reference_real_l_m", 0.0);
        m.block_edge_m = j.value("block_edge_m", 0.012);
        m.excluded = j.value("excluded", false);
        if (j.contains("overhead_index") && !j["overhead_index"].is_null())
            m.overhead_index = j["overhead_index"].get<int>();
        if (j.contains("scene_id") && !j["scene_id"].is_null())
            m.scene_id = j["scene_id"].get<int>();
        if (j.contains("difficulty") && !j["difficulty"].is_null())
            m.difficulty = difficulty_from_string(j["difficulty"].get<std::string>());
        if (j.contains("gt_volume_cm3") && !j["gt_volume_cm3"].is_null())
            m.gt_volume_cm3 = j["gt_volume_cm3"].get<double>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return m;
}

void write_metadata(const SceneMetadata& meta, const fs::path& path)
{
    json j;
    j["label"] = meta.label;
    j["reference_real_w_m"] = meta.reference_real_w_m;
    j["reference_real_l_m"] = meta.reference_real_l_m;
    j["block_edge_m"] = meta.block_edge_m;
    j["excluded"] = meta.excluded;
    if (meta.overhead_index) j["overhead_index"] = *meta.overhead_index;
    if (meta.scene_id) j["scene_id"] = *meta.scene_id;
    if (meta.difficulty) j["difficulty"] = to_string(*meta.difficulty);
    if (meta.gt_volume_cm3) j["gt_volume_cm3"] = *meta.gt_volume_cm3;
    write_json(j, path);
}

std::vector<double> read_block_lengths(const fs::path& path)
{
    const json j = read_json(path);
    try {
        const json& arr = j.is_array() ? j : j.at("block_lengths");
        return arr.get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": expected a list of block lengths (" + e.what() + ")");
    }
}

SceneRecord load_scene(const fs::path& dir, const IngestConfig& config)
{
    const auto& lay = config.layout;
    const auto rgb_files = list_images(dir / lay.rgb);
    if (rgb_files.empty())
        throw EmptySceneError("scene '" + dir.string() + "' has no RGB frames under '" + lay.rgb + "/'");

    SceneRecord rec;
    rec.dir = dir;
    if (fs::exists(dir / lay.metadata))
        rec.metadata = read_metadata(dir / lay.metadata);
    if (fs::exists(dir / lay.blocks))
        rec.block_lengths = read_block_lengths(dir / lay.blocks);

    for (std::size_t i = 0; i < rgb_files.size(); ++i) {
        Frame f = load_frame(rgb_files[i], static_cast<int>(i));
        const std::string stem = f.id;
        auto check = [&](int w, int h, const fs::path& other) {
            if (w != f.width() || h != f.height())
                throw IntegrityError("'" + rgb_files[i].string() + "' is " + dims(f.width(), f.height()) + " but '" +
                                     other.string() + "' is " + dims(w, h));
        };
        std::optional<DepthMap> depth;
        if (auto p = find_by_stem(dir / lay.depth, stem)) {
            depth = load_depth(*p, config.depth_scale);
            check(depth->width, depth->height, *p);
        }
        std::optional<BinaryMask> food, ref;
        if (auto p = find_by_stem(dir / lay.food_mask, stem)) {
            food = load_mask(*p, MaskKind::food);
            check(food->width, food->height, *p);
        }
        if (auto p = find_by_stem(dir / lay.reference_mask, stem)) {
            ref = load_mask(*p, MaskKind::reference);
            check(ref->width, ref->height, *p);
        }
        rec.frames.push_back(std::move(f));
        rec.depth_maps.push_back(std::move(depth));
        rec.food_masks.push_back(std::move(food));
        rec.reference_masks.push_back(std::move(ref));
    }

    const auto mesh_dir = dir / lay.meshes;
    rec.meshes.food = find_mesh(mesh_dir, "food");
    rec.meshes.reference = find_mesh(mesh_dir, "ref");
    rec.meshes.ground_truth = find_mesh(mesh_dir, "gt");

    rec.scene_id = rec.metadata.scene_id.value_or(leading_integer(dir.filename().string()).value_or(0));
    rec.label = rec.metadata.label.empty() ? dir.filename().string() : rec.metadata.label;
    rec.difficulty = rec.metadata.difficulty.value_or(difficulty_for_frame_count(rec.frames.size()));
    if (rec.metadata.overhead_index) {
        const int oh = *rec.metadata.overhead_index;
        if (oh < 0 || oh >= static_cast<int>(rec.frames.size()))
            throw InvalidInput("scene '" + dir.string() + "': overhead_index " + std::to_string(oh) + " out of range");
        rec.overhead_index = oh;
    } else {
        rec.overhead_index = default_overhead(rec.reference_masks);
    }
    return rec;
}

SceneSummary scan_scene(const fs::path& dir, const fs::path& root, const IngestConfig& config)
{
    const auto& lay = config.layout;
    SceneSummary s;
    SceneMetadata meta;
    if (fs::exists(dir / lay.metadata))
        meta = read_metadata(dir / lay.metadata);
    s.frame_count = count_images(dir / lay.rgb);
    s.depth_count = count_images(dir / lay.depth);
    s.food_mask_count = count_images(dir / lay.food_mask);
    s.reference_mask_count = count_images(dir / lay.reference_mask);
    s.has_food_mesh = find_mesh(dir / lay.meshes, "food").has_value();
    s.has_reference_mesh = find_mesh(dir / lay.meshes, "ref").has_value();
    s.has_gt_mesh = find_mesh(dir / lay.meshes, "gt").has_value();
    s.has_blocks = fs::exists(dir / lay.blocks);
    s.excluded = meta.excluded;
    s.overhead_index = meta.overhead_index;
    s.scene_id = meta.scene_id.value_or(leading_integer(dir.filename().string()).value_or(0));
    s.label = meta.label.empty() ? dir.filename().string() : meta.label;
    s.difficulty = meta.difficulty.value_or(difficulty_for_frame_count(s.frame_count));
    s.path = fs::relative(dir, root).generic_string();
    return s;
}

DatasetManifest scan_dataset(const fs::path& root, const IngestConfig& config)
{
    if (!fs::is_directory(root))
        throw IoError("dataset root '" + root.string() + "' is not a directory");
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && fs::is_directory(e.path() / config.layout.rgb))
            dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end(),
              [](const fs::path& a, const fs::path& b) { return natural_less(a.filename().string(), b.filename().string()); });

    DatasetManifest m;
    m.root = root;
    std::set<int> ids;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        auto s = scan_scene(dirs[i], root, config);
        if (s.scene_id == 0)
            s.scene_id = static_cast<int>(i) + 1;
        if (!ids.insert(s.scene_id).second)
            throw IntegrityError("duplicate scene id " + std::to_string(s.scene_id) + " at '" + dirs[i].string() + "'");
        m.scenes.push_back(std::move(s));
    }
    std::sort(m.scenes.begin(), m.scenes.end(), [](const auto& a, const auto& b) { return a.scene_id < b.scene_id; });
    return m;
}

json to_json(const DatasetManifest& m)
{
    json scenes = json::array();
    for (const auto& s : m.scenes) {
        json j{{"scene_id", s.scene_id},
               {"label", s.label},
               {"difficulty", to_string(s.difficulty)},
               {"path", s.path},
               {"frame_count", s.frame_count},
               {"depth_count", s.depth_count},
               {"food_mask_count", s.food_mask_count},
               {"reference_mask_count", s.reference_mask_count},
               {"has_food_mesh", s.has_food_mesh},
               {"has_reference_mesh", s.has_reference_mesh},
               {"has_gt_mesh", s.has_gt_mesh},
               {"has_blocks", s.has_blocks},
               {"excluded", s.excluded}};
        j["overhead_index"] = s.overhead_index ? json(*s.overhead_index) : json(nullptr);
        scenes.push_back(std::move(j));
    }
    std::map<std::string, int> counts{{"easy", 0}, {"medium", 0}, {"hard", 0}};
    for (const auto& s : m.scenes)
        ++counts[to_string(s.difficulty)];
    return json{{"root", m.root.generic_string()}, {"difficulty_counts", counts}, {"scenes", scenes}};
}

DatasetManifest manifest_from_json(const json& j)
{
    DatasetManifest m;
    try {
        m.root = j.at("root").get<std::string>();
        for (const auto& s : j.at("scenes")) {
            SceneSummary x;
            x.scene_id = s.at("scene_id").get<int>();
            x.label = s.at("label").get<std::string>();
            x.difficulty = difficulty_from_string(s.at("difficulty").get<std::string>());
            x.path = s.at("path").get<std::string>();
            x.frame_count = s.at("frame_count").get<std::size_t>();
            x.depth_count = s.at("depth_count").get<std::size_t>();
            x.food_mask_count = s.at("food_mask_count").get<std::size_t>();
            x.reference_mask_count = s.at("reference_mask_count").get<std::size_t>();
            x.has_food_mesh = s.at("has_food_mesh").get<bool>();
            x.has_reference_mesh = s.at("has_reference_mesh").get<bool>();
            x.has_gt_mesh = s.at("has_gt_mesh").get<bool>();
            x.has_blocks = s.at("has_blocks").get<bool>();
            x.excluded = s.at("excluded").get<bool>();
            if (!s.at("overhead_index").is_null())
                x.overhead_index = s.at("overhead_index").get<int>();
            m.scenes.push_back(std::move(x));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest: ") + e.what());
    }
    return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& path)
{
    write_json(to_json(m), path);
}

DatasetManifest read_manifest(const fs::path& path)
{
    return manifest_from_json(read_json(path));
}

} // namespace voleta
