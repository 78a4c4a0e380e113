#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "voleta/errors.hpp"
#include "voleta/mesh.hpp"

namespace voleta {

namespace {

std::string lower_ext(const std::filesystem::path& p)
{
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

std::string read_all(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void add_polygon(TriangleMesh& mesh, const std::vector<std::uint32_t>& poly)
{
    for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        const Triangle t{poly[0], poly[k], poly[k + 1]};
        if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            mesh.triangles.push_back(t);
    }
}

// --- OBJ -------------------------------------------------------------------

TriangleMesh parse_obj(const std::string& text, const std::string& label)
{
    TriangleMesh mesh;
    mesh.name = label;
    struct PendingFace {
        std::vector<std::int64_t> idx;
        std::size_t line;
    };
    std::vector<PendingFace> faces;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag) || tag[0] == '#')
            continue;
        if (tag == "v") {
            double x, y, z;
            if (!(ls >> x >> y >> z))
                throw ParseError(label + ":" + std::to_string(line_no) + ": malformed vertex");
            mesh.vertices.emplace_back(x, y, z);
        } else if (tag == "f") {
            PendingFace face{{}, line_no};
            for (std::string tok; ls >> tok;) {
                const auto slash = tok.find('/');
                const std::string head = tok.substr(0, slash);
                std::int64_t v = 0;
                auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), v);
                if (ec != std::errc{} || ptr != head.data() + head.size() || v == 0)
                    throw ParseError(label + ":" + std::to_string(line_no) + ": bad face index '" + tok + "'");
                // Negative indices count back from the most recent vertex.
                face.idx.push_back(v > 0 ? v - 1 : static_cast<std::int64_t>(mesh.vertices.size()) + v);
            }
            if (face.idx.size() < 3)
                throw ParseError(label + ":" + std::to_string(line_no) + ": face with fewer than 3 vertices");
            faces.push_back(std::move(face));
        }
        // vt, vn, g, o, s, usemtl, mtllib: ignored
    }

    const auto nv = static_cast<std::int64_t>(mesh.vertices.size());
    std::vector<std::uint32_t> poly;
    for (const auto& f : faces) {
        poly.clear();
        for (auto i : f.idx) {
            if (i < 0 || i >= nv)
                throw ParseError(label + ":" + std::to_string(f.line) + ": face references vertex " + std::to_string(i + 1) +
                                 " but only " + std::to_string(nv) + " exist");
            poly.push_back(static_cast<std::uint32_t>(i));
        }
        add_polygon(mesh, poly);
    }
    return mesh;
}

// --- PLY -------------------------------------------------------------------

enum class Scalar { i8, u8, i16, u16, i32, u32, f32, f64 };

Scalar parse_scalar(const std::string& s, const std::string& where)
{
    if (s == "char" || s == "int8") return Scalar::i8;
    if (s == "uchar" || s == "uint8") return Scalar::u8;
    if (s == "short" || s == "int16") return Scalar::i16;
    if (s == "ushort" || s == "uint16") return Scalar::u16;
    if (s == "int" || s == "int32") return Scalar::i32;
    if (s == "uint" || s == "uint32") return Scalar::u32;
    if (s == "float" || s == "float32") return Scalar::f32;
    if (s == "double" || s == "float64") return Scalar::f64;
    throw ParseError(where + ": unknown PLY scalar type '" + s + "'");
}

std::size_t scalar_size(Scalar s)
{
    switch (s) {
    case Scalar::i8: case Scalar::u8: return 1;
    case Scalar::i16: case Scalar::u16: return 2;
    case Scalar::i32: case Scalar::u32: case Scalar::f32: return 4;
    case Scalar::f64: return 8;
    }
    return 0;
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
    Scalar count_type = Scalar::u8;
    Scalar type = Scalar::f32;
};

struct PlyElement {
    std::string name;
    std::size_t count = 0;
    std::vector<PlyProperty> props;
};

class BinaryCursor {
public:
    BinaryCursor(const std::string& data, std::size_t offset, std::string label)
        : data_(data), pos_(offset), label_(std::move(label)) {}

    double read(Scalar s)
    {
        const auto n = scalar_size(s);
        if (pos_ + n > data_.size())
            throw ParseError(label_ + ": unexpected end of binary PLY data at byte " + std::to_string(pos_));
        const char* p = data_.data() + pos_;
        pos_ += n;
        static_assert(std::endian::native == std::endian::little, "binary PLY reader assumes a little-endian host");
        switch (s) {
        case Scalar::i8: { std::int8_t v; std::memcpy(&v, p, 1); return v; }
        case Scalar::u8: { std::uint8_t v; std::memcpy(&v, p, 1); return v; }
        case Scalar::i16: { std::int16_t v; std::memcpy(&v, p, 2); return v; }
        case Scalar::u16: { std::uint16_t v; std::memcpy(&v, p, 2); return v; }
        case Scalar::i32: { std::int32_t v; std::memcpy(&v, p, 4); return v; }
        case Scalar::u32: { std::uint32_t v; std::memcpy(&v, p, 4); return v; }
        case Scalar::f32: { float v; std::memcpy(&v, p, 4); return v; }
        case Scalar::f64: { double v; std::memcpy(&v, p, 8); return v; }
        }
        return 0;
    }
    std::size_t pos() const { return pos_; }

private:
    const std::string& data_;
    std::size_t pos_;
    std::string label_;
};

class AsciiCursor {
public:
    AsciiCursor(const std::string& data, std::size_t offset, std::string label)
        : in_(data.substr(offset)), label_(std::move(label)) {}

    double read(Scalar)
    {
        double v;
        if (!(in_ >> v))
            throw ParseError(label_ + ": malformed ASCII PLY body near byte " + std::to_string(static_cast<long long>(in_.tellg())));
        return v;
    }
    std::size_t pos() { return static_cast<std::size_t>(in_.tellg()); }

private:
    std::istringstream in_;
    std::string label_;
};

template <class Cursor>
void read_ply_body(Cursor& cur, const std::vector<PlyElement>& elements, TriangleMesh& mesh, const std::string& label)
{
    std::vector<std::uint32_t> poly;
    std::vector<double> list_vals;
    for (const auto& el : elements) {
        const bool is_vertex = el.name == "vertex";
        const bool is_face = el.name == "face";
        int ix = -1, iy = -1, iz = -1, iface = -1;
        for (std::size_t k = 0; k < el.props.size(); ++k) {
            const auto& n = el.props[k].name;
            if (n == "x") ix = static_cast<int>(k);
            if (n == "y") iy = static_cast<int>(k);
            if (n == "z") iz = static_cast<int>(k);
            if (el.props[k].is_list && (n == "vertex_indices" || n == "vertex_index")) iface = static_cast<int>(k);
        }
        if (is_vertex && (ix < 0 || iy < 0 || iz < 0))
            throw ParseError(label + ": vertex element lacks x/y/z");
        if (is_face && iface < 0)
            throw ParseError(label + ": face element lacks a vertex_indices list");

        for (std::size_t row = 0; row < el.count; ++row) {
            Vec3 p = Vec3::Zero();
            poly.clear();
            for (std::size_t k = 0; k < el.props.size(); ++k) {
                const auto& prop = el.props[k];
                if (prop.is_list) {
                    const double cnt = cur.read(prop.count_type);
                    if (cnt < 0)
                        throw ParseError(label + ": negative list length");
                    const auto n = static_cast<std::size_t>(cnt);
                    for (std::size_t j = 0; j < n; ++j) {
                        const double v = cur.read(prop.type);
                        if (static_cast<int>(k) == iface) {
                            if (v < 0)
                                throw ParseError(label + ": negative vertex index in face " + std::to_string(row));
                            poly.push_back(static_cast<std::uint32_t>(v));
                        }
                    }
                } else {
                    const double v = cur.read(prop.type);
                    if (static_cast<int>(k) == ix) p.x() = v;
                    if (static_cast<int>(k) == iy) p.y() = v;
                    if (static_cast<int>(k) == iz) p.z() = v;
                }
            }
            if (is_vertex)
                mesh.vertices.push_back(p);
            if (is_face) {
                if (poly.size() < 3)
                    throw ParseError(label + ": face " + std::to_string(row) + " has fewer than 3 vertices");
                for (auto idx : poly)
                    if (idx >= mesh.vertices.size())
                        throw ParseError(label + ": face " + std::to_string(row) + " references vertex " + std::to_string(idx) +
                                         " but only " + std::to_string(mesh.vertices.size()) + " exist (byte offset " +
                                         std::to_string(cur.pos()) + ")");
                add_polygon(mesh, poly);
            }
        }
    }
}

TriangleMesh parse_ply(const std::string& data, const std::string& label)
{
    if (data.rfind("ply", 0) != 0)
        throw ParseError(label + ":1: missing 'ply' magic");

    std::vector<PlyElement> elements;
    std::string format;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool done = false;
    bool meters = false;
    while (!done) {
        const auto eol = data.find('\n', pos);
        if (eol == std::string::npos)
            throw ParseError(label + ": header not terminated by end_header");
        std::string line = data.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        std::istringstream ls(line);
        std::string kw;
        ls >> kw;
        const std::string where = label + ":" + std::to_string(line_no);
        if (kw == "comment") {
            if (line.find("unit=meters") != std::string::npos)
                meters = true;
        } else if (kw == "ply" || kw == "obj_info" || kw.empty()) {
            continue;
        } else if (kw == "format") {
            std::string version;
            ls >> format >> version;
            if (format != "ascii" && format != "binary_little_endian")
                throw ParseError(where + ": unsupported PLY format '" + format + "'");
        } else if (kw == "element") {
            PlyElement el;
            long long count = -1;
            if (!(ls >> el.name >> count) || count < 0)
                throw ParseError(where + ": malformed element line");
            el.count = static_cast<std::size_t>(count);
            elements.push_back(std::move(el));
        } else if (kw == "property") {
            if (elements.empty())
                throw ParseError(where + ": property before any element");
            PlyProperty prop;
            std::string type;
            ls >> type;
            if (type == "list") {
                std::string ct, it;
                ls >> ct >> it;
                prop.is_list = true;
                prop.count_type = parse_scalar(ct, where);
                prop.type = parse_scalar(it, where);
            } else {
                prop.type = parse_scalar(type, where);
            }
            if (!(ls >> prop.name))
                throw ParseError(where + ": property without a name");
            elements.back().props.push_back(prop);
        } else if (kw == "end_header") {
            done = true;
        } else {
            throw ParseError(where + ": unexpected header keyword '" + kw + "'");
        }
    }
    if (format.empty())
        throw ParseError(label + ": header lacks a format line");

    TriangleMesh mesh;
    mesh.name = label;
    mesh.unit = meters ? LengthUnit::meters : LengthUnit::unitless;
    if (format == "ascii") {
        AsciiCursor cur(data, pos, label);
        read_ply_body(cur, elements, mesh, label);
    } else {
        BinaryCursor cur(data, pos, label);
        read_ply_body(cur, elements, mesh, label);
    }
    return mesh;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw IoError("write to '" + path.string() + "' failed");
}

void save_obj(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out.precision(17);
    out << "# " << mesh.vertices.size() << " vertices, " << mesh.triangles.size() << " triangles\n";
    for (const auto& v : mesh.vertices)
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& t : mesh.triangles)
        out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
    finish(out, path);
}

} // namespace

TriangleMesh load_mesh(const std::filesystem::path& path)
{
    const auto ext = lower_ext(path);
    if (ext != ".obj" && ext != ".ply")
        throw ParseError("unknown mesh extension '" + ext + "' for '" + path.string() + "'");
    const std::string data = read_all(path);
    const std::string label = path.filename().string();
    TriangleMesh mesh = ext == ".obj" ? parse_obj(data, label) : parse_ply(data, label);
    mesh.name = path.stem().string();
    return mesh;
}

void save_ply(const TriangleMesh& mesh, const std::filesystem::path& path, PlyEncoding encoding)
{
    mesh.validate();
    auto out = open_out(path);
    const bool ascii = encoding == PlyEncoding::ascii;
    out << "ply\nformat " << (ascii ? "ascii" : "binary_little_endian") << " 1.0\n"
        << "comment voleta " << (mesh.unit == LengthUnit::meters ? "unit=meters" : "unit=unitless") << '\n'
        << "element vertex " << mesh.vertices.size() << '\n'
        << "property double x\nproperty double y\nproperty double z\n"
        << "element face " << mesh.triangles.size() << '\n'
        << "property list uchar int vertex_indices\nend_header\n";
    if (ascii) {
        out.precision(17);
        for (const auto& v : mesh.vertices)
            out << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
        for (const auto& t : mesh.triangles)
            out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    } else {
        for (const auto& v : mesh.vertices) {
            const double xyz[3] = {v.x(), v.y(), v.z()};
            out.write(reinterpret_cast<const char*>(xyz), sizeof xyz);
        }
        for (const auto& t : mesh.triangles) {
            const std::uint8_t n = 3;
            const std::int32_t idx[3] = {static_cast<std::int32_t>(t[0]), static_cast<std::int32_t>(t[1]),
                                         static_cast<std::int32_t>(t[2])};
            out.write(reinterpret_cast<const char*>(&n), 1);
            out.write(reinterpret_cast<const char*>(idx), sizeof idx);
        }
    }
    finish(out, path);
}

void save_mesh(const TriangleMesh& mesh, const std::filesystem::path& path)
{
    const auto ext = lower_ext(path);
    if (ext == ".obj") {
        mesh.validate();
        save_obj(mesh, path);
    } else if (ext == ".ply") {
        save_ply(mesh, path, PlyEncoding::binary_little_endian);
    } else {
        throw IoError("unknown mesh extension '" + ext + "' for '" + path.string() + "'");
    }
}

} // namespace voleta
