#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string_view>

#include "strider/errors.hpp"
#include "strider/mesh.hpp"

namespace strider {
namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Splits text into lines, strips '#' comments and surrounding whitespace,
/// and remembers 1-based line numbers of non-empty lines.
struct LineReader {
    struct Line {
        std::size_t number;
        std::string_view text;
    };
    std::vector<Line> lines;

    explicit LineReader(const std::string& text) {
        std::size_t pos = 0;
        std::size_t number = 0;
        while (pos <= text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string::npos) end = text.size();
            ++number;
            std::string_view line(text.data() + pos, end - pos);
            if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
            while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
            if (!line.empty()) lines.push_back({number, line});
            pos = end + 1;
        }
    }
};

std::vector<std::string_view> tokenize(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    const auto* first = token.data();
    const auto* last = token.data() + token.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

void fan_triangulate(const std::vector<std::size_t>& polygon, std::vector<Face>& faces) {
    for (std::size_t k = 1; k + 1 < polygon.size(); ++k) faces.push_back({polygon[0], polygon[k], polygon[k + 1]});
}

Mesh parse_off(const std::string& text, const std::string& name) {
    LineReader reader(text);
    if (reader.lines.empty()) throw ParseError(name, 1, "empty file");
    std::size_t cursor = 0;
    auto header = tokenize(reader.lines[0].text);
    if (header.empty() || header[0] != "OFF") throw ParseError(name, reader.lines[0].number, "missing OFF header");
    std::vector<std::string_view> counts(header.begin() + 1, header.end());
    std::size_t counts_line = reader.lines[0].number;
    if (counts.empty()) {
        if (reader.lines.size() < 2) throw ParseError(name, reader.lines[0].number, "missing element counts");
        counts = tokenize(reader.lines[1].text);
        counts_line = reader.lines[1].number;
        cursor = 2;
    } else {
        cursor = 1;
    }
    std::size_t nv = 0;
    std::size_t nf = 0;
    if (counts.size() < 2 || !parse_number(counts[0], nv) || !parse_number(counts[1], nf)) {
        throw ParseError(name, counts_line, "expected '<vertices> <faces> <edges>' counts");
    }

    std::vector<Vec3> vertices;
    vertices.reserve(nv);
    for (std::size_t i = 0; i < nv; ++i, ++cursor) {
        if (cursor >= reader.lines.size()) throw ParseError(name, reader.lines.back().number, "unexpected end of file in vertex list");
        const auto& line = reader.lines[cursor];
        auto tok = tokenize(line.text);
        Vec3 p;
        if (tok.size() < 3 || !parse_number(tok[0], p.x()) || !parse_number(tok[1], p.y()) || !parse_number(tok[2], p.z())) {
            throw ParseError(name, line.number, "expected three vertex coordinates");
        }
        vertices.push_back(p);
    }

    std::vector<Face> faces;
    faces.reserve(nf);
    std::vector<std::size_t> polygon;
    for (std::size_t i = 0; i < nf; ++i, ++cursor) {
        if (cursor >= reader.lines.size()) throw ParseError(name, reader.lines.back().number, "unexpected end of file in face list");
        const auto& line = reader.lines[cursor];
        auto tok = tokenize(line.text);
        std::size_t k = 0;
        if (tok.empty() || !parse_number(tok[0], k)) throw ParseError(name, line.number, "expected face vertex count");
        if (k < 3) throw ParseError(name, line.number, "face with fewer than 3 vertices cannot be triangulated");
        if (tok.size() < k + 1) throw ParseError(name, line.number, "face lists fewer indices than declared");
        polygon.assign(k, 0);
        for (std::size_t j = 0; j < k; ++j) {
            if (!parse_number(tok[j + 1], polygon[j])) throw ParseError(name, line.number, "invalid face index");
            if (polygon[j] >= nv) {
                throw ParseError(name, line.number, "face index " + std::to_string(polygon[j]) + " out of range (" +
                                                        std::to_string(nv) + " vertices)");
            }
        }
        fan_triangulate(polygon, faces);
    }
    return Mesh(std::move(vertices), std::move(faces));
}

Mesh parse_obj(const std::string& text, const std::string& name) {
    LineReader reader(text);
    std::vector<Vec3> vertices;
    struct PendingFace {
        std::size_t line;
        std::vector<long long> indices;
    };
    std::vector<PendingFace> pending;
    for (const auto& line : reader.lines) {
        auto tok = tokenize(line.text);
        if (tok[0] == "v") {
            Vec3 p;
            if (tok.size() < 4 || !parse_number(tok[1], p.x()) || !parse_number(tok[2], p.y()) || !parse_number(tok[3], p.z())) {
                throw ParseError(name, line.number, "expected three vertex coordinates");
            }
            vertices.push_back(p);
        } else if (tok[0] == "f") {
            if (tok.size() < 4) throw ParseError(name, line.number, "face with fewer than 3 vertices cannot be triangulated");
            PendingFace face{line.number, {}};
            for (std::size_t j = 1; j < tok.size(); ++j) {
                std::string_view ref = tok[j];
                if (const auto slash = ref.find('/'); slash != std::string_view::npos) ref = ref.substr(0, slash);
                long long idx = 0;
                if (!parse_number(ref, idx) || idx == 0) throw ParseError(name, line.number, "invalid face index");
                // Negative indices are relative to the vertices read so far.
                if (idx < 0) idx = static_cast<long long>(vertices.size()) + idx + 1;
                face.indices.push_back(idx - 1);
            }
            pending.push_back(std::move(face));
        }
        // vn/vt/usemtl/o/g/s and other records are ignored.
    }
    std::vector<Face> faces;
    std::vector<std::size_t> polygon;
    for (const auto& face : pending) {
        polygon.clear();
        for (long long idx : face.indices) {
            if (idx < 0 || static_cast<std::size_t>(idx) >= vertices.size()) {
                throw ParseError(name, face.line, "face index " + std::to_string(idx + 1) + " out of range (" +
                                                      std::to_string(vertices.size()) + " vertices)");
            }
            polygon.push_back(static_cast<std::size_t>(idx));
        }
        fan_triangulate(polygon, faces);
    }
    return Mesh(std::move(vertices), std::move(faces));
}

}  // namespace

MeshFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".off") return MeshFormat::off;
    if (ext == ".obj") return MeshFormat::obj;
    throw DataError("unsupported mesh extension '" + ext + "' for " + path.string());
}

Mesh parse_mesh(const std::string& text, MeshFormat format, const std::string& source_name) {
    return format == MeshFormat::off ? parse_off(text, source_name) : parse_obj(text, source_name);
}

Mesh load_mesh(const std::filesystem::path& path) { return load_mesh(path, format_from_path(path)); }

Mesh load_mesh(const std::filesystem::path& path, MeshFormat format) {
    return parse_mesh(read_file(path), format, path.string());
}

std::string to_off_string(const Mesh& mesh, int precision) {
    std::ostringstream out;
    out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.face_count() << ' ' << mesh.edge_count() << '\n';
    out << std::setprecision(std::max(precision, 9));
    for (const Vec3& p : mesh.vertices()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    for (const Face& f : mesh.faces()) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
    return out.str();
}

void save_off(const Mesh& mesh, const std::filesystem::path& path, int precision) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_off_string(mesh, precision);
}

MeshLabels load_labels(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    LineReader reader(text);
    if (reader.lines.empty()) throw ParseError(path.string(), 1, "empty label file");
    auto first = tokenize(reader.lines[0].text);
    if (first[0] == "class") {
        int id = 0;
        if (first.size() != 2 || !parse_number(first[1], id)) throw ParseError(path.string(), reader.lines[0].number, "expected 'class <id>'");
        return MeshLabels::classification(id);
    }
    std::vector<int> segments;
    segments.reserve(reader.lines.size());
    for (const auto& line : reader.lines) {
        int id = 0;
        if (!parse_number(line.text, id)) throw ParseError(path.string(), line.number, "expected one integer segment id");
        segments.push_back(id);
    }
    return MeshLabels::segmentation(std::move(segments));
}

void save_labels(const MeshLabels& labels, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    if (labels.class_id) {
        out << "class " << *labels.class_id << '\n';
    } else {
        for (int s : labels.vertex_segments) out << s << '\n';
    }
}

}  // namespace strider
