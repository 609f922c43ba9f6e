#include "sx/mesh_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sx/errors.hpp"

namespace sx {

namespace {

std::string lower_ext(const std::string& path) {
    const size_t dot = path.find_last_of('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// --- little-endian scalar I/O ------------------------------------------

void put_u32(std::string& out, uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double d) {
    const uint64_t v = std::bit_cast<uint64_t>(d);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class BinaryReader {
public:
    BinaryReader(const std::string& path, const std::string& data, size_t offset)
        : path_(path), data_(data), pos_(offset) {}

    size_t offset() const { return pos_; }

    void need(size_t n, const char* what) {
        if (pos_ + n > data_.size())
            throw ParseError(path_, static_cast<long>(pos_), std::string("truncated ") + what);
    }
    uint64_t read_unsigned(size_t bytes, const char* what) {
        need(bytes, what);
        uint64_t v = 0;
        for (size_t i = 0; i < bytes; ++i)
            v |= static_cast<uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += bytes;
        return v;
    }
    double read_real(size_t bytes, const char* what) {
        const uint64_t raw = read_unsigned(bytes, what);
        if (bytes == 8) return std::bit_cast<double>(raw);
        return static_cast<double>(std::bit_cast<float>(static_cast<uint32_t>(raw)));
    }
    void skip(size_t n, const char* what) {
        need(n, what);
        pos_ += n;
    }

private:
    const std::string& path_;
    const std::string& data_;
    size_t pos_;
};

// --- PLY ----------------------------------------------------------------

struct PlyProperty {
    std::string name;
    std::string type;
    bool is_list = false;
    std::string count_type;
};

struct PlyElement {
    std::string name;
    size_t count = 0;
    std::vector<PlyProperty> properties;
};

size_t scalar_size(const std::string& type, const std::string& path, long line) {
    if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") return 1;
    if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") return 2;
    if (type == "int" || type == "int32" || type == "uint" || type == "uint32" ||
        type == "float" || type == "float32")
        return 4;
    if (type == "double" || type == "float64") return 8;
    throw ParseError(path, line, "unknown PLY property type '" + type + "'");
}

bool is_real_type(const std::string& type) {
    return type == "float" || type == "float32" || type == "double" || type == "float64";
}

bool is_integer_type(const std::string& type) {
    return type == "char" || type == "int8" || type == "uchar" || type == "uint8" ||
           type == "short" || type == "int16" || type == "ushort" || type == "uint16" ||
           type == "int" || type == "int32" || type == "uint" || type == "uint32";
}

std::vector<std::string> split_tokens(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream ss(line);
    std::string token;
    while (ss >> token) tokens.push_back(token);
    return tokens;
}

MeshFileData read_ply(const std::string& path, const std::string& data) {
    // Header: line oriented, terminated by end_header.
    size_t pos = 0;
    long line_no = 0;
    const auto next_line = [&]() {
        if (pos >= data.size()) throw ParseError(path, line_no, "unexpected end of file");
        const size_t eol = data.find('\n', pos);
        const size_t end = eol == std::string::npos ? data.size() : eol;
        std::string line = data.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        ++line_no;
        return line;
    };

    if (next_line() != "ply") throw ParseError(path, 1, "not a PLY file (missing 'ply' magic)");

    bool binary = false;
    bool have_format = false;
    std::vector<PlyElement> elements;
    for (;;) {
        const long here = line_no + 1;
        const std::string line = next_line();
        const std::vector<std::string> tok = split_tokens(line);
        if (tok.empty() || tok[0] == "comment" || tok[0] == "obj_info") continue;
        if (tok[0] == "format") {
            if (tok.size() != 3 || tok[2] != "1.0")
                throw ParseError(path, here, "malformed format line");
            if (tok[1] == "ascii") binary = false;
            else if (tok[1] == "binary_little_endian") binary = true;
            else throw ParseError(path, here, "unsupported PLY format '" + tok[1] + "'");
            have_format = true;
        } else if (tok[0] == "element") {
            if (tok.size() != 3) throw ParseError(path, here, "malformed element line");
            PlyElement e;
            e.name = tok[1];
            try {
                e.count = std::stoul(tok[2]);
            } catch (...) {
                throw ParseError(path, here, "bad element count '" + tok[2] + "'");
            }
            elements.push_back(e);
        } else if (tok[0] == "property") {
            if (elements.empty()) throw ParseError(path, here, "property before any element");
            PlyProperty p;
            if (tok.size() == 3) {
                p.type = tok[1];
                p.name = tok[2];
                scalar_size(p.type, path, here);
            } else if (tok.size() == 5 && tok[1] == "list") {
                p.is_list = true;
                p.count_type = tok[2];
                p.type = tok[3];
                p.name = tok[4];
                scalar_size(p.count_type, path, here);
                scalar_size(p.type, path, here);
            } else {
                throw ParseError(path, here, "malformed property line");
            }
            elements.back().properties.push_back(p);
        } else if (tok[0] == "end_header") {
            break;
        } else {
            throw ParseError(path, here, "unknown header keyword '" + tok[0] + "'");
        }
    }
    if (!have_format) throw ParseError(path, line_no, "PLY header has no format line");

    MeshFileData out;
    int x_idx = -1, y_idx = -1, z_idx = -1, q_idx = -1;

    BinaryReader reader(path, data, pos);
    for (const PlyElement& element : elements) {
        if (element.name == "vertex") {
            for (size_t p = 0; p < element.properties.size(); ++p) {
                const PlyProperty& prop = element.properties[p];
                if (prop.is_list)
                    throw ParseError(path, line_no, "list property on vertex element");
                if (prop.name == "x") x_idx = static_cast<int>(p);
                else if (prop.name == "y") y_idx = static_cast<int>(p);
                else if (prop.name == "z") z_idx = static_cast<int>(p);
                else if (prop.name == "quality") q_idx = static_cast<int>(p);
                if ((prop.name == "x" || prop.name == "y" || prop.name == "z" ||
                     prop.name == "quality") &&
                    !is_real_type(prop.type))
                    throw ParseError(path, line_no,
                                     "vertex property '" + prop.name + "' is not float/double");
            }
            if (x_idx < 0 || y_idx < 0 || z_idx < 0)
                throw ParseError(path, line_no, "vertex element lacks x/y/z properties");

            out.mesh.vertices.resize(element.count);
            if (q_idx >= 0) out.quality.resize(element.count);
            std::vector<double> row(element.properties.size());
            for (size_t i = 0; i < element.count; ++i) {
                if (binary) {
                    for (size_t p = 0; p < element.properties.size(); ++p) {
                        const PlyProperty& prop = element.properties[p];
                        const size_t bytes = scalar_size(prop.type, path, line_no);
                        if (is_real_type(prop.type)) row[p] = reader.read_real(bytes, "vertex data");
                        else reader.skip(bytes, "vertex data");
                    }
                } else {
                    const long here = line_no + 1;
                    const std::string line = next_line();
                    const std::vector<std::string> tok = split_tokens(line);
                    if (tok.size() != element.properties.size())
                        throw ParseError(path, here, "vertex row has wrong field count");
                    for (size_t p = 0; p < tok.size(); ++p) {
                        char* end = nullptr;
                        row[p] = std::strtod(tok[p].c_str(), &end);
                        if (end == tok[p].c_str())
                            throw ParseError(path, here, "bad number '" + tok[p] + "'");
                    }
                }
                out.mesh.vertices[i] = Vec3(row[x_idx], row[y_idx], row[z_idx]);
                if (q_idx >= 0) out.quality[i] = row[q_idx];
            }
        } else if (element.name == "face") {
            if (element.properties.size() != 1 || !element.properties[0].is_list ||
                !is_integer_type(element.properties[0].type))
                throw ParseError(path, line_no, "face element must have one integer list property");
            const size_t count_bytes = scalar_size(element.properties[0].count_type, path, line_no);
            const size_t index_bytes = scalar_size(element.properties[0].type, path, line_no);

            out.mesh.triangles.resize(element.count);
            for (size_t i = 0; i < element.count; ++i) {
                if (binary) {
                    const long at = static_cast<long>(reader.offset());
                    const uint64_t n = reader.read_unsigned(count_bytes, "face data");
                    if (n != 3) throw ParseError(path, at, "non-triangle face (" +
                                                               std::to_string(n) + " vertices)");
                    for (int k = 0; k < 3; ++k) {
                        const uint64_t idx = reader.read_unsigned(index_bytes, "face data");
                        if (idx >= out.mesh.vertices.size())
                            throw ParseError(path, at, "vertex index " + std::to_string(idx) +
                                                           " out of range");
                        out.mesh.triangles[i][k] = static_cast<uint32_t>(idx);
                    }
                } else {
                    const long here = line_no + 1;
                    const std::string line = next_line();
                    const std::vector<std::string> tok = split_tokens(line);
                    if (tok.empty()) throw ParseError(path, here, "empty face row");
                    if (tok[0] != "3")
                        throw ParseError(path, here, "non-triangle face (" + tok[0] + " vertices)");
                    if (tok.size() != 4) throw ParseError(path, here, "face row has wrong field count");
                    for (int k = 0; k < 3; ++k) {
                        char* end = nullptr;
                        const unsigned long idx = std::strtoul(tok[k + 1].c_str(), &end, 10);
                        if (end == tok[k + 1].c_str())
                            throw ParseError(path, here, "bad index '" + tok[k + 1] + "'");
                        if (idx >= out.mesh.vertices.size())
                            throw ParseError(path, here, "vertex index " + std::to_string(idx) +
                                                             " out of range");
                        out.mesh.triangles[i][k] = static_cast<uint32_t>(idx);
                    }
                }
            }
        } else {
            throw ParseError(path, line_no, "unsupported PLY element '" + element.name + "'");
        }
    }
    return out;
}

void write_ply(const std::string& path, const TriMesh& mesh, const WriteMeshOptions& options) {
    if (!options.quality.empty() && options.quality.size() != mesh.vertices.size())
        throw Error("write_mesh: quality size does not match vertex count");

    std::string out;
    out += "ply\n";
    out += options.ascii ? "format ascii 1.0\n" : "format binary_little_endian 1.0\n";
    out += "element vertex " + std::to_string(mesh.vertex_count()) + "\n";
    out += "property double x\nproperty double y\nproperty double z\n";
    if (!options.quality.empty()) out += "property double quality\n";
    out += "element face " + std::to_string(mesh.triangle_count()) + "\n";
    out += "property list uchar uint32 vertex_indices\n";
    out += "end_header\n";

    char buf[128];
    if (options.ascii) {
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const Vec3& p = mesh.vertices[i];
            std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g", p.x(), p.y(), p.z());
            out += buf;
            if (!options.quality.empty()) {
                std::snprintf(buf, sizeof buf, " %.17g", options.quality[i]);
                out += buf;
            }
            out += '\n';
        }
        for (const Tri& t : mesh.triangles) {
            std::snprintf(buf, sizeof buf, "3 %u %u %u\n", t[0], t[1], t[2]);
            out += buf;
        }
    } else {
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const Vec3& p = mesh.vertices[i];
            put_f64(out, p.x());
            put_f64(out, p.y());
            put_f64(out, p.z());
            if (!options.quality.empty()) put_f64(out, options.quality[i]);
        }
        for (const Tri& t : mesh.triangles) {
            out.push_back(3);
            for (uint32_t k : t) put_u32(out, k);
        }
    }

    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw Error("write to '" + path + "' failed");
}

// --- OBJ ----------------------------------------------------------------

MeshFileData read_obj(const std::string& path, const std::string& data) {
    MeshFileData out;
    size_t pos = 0;
    long line_no = 0;
    while (pos < data.size()) {
        const size_t eol = data.find('\n', pos);
        const size_t end = eol == std::string::npos ? data.size() : eol;
        std::string line = data.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = end + 1;
        ++line_no;

        const std::vector<std::string> tok = split_tokens(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (tok[0] == "v") {
            if (tok.size() != 4)
                throw ParseError(path, line_no, "vertex line must have exactly 3 coordinates");
            double c[3];
            for (int k = 0; k < 3; ++k) {
                char* endp = nullptr;
                c[k] = std::strtod(tok[k + 1].c_str(), &endp);
                if (endp == tok[k + 1].c_str())
                    throw ParseError(path, line_no, "bad coordinate '" + tok[k + 1] + "'");
            }
            out.mesh.vertices.emplace_back(c[0], c[1], c[2]);
        } else if (tok[0] == "f") {
            if (tok.size() != 4)
                throw ParseError(path, line_no, "non-triangle face (" +
                                                    std::to_string(tok.size() - 1) + " vertices)");
            Tri tri;
            for (int k = 0; k < 3; ++k) {
                char* endp = nullptr;
                const long idx = std::strtol(tok[k + 1].c_str(), &endp, 10);
                if (endp == tok[k + 1].c_str() || (*endp != '\0' && *endp != '/'))
                    throw ParseError(path, line_no, "bad face index '" + tok[k + 1] + "'");
                if (idx < 1) throw ParseError(path, line_no, "face index must be positive");
                if (static_cast<size_t>(idx) > out.mesh.vertices.size())
                    throw ParseError(path, line_no,
                                     "vertex index " + std::to_string(idx) + " out of range");
                tri[k] = static_cast<uint32_t>(idx - 1);
            }
            out.mesh.triangles.push_back(tri);
        }
        // Anything else (vn, vt, g, usemtl, ...) carries no geometry we keep.
    }
    return out;
}

void write_obj(const std::string& path, const TriMesh& mesh) {
    std::string out;
    char buf[128];
    for (const Vec3& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "v %.9g %.9g %.9g\n", p.x(), p.y(), p.z());
        out += buf;
    }
    for (const Tri& t : mesh.triangles) {
        std::snprintf(buf, sizeof buf, "f %u %u %u\n", t[0] + 1, t[1] + 1, t[2] + 1);
        out += buf;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "' for writing");
    file.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!file) throw Error("write to '" + path + "' failed");
}

std::string slurp(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << file.rdbuf();
    return std::move(ss).str();
}

}  // namespace

MeshFileData read_mesh_file(const std::string& path) {
    const std::string data = slurp(path);
    const std::string ext = lower_ext(path);
    MeshFileData out;
    if (ext == "ply") out = read_ply(path, data);
    else if (ext == "obj") out = read_obj(path, data);
    else throw Error("unsupported mesh format '" + ext + "' (expected .ply or .obj)");

    try {
        validate_topology(out.mesh);
        validate_geometry(out.mesh);
    } catch (const Error& err) {
        throw Error(path + ": " + err.what());
    }
    return out;
}

TriMesh read_mesh(const std::string& path) { return read_mesh_file(path).mesh; }

void write_mesh(const std::string& path, const TriMesh& mesh, const WriteMeshOptions& options) {
    validate_topology(mesh);
    const std::string ext = lower_ext(path);
    if (ext == "ply") {
        write_ply(path, mesh, options);
    } else if (ext == "obj") {
        if (!options.quality.empty())
            throw Error("write_mesh: OBJ cannot carry a quality scalar, use PLY");
        write_obj(path, mesh);
    } else {
        throw Error("unsupported mesh format '" + ext + "' (expected .ply or .obj)");
    }
}

}  // namespace sx
