#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sx/mesh.hpp"

namespace sx {

// Mesh file formats: PLY (ASCII or binary little-endian; canonical format,
// carries an optional per-vertex "quality" scalar) and OBJ (ASCII,
// triangles only, 9 significant digits). Binary PLY round-trips vertex
// coordinates bit-exactly. Parsers throw ParseError with the offending
// line/offset and never return a partial mesh.

struct MeshFileData {
    TriMesh mesh;
    std::vector<double> quality;  // empty when the file has none
};

MeshFileData read_mesh_file(const std::string& path);
TriMesh read_mesh(const std::string& path);

struct WriteMeshOptions {
    bool ascii = false;                       // PLY only; OBJ is always ASCII
    std::span<const double> quality = {};     // PLY only; size must match vertices
};

// Format picked from the extension: .ply or .obj.
void write_mesh(const std::string& path, const TriMesh& mesh, const WriteMeshOptions& options = {});

}  // namespace sx
