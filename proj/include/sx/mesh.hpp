#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace sx {

using Vec3 = Eigen::Vector3d;
using Tri = std::array<uint32_t, 3>;

// Fixed-topology triangle surface; positions in mm. Meshes produced from one
// template share the triangle list verbatim, so vertex i refers to the same
// surface location on every mesh of a corpus.
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Tri> triangles;

    uint32_t vertex_count() const { return static_cast<uint32_t>(vertices.size()); }
    uint32_t triangle_count() const { return static_cast<uint32_t>(triangles.size()); }
};

// Throws Error if a triangle references a missing vertex or repeats an index.
void validate_topology(const TriMesh& mesh);

// Throws Error on exactly zero-area triangles. Applied when loading meshes
// from disk; in-memory results are never re-checked.
void validate_geometry(const TriMesh& mesh);

bool same_topology(const TriMesh& a, const TriMesh& b);

// Stacked (x0,y0,z0,x1,...) coordinate vector of length 3V.
Eigen::VectorXd flatten(const TriMesh& mesh);
void set_from_flat(TriMesh& mesh, const Eigen::VectorXd& coords);

double bounding_diameter(const TriMesh& mesh);

// Compressed neighbor lists; (a,b) are neighbors iff some triangle contains
// both. Lists are sorted and duplicate-free.
class VertexAdjacency {
public:
    VertexAdjacency() = default;
    explicit VertexAdjacency(const TriMesh& mesh);

    std::span<const uint32_t> neighbors(uint32_t v) const {
        return {flat_.data() + offsets_[v], flat_.data() + offsets_[v + 1]};
    }
    uint32_t vertex_count() const {
        return offsets_.empty() ? 0 : static_cast<uint32_t>(offsets_.size() - 1);
    }

private:
    std::vector<uint32_t> offsets_;
    std::vector<uint32_t> flat_;
};

inline VertexAdjacency build_adjacency(const TriMesh& mesh) { return VertexAdjacency(mesh); }

}  // namespace sx
