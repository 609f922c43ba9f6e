#include "sx/mesh.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Geometry>

#include "sx/errors.hpp"

namespace sx {

void validate_topology(const TriMesh& mesh) {
    const uint32_t v = mesh.vertex_count();
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        for (uint32_t k : tri) {
            if (k >= v)
                throw Error("triangle " + std::to_string(t) + " references vertex " +
                            std::to_string(k) + " of " + std::to_string(v));
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw Error("triangle " + std::to_string(t) + " repeats a vertex index");
    }
}

void validate_geometry(const TriMesh& mesh) {
    for (size_t t = 0; t < mesh.triangles.size(); ++t) {
        const Tri& tri = mesh.triangles[t];
        const Vec3 ab = mesh.vertices[tri[1]] - mesh.vertices[tri[0]];
        const Vec3 ac = mesh.vertices[tri[2]] - mesh.vertices[tri[0]];
        if (ab.cross(ac).squaredNorm() == 0.0)
            throw Error("triangle " + std::to_string(t) + " has zero area");
    }
}

bool same_topology(const TriMesh& a, const TriMesh& b) {
    return a.vertex_count() == b.vertex_count() && a.triangles == b.triangles;
}

Eigen::VectorXd flatten(const TriMesh& mesh) {
    Eigen::VectorXd out(3 * static_cast<Eigen::Index>(mesh.vertices.size()));
    for (size_t i = 0; i < mesh.vertices.size(); ++i) out.segment<3>(3 * i) = mesh.vertices[i];
    return out;
}

void set_from_flat(TriMesh& mesh, const Eigen::VectorXd& coords) {
    mesh.vertices.resize(static_cast<size_t>(coords.size() / 3));
    for (size_t i = 0; i < mesh.vertices.size(); ++i) mesh.vertices[i] = coords.segment<3>(3 * i);
}

double bounding_diameter(const TriMesh& mesh) {
    if (mesh.vertices.empty()) return 0.0;
    Vec3 lo = mesh.vertices.front(), hi = lo;
    for (const Vec3& p : mesh.vertices) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
}

VertexAdjacency::VertexAdjacency(const TriMesh& mesh) {
    validate_topology(mesh);
    const uint32_t v = mesh.vertex_count();
    std::vector<std::pair<uint32_t, uint32_t>> edges;
    edges.reserve(mesh.triangles.size() * 6);
    for (const Tri& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            uint32_t a = tri[k], b = tri[(k + 1) % 3];
            edges.emplace_back(a, b);
            edges.emplace_back(b, a);
        }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    offsets_.assign(v + 1, 0);
    for (const auto& e : edges) ++offsets_[e.first + 1];
    for (uint32_t i = 0; i < v; ++i) offsets_[i + 1] += offsets_[i];
    flat_.resize(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) flat_[i] = edges[i].second;
}

}  // namespace sx
