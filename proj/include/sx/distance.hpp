#pragma once

#include <span>
#include <vector>

#include "sx/mesh.hpp"

namespace sx {

struct ErrorStats {
    double rms_surface = 0.0;   // mm
    double max_surface = 0.0;   // mm
    double rms_vertex = 0.0;    // mm
    std::vector<double> per_vertex_surface;  // parallel to the eval region handed in
};

// Closest point on triangle (a,b,c) to p; handles face, edge and vertex cases.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

// Exact minimum distance from p to the surface by scanning every triangle.
// Reference path; the spatial index below must agree with it.
double point_to_mesh_distance(const Vec3& p, const TriMesh& mesh);

// Static axis-aligned BVH over the triangles of one mesh. Branch-and-bound
// closest-triangle queries return the same minimum as the exhaustive scan.
class MeshDistanceIndex {
public:
    explicit MeshDistanceIndex(const TriMesh& mesh);

    double distance(const Vec3& p) const;
    Vec3 closest_point(const Vec3& p) const;

private:
    struct Node {
        Vec3 lo, hi;
        int32_t left = -1;    // child node, or -1 for leaf
        int32_t right = -1;
        uint32_t begin = 0;   // leaf triangle range in order_
        uint32_t end = 0;
    };

    double closest_sq(const Vec3& p, Vec3* point) const;

    const TriMesh* mesh_;
    std::vector<Node> nodes_;
    std::vector<uint32_t> order_;
};

// RMS/max surface deviation (truth vertex to closest point on the estimate
// surface) and RMS vertex error over eval_region. Throws TopologyError on a
// topology mismatch and Error on an empty region. The parallel kernel fills
// per-vertex distances concurrently and reduces in index order, so results
// do not depend on the thread count.
ErrorStats surface_error_stats(const TriMesh& truth, const TriMesh& estimate,
                               std::span<const uint32_t> eval_region);
ErrorStats surface_error_stats_serial(const TriMesh& truth, const TriMesh& estimate,
                                      std::span<const uint32_t> eval_region);

}  // namespace sx
