#include "sx/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sx/errors.hpp"
#include "sx/util.hpp"

namespace sx {

// Region-based closest point on a triangle (Ericson, Real-Time Collision
// Detection, 5.1.5).
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return a + (d1 / (d1 - d3)) * ab;

    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return a + (d2 / (d2 - d6)) * ac;

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
        return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);

    const double denom = 1.0 / (va + vb + vc);
    return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_to_mesh_distance(const Vec3& p, const TriMesh& mesh) {
    if (mesh.triangles.empty()) throw Error("distance query on an empty mesh");
    double best = std::numeric_limits<double>::infinity();
    for (const Tri& t : mesh.triangles) {
        const Vec3 q = closest_point_on_triangle(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                 mesh.vertices[t[2]]);
        best = std::min(best, (p - q).squaredNorm());
    }
    return std::sqrt(best);
}

namespace {

double sq_dist_to_box(const Vec3& p, const Vec3& lo, const Vec3& hi) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) {
        double e = 0.0;
        if (p[k] < lo[k]) e = lo[k] - p[k];
        else if (p[k] > hi[k]) e = p[k] - hi[k];
        d += e * e;
    }
    return d;
}

constexpr uint32_t kLeafSize = 4;

}  // namespace

MeshDistanceIndex::MeshDistanceIndex(const TriMesh& mesh) : mesh_(&mesh) {
    if (mesh.triangles.empty()) throw Error("distance index over an empty mesh");
    const uint32_t t = mesh.triangle_count();
    order_.resize(t);
    std::iota(order_.begin(), order_.end(), 0u);

    std::vector<Vec3> centroids(t);
    for (uint32_t i = 0; i < t; ++i) {
        const Tri& tri = mesh.triangles[i];
        centroids[i] =
            (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]) / 3.0;
    }

    struct Range {
        uint32_t begin, end;
        int32_t node;
    };
    nodes_.reserve(2 * t / kLeafSize + 2);
    nodes_.push_back({});
    std::vector<Range> stack{{0, t, 0}};
    while (!stack.empty()) {
        auto [begin, end, node_idx] = stack.back();
        stack.pop_back();

        Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
        Vec3 hi = -lo;
        for (uint32_t i = begin; i < end; ++i) {
            const Tri& tri = mesh.triangles[order_[i]];
            for (uint32_t v : tri) {
                lo = lo.cwiseMin(mesh.vertices[v]);
                hi = hi.cwiseMax(mesh.vertices[v]);
            }
        }
        Node& node = nodes_[node_idx];
        node.lo = lo;
        node.hi = hi;
        if (end - begin <= kLeafSize) {
            node.begin = begin;
            node.end = end;
            continue;
        }

        int axis = 0;
        const Vec3 extent = hi - lo;
        if (extent[1] > extent[axis]) axis = 1;
        if (extent[2] > extent[axis]) axis = 2;
        const uint32_t mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](uint32_t a, uint32_t b) { return centroids[a][axis] < centroids[b][axis]; });

        const int32_t left = static_cast<int32_t>(nodes_.size());
        nodes_.push_back({});
        nodes_.push_back({});
        nodes_[node_idx].left = left;
        nodes_[node_idx].right = left + 1;
        stack.push_back({begin, mid, left});
        stack.push_back({mid, end, left + 1});
    }
}

double MeshDistanceIndex::closest_sq(const Vec3& p, Vec3* point) const {
    double best = std::numeric_limits<double>::infinity();
    Vec3 best_point = Vec3::Zero();

    struct Entry {
        double bound;
        int32_t node;
    };
    Entry stack[64];
    int top = 0;
    stack[top++] = {sq_dist_to_box(p, nodes_[0].lo, nodes_[0].hi), 0};
    while (top > 0) {
        const Entry e = stack[--top];
        if (e.bound >= best) continue;
        const Node& node = nodes_[e.node];
        if (node.left < 0) {
            for (uint32_t i = node.begin; i < node.end; ++i) {
                const Tri& tri = mesh_->triangles[order_[i]];
                const Vec3 q = closest_point_on_triangle(p, mesh_->vertices[tri[0]],
                                                         mesh_->vertices[tri[1]],
                                                         mesh_->vertices[tri[2]]);
                const double d = (p - q).squaredNorm();
                if (d < best) {
                    best = d;
                    best_point = q;
                }
            }
            continue;
        }
        Entry l{sq_dist_to_box(p, nodes_[node.left].lo, nodes_[node.left].hi), node.left};
        Entry r{sq_dist_to_box(p, nodes_[node.right].lo, nodes_[node.right].hi), node.right};
        if (l.bound > r.bound) std::swap(l, r);  // near child popped first
        stack[top++] = r;
        stack[top++] = l;
    }
    if (point) *point = best_point;
    return best;
}

double MeshDistanceIndex::distance(const Vec3& p) const { return std::sqrt(closest_sq(p, nullptr)); }

Vec3 MeshDistanceIndex::closest_point(const Vec3& p) const {
    Vec3 q;
    closest_sq(p, &q);
    return q;
}

namespace {

ErrorStats finish_stats(const TriMesh& truth, const TriMesh& estimate,
                        std::span<const uint32_t> eval_region, std::vector<double> surface) {
    ErrorStats stats;
    stats.per_vertex_surface = std::move(surface);
    double ss_surface = 0.0, ss_vertex = 0.0, max_surface = 0.0;
    for (size_t i = 0; i < eval_region.size(); ++i) {
        const double ds = stats.per_vertex_surface[i];
        ss_surface += ds * ds;
        max_surface = std::max(max_surface, ds);
        const uint32_t v = eval_region[i];
        ss_vertex += (truth.vertices[v] - estimate.vertices[v]).squaredNorm();
    }
    const double n = static_cast<double>(eval_region.size());
    stats.rms_surface = std::sqrt(ss_surface / n);
    stats.max_surface = max_surface;
    stats.rms_vertex = std::sqrt(ss_vertex / n);
    return stats;
}

void check_stats_inputs(const TriMesh& truth, const TriMesh& estimate,
                        std::span<const uint32_t> eval_region) {
    if (!same_topology(truth, estimate))
        throw TopologyError("surface_error_stats: truth and estimate topology mismatch");
    if (eval_region.empty()) throw Error("surface_error_stats: empty eval region");
    for (uint32_t v : eval_region)
        if (v >= truth.vertex_count()) throw Error("surface_error_stats: region index out of range");
}

}  // namespace

ErrorStats surface_error_stats(const TriMesh& truth, const TriMesh& estimate,
                               std::span<const uint32_t> eval_region) {
    check_stats_inputs(truth, estimate, eval_region);
    const MeshDistanceIndex index(estimate);
    std::vector<double> surface(eval_region.size());
    const int64_t n = static_cast<int64_t>(eval_region.size());
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < n; ++i) surface[i] = index.distance(truth.vertices[eval_region[i]]);
    return finish_stats(truth, estimate, eval_region, std::move(surface));
}

ErrorStats surface_error_stats_serial(const TriMesh& truth, const TriMesh& estimate,
                                      std::span<const uint32_t> eval_region) {
    check_stats_inputs(truth, estimate, eval_region);
    const MeshDistanceIndex index(estimate);
    std::vector<double> surface(eval_region.size());
    for (size_t i = 0; i < eval_region.size(); ++i)
        surface[i] = index.distance(truth.vertices[eval_region[i]]);
    return finish_stats(truth, estimate, eval_region, std::move(surface));
}

}  // namespace sx
