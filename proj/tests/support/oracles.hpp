#pragma once

// Test-only reference implementations. Each one deliberately takes a
// different route than the library code it checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "sx/mesh.hpp"

namespace oracle {

// Adjacency by scanning every triangle for every vertex.
inline std::vector<std::set<uint32_t>> adjacency(const sx::TriMesh& mesh) {
    std::vector<std::set<uint32_t>> adj(mesh.vertex_count());
    for (uint32_t v = 0; v < mesh.vertex_count(); ++v) {
        for (const sx::Tri& t : mesh.triangles) {
            if (t[0] == v || t[1] == v || t[2] == v) {
                for (uint32_t k : t)
                    if (k != v) adj[v].insert(k);
            }
        }
    }
    return adj;
}

// Band depths by explicit level sets. Returns -2 for unknown vertices and
// -1 for known vertices outside the band.
inline std::vector<int64_t> band_depths(const std::vector<std::set<uint32_t>>& adj,
                                        const std::set<uint32_t>& unknown, uint32_t max_depth) {
    std::vector<int64_t> depth(adj.size(), -1);
    for (uint32_t u : unknown) depth[u] = -2;

    std::set<uint32_t> level;
    for (uint32_t u : unknown)
        for (uint32_t n : adj[u])
            if (depth[n] == -1) level.insert(n);
    int64_t d = 0;
    while (!level.empty() && d <= static_cast<int64_t>(max_depth)) {
        std::set<uint32_t> next;
        for (uint32_t v : level) depth[v] = d;
        for (uint32_t v : level)
            for (uint32_t n : adj[v])
                if (depth[n] == -1) next.insert(n);
        level = std::move(next);
        ++d;
    }
    return depth;
}

// Closest point on a triangle via plane projection plus per-edge clamping,
// all candidates compared; independent of the region-based library version.
inline double point_triangle_distance(const sx::Vec3& p, const sx::Vec3& a, const sx::Vec3& b,
                                      const sx::Vec3& c) {
    const auto segment_sq = [&](const sx::Vec3& s, const sx::Vec3& e) {
        const sx::Vec3 d = e - s;
        const double len_sq = d.squaredNorm();
        double t = len_sq > 0.0 ? (p - s).dot(d) / len_sq : 0.0;
        t = std::clamp(t, 0.0, 1.0);
        return (p - (s + t * d)).squaredNorm();
    };
    double best = std::min({segment_sq(a, b), segment_sq(b, c), segment_sq(c, a)});

    const sx::Vec3 n = (b - a).cross(c - a);
    const double nn = n.squaredNorm();
    if (nn > 0.0) {
        const sx::Vec3 proj = p - n * ((p - a).dot(n) / nn);
        // Barycentric test of the projected point.
        const sx::Vec3 v0 = b - a, v1 = c - a, v2 = proj - a;
        const double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
        const double d20 = v2.dot(v0), d21 = v2.dot(v1);
        const double denom = d00 * d11 - d01 * d01;
        if (denom > 0.0) {
            const double beta = (d11 * d20 - d01 * d21) / denom;
            const double gamma = (d00 * d21 - d01 * d20) / denom;
            if (beta >= 0.0 && gamma >= 0.0 && beta + gamma <= 1.0)
                best = std::min(best, (p - proj).squaredNorm());
        }
    }
    return std::sqrt(best);
}

inline double point_mesh_distance(const sx::Vec3& p, const sx::TriMesh& mesh) {
    double best = std::numeric_limits<double>::infinity();
    for (const sx::Tri& t : mesh.triangles)
        best = std::min(best, point_triangle_distance(p, mesh.vertices[t[0]], mesh.vertices[t[1]],
                                                      mesh.vertices[t[2]]));
    return best;
}

// Dense solve by Gaussian elimination with partial pivoting.
inline std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const size_t n = a.size();
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        const double diag = a[col][col];
        for (size_t r = col + 1; r < n; ++r) {
            const double factor = a[r][col] / diag;
            if (factor == 0.0) continue;
            for (size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (size_t c = ri + 1; c < n; ++c) acc -= a[ri][c] * x[c];
        x[ri] = acc / a[ri][ri];
    }
    return x;
}

// Derivative-free compass search with step halving.
inline double compass_search(const std::function<double(const Eigen::VectorXd&)>& f,
                             Eigen::VectorXd& x, double step, double min_step) {
    double fx = f(x);
    while (step > min_step) {
        bool improved = false;
        for (Eigen::Index i = 0; i < x.size() && !improved; ++i) {
            for (double dir : {1.0, -1.0}) {
                Eigen::VectorXd y = x;
                y(i) += dir * step;
                const double fy = f(y);
                if (fy < fx) {
                    x = y;
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return fx;
}

// Degree-d polynomial least squares via normal equations on small systems.
inline std::vector<double> poly_fit(const std::vector<double>& xs, const std::vector<double>& ys,
                                    int degree) {
    const int m = degree + 1;
    std::vector<std::vector<double>> ata(m, std::vector<double>(m, 0.0));
    std::vector<double> atb(m, 0.0);
    for (size_t i = 0; i < xs.size(); ++i) {
        std::vector<double> row(m);
        double p = 1.0;
        for (int c = 0; c < m; ++c) {
            row[c] = p;
            p *= xs[i];
        }
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) ata[r][c] += row[r] * row[c];
            atb[r] += row[r] * ys[i];
        }
    }
    return gauss_solve(ata, atb);
}

}  // namespace oracle
