#include "sx/similarity.hpp"

#include <Eigen/Dense>

#include "sx/errors.hpp"

namespace sx {

SimilarityTransform SimilarityTransform::inverse() const {
    SimilarityTransform inv;
    inv.scale = 1.0 / scale;
    inv.rotation = rotation.transpose();
    inv.translation = -inv.scale * (inv.rotation * translation);
    return inv;
}

SimilarityTransform operator*(const SimilarityTransform& a, const SimilarityTransform& b) {
    SimilarityTransform out;
    out.scale = a.scale * b.scale;
    out.rotation = a.rotation * b.rotation;
    out.translation = a.scale * (a.rotation * b.translation) + a.translation;
    return out;
}

TriMesh transformed(const TriMesh& mesh, const SimilarityTransform& t) {
    TriMesh out;
    out.triangles = mesh.triangles;
    out.vertices.resize(mesh.vertices.size());
    for (size_t i = 0; i < mesh.vertices.size(); ++i) out.vertices[i] = t(mesh.vertices[i]);
    return out;
}

SimilarityTransform procrustes_align(std::span<const Vec3> moving, std::span<const Vec3> fixed) {
    if (moving.size() != fixed.size()) throw Error("procrustes: point count mismatch");
    const size_t n = moving.size();
    if (n < 3) throw DegenerateError("procrustes: need at least 3 correspondences");

    Vec3 mc = Vec3::Zero(), fc = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) {
        mc += moving[i];
        fc += fixed[i];
    }
    mc /= static_cast<double>(n);
    fc /= static_cast<double>(n);

    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();  // cross-covariance fixed * moving^T
    double var_m = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const Vec3 m = moving[i] - mc, f = fixed[i] - fc;
        sigma += f * m.transpose();
        var_m += m.squaredNorm();
    }
    sigma /= static_cast<double>(n);
    var_m /= static_cast<double>(n);
    if (var_m == 0.0) throw DegenerateError("procrustes: moving points coincide");

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    // Rank < 2 leaves the rotation about the point axis undetermined.
    if (sv(1) <= 1e-12 * sv(0))
        throw DegenerateError("procrustes: degenerate (collinear) correspondence set");

    Eigen::Vector3d correction = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) correction(2) = -1.0;

    SimilarityTransform t;
    t.rotation = svd.matrixU() * correction.asDiagonal() * svd.matrixV().transpose();
    t.scale = sv.dot(correction) / var_m;
    if (!(t.scale > 0.0)) throw DegenerateError("procrustes: nonpositive optimal scale");
    t.translation = fc - t.scale * (t.rotation * mc);
    return t;
}

SimilarityTransform procrustes_align(const TriMesh& moving, const TriMesh& fixed,
                                     std::span<const uint32_t> vertex_subset) {
    if (moving.vertex_count() != fixed.vertex_count())
        throw TopologyError("procrustes: vertex count mismatch");
    std::vector<Vec3> m, f;
    m.reserve(vertex_subset.size());
    f.reserve(vertex_subset.size());
    for (uint32_t v : vertex_subset) {
        if (v >= moving.vertex_count()) throw Error("procrustes: subset index out of range");
        m.push_back(moving.vertices[v]);
        f.push_back(fixed.vertices[v]);
    }
    return procrustes_align(m, f);
}

double procrustes_residual(std::span<const Vec3> moving, std::span<const Vec3> fixed,
                           const SimilarityTransform& t) {
    double ss = 0.0;
    for (size_t i = 0; i < moving.size(); ++i) ss += (t(moving[i]) - fixed[i]).squaredNorm();
    return ss;
}

}  // namespace sx
