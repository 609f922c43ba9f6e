#pragma once

#include <span>

#include <Eigen/Core>

#include "sx/mesh.hpp"

namespace sx {

// Scale * rotation + translation, with det(rotation) = +1.
struct SimilarityTransform {
    double scale = 1.0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 operator()(const Vec3& p) const { return scale * (rotation * p) + translation; }
    SimilarityTransform inverse() const;
};

// (a * b)(x) == a(b(x))
SimilarityTransform operator*(const SimilarityTransform& a, const SimilarityTransform& b);

TriMesh transformed(const TriMesh& mesh, const SimilarityTransform& t);

// Closed-form least-squares similarity mapping `moving` onto `fixed`
// (Umeyama/Kabsch with determinant correction, reflections excluded).
// Throws DegenerateError for fewer than 3 points or a collinear set.
SimilarityTransform procrustes_align(std::span<const Vec3> moving, std::span<const Vec3> fixed);

// Same, restricted to a vertex subset of two topologically consistent meshes.
SimilarityTransform procrustes_align(const TriMesh& moving, const TriMesh& fixed,
                                     std::span<const uint32_t> vertex_subset);

double procrustes_residual(std::span<const Vec3> moving, std::span<const Vec3> fixed,
                           const SimilarityTransform& t);

}  // namespace sx
