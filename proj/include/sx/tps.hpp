#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sx/mesh.hpp"

namespace sx {

enum class TpsKernel {
    r,         // biharmonic kernel in 3-D, U(r) = r (default)
    r2_log_r,  // planar kernel U(r) = r^2 log r, kept for ablation
};

// 3-D thin-plate-spline map f(x) = A x + b + sum_i w_i U(|x - c_i|).
// The weights satisfy sum w_i = 0 and sum w_i c_i^T = 0, which kills the
// radial far field so the affine part dominates away from the controls.
struct TpsModel {
    std::vector<Vec3> control_points;
    Eigen::Matrix3d affine_linear = Eigen::Matrix3d::Identity();
    Vec3 affine_translation = Vec3::Zero();
    std::vector<Vec3> weights;
    TpsKernel kernel = TpsKernel::r;

    Vec3 operator()(const Vec3& q) const;
};

struct TpsBuildOptions {
    TpsKernel kernel = TpsKernel::r;
    double regularization = 0.0;     // added to the kernel diagonal
    bool independent_solves = false; // factor once per coordinate instead of sharing
};

// Assembles and solves the (N+4)x(N+4) interpolation system
//   [[K + reg*I, P], [P^T, 0]] [w; a] = [targets; 0]
// once per coordinate (one pivoted-QR factorization, three right-hand
// sides, unless independent_solves asks for three factorizations).
// With regularization 0 the map interpolates the targets exactly.
// Throws Error on duplicate sources, DegenerateError when the system is
// rank deficient (e.g. coplanar sources).
TpsModel build_tps(std::span<const Vec3> sources, std::span<const Vec3> targets,
                   const TpsBuildOptions& options = {});

// Pure map over the queries; outputs keep the input order and each query is
// summed in control order, so values match the serial kernel bit for bit.
std::vector<Vec3> evaluate_tps(const TpsModel& model, std::span<const Vec3> queries);
std::vector<Vec3> evaluate_tps_serial(const TpsModel& model, std::span<const Vec3> queries);

}  // namespace sx
