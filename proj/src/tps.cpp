#include "sx/tps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "sx/errors.hpp"
#include "sx/util.hpp"

namespace sx {

namespace {

inline double kernel_value(TpsKernel kernel, double r) {
    if (kernel == TpsKernel::r) return r;
    return r > 0.0 ? r * r * std::log(r) : 0.0;
}

void check_for_duplicates(std::span<const Vec3> sources) {
    std::vector<uint32_t> order(sources.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        const Vec3 &p = sources[a], &q = sources[b];
        if (p.x() != q.x()) return p.x() < q.x();
        if (p.y() != q.y()) return p.y() < q.y();
        return p.z() < q.z();
    });
    for (size_t i = 1; i < order.size(); ++i)
        if (sources[order[i - 1]] == sources[order[i]])
            throw Error("tps: singular system, duplicate source points (indices " +
                        std::to_string(order[i - 1]) + ", " + std::to_string(order[i]) + ")");
}

bool sources_coplanar(std::span<const Vec3> sources) {
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : sources) centroid += p;
    centroid /= static_cast<double>(sources.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (const Vec3& p : sources) {
        const Vec3 d = p - centroid;
        scatter += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
    return eig.eigenvalues()(0) <= 1e-24 * eig.eigenvalues()(2);
}

}  // namespace

Vec3 TpsModel::operator()(const Vec3& q) const {
    Vec3 out = affine_linear * q + affine_translation;
    for (size_t i = 0; i < control_points.size(); ++i)
        out += weights[i] * kernel_value(kernel, (q - control_points[i]).norm());
    return out;
}

TpsModel build_tps(std::span<const Vec3> sources, std::span<const Vec3> targets,
                   const TpsBuildOptions& options) {
    const Eigen::Index n = static_cast<Eigen::Index>(sources.size());
    if (sources.size() != targets.size()) throw Error("tps: source/target count mismatch");
    if (n < 5) throw Error("tps: need at least 5 correspondences, got " + std::to_string(n));
    check_for_duplicates(sources);

    // Bookstein system: [[K + reg I, P], [P^T, 0]] [w; a] = [targets; 0],
    // with K_ij = U(|c_i - c_j|) and P rows (1, x, y, z).
    const Eigen::Index dim = n + 4;
    Eigen::MatrixXd system = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double u = kernel_value(options.kernel, (sources[i] - sources[j]).norm());
            system(i, j) = u;
            system(j, i) = u;
        }
        system(i, i) = options.regularization;
        system(i, n) = 1.0;
        system(n, i) = 1.0;
        system.block<3, 1>(n + 1, i) = sources[i];
        system.block<1, 3>(i, n + 1) = sources[i].transpose();
    }

    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(dim, 3);
    for (Eigen::Index i = 0; i < n; ++i) rhs.row(i) = targets[i].transpose();

    const auto report_rank_failure = [&]() {
        if (sources_coplanar(sources))
            throw DegenerateError("tps: rank-deficient system, sources are coplanar");
        throw DegenerateError("tps: rank-deficient system");
    };

    Eigen::MatrixXd solution(dim, 3);
    if (options.independent_solves) {
        // One factorization per coordinate, run concurrently; mirrors the
        // three-dense-systems formulation for runtime studies.
        bool deficient = false;
#pragma omp parallel for schedule(static) num_threads(std::min(3, max_threads()))
        for (int c = 0; c < 3; ++c) {
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
            qr.setThreshold(1e-12);
            if (qr.rank() < dim) {
#pragma omp atomic write
                deficient = true;
            } else {
                solution.col(c) = qr.solve(rhs.col(c));
            }
        }
        if (deficient) report_rank_failure();
    } else {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(system);
        qr.setThreshold(1e-12);
        if (qr.rank() < dim) report_rank_failure();
        solution = qr.solve(rhs);
    }

    TpsModel model;
    model.kernel = options.kernel;
    model.control_points.assign(sources.begin(), sources.end());
    model.weights.resize(sources.size());
    for (Eigen::Index i = 0; i < n; ++i) model.weights[i] = solution.row(i).transpose();
    model.affine_translation = solution.row(n).transpose();
    model.affine_linear = solution.bottomRows(3).transpose();
    return model;
}

std::vector<Vec3> evaluate_tps(const TpsModel& model, std::span<const Vec3> queries) {
    std::vector<Vec3> out(queries.size());
    const int64_t n = static_cast<int64_t>(queries.size());
#pragma omp parallel for schedule(static) num_threads(max_threads())
    for (int64_t i = 0; i < n; ++i) out[i] = model(queries[i]);
    return out;
}

std::vector<Vec3> evaluate_tps_serial(const TpsModel& model, std::span<const Vec3> queries) {
    std::vector<Vec3> out(queries.size());
    for (size_t i = 0; i < queries.size(); ++i) out[i] = model(queries[i]);
    return out;
}

}  // namespace sx
