#include "sx/ssm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "sx/errors.hpp"

namespace sx {

namespace {

// Gauge used throughout GPA: centroid at the origin, unit centroid size
// (Frobenius norm of the centered configuration).
void normalize_shape(TriMesh& mesh) {
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& p : mesh.vertices) centroid += p;
    centroid /= static_cast<double>(mesh.vertices.size());
    double size_sq = 0.0;
    for (Vec3& p : mesh.vertices) {
        p -= centroid;
        size_sq += p.squaredNorm();
    }
    const double size = std::sqrt(size_sq);
    if (size == 0.0) throw DegenerateError("gpa: shape collapses to a point");
    for (Vec3& p : mesh.vertices) p /= size;
}

std::vector<uint32_t> all_vertex_indices(uint32_t count) {
    std::vector<uint32_t> idx(count);
    std::iota(idx.begin(), idx.end(), 0u);
    return idx;
}

double rms_vertex_distance(const TriMesh& a, const TriMesh& b) {
    double ss = 0.0;
    for (size_t i = 0; i < a.vertices.size(); ++i)
        ss += (a.vertices[i] - b.vertices[i]).squaredNorm();
    return std::sqrt(ss / static_cast<double>(a.vertices.size()));
}

void check_consistent(std::span<const TriMesh> corpus) {
    for (size_t i = 1; i < corpus.size(); ++i)
        if (!same_topology(corpus[0], corpus[i]))
            throw TopologyError("corpus meshes are not topologically consistent (mesh " +
                                std::to_string(i) + ")");
}

}  // namespace

TriMesh ShapeModel::mean_mesh() const {
    TriMesh mesh;
    mesh.triangles = topology;
    set_from_flat(mesh, mean);
    return mesh;
}

namespace {

// Least-squares similarity alignment followed by the tangent-space scale
// correction: the copy is rescaled so <a, mean> = |mean|^2. Plain Procrustes
// scale satisfies <a - mean, a> = 0 instead, which shrinks the average of
// the aligned copies below the mean and leaves every projection residual
// with a spurious component along the mean. With the correction the
// arithmetic mean of the aligned corpus sits exactly on the gauge at the
// GPA fixed point, making training-shape projection exact.
TriMesh tangent_align(const TriMesh& shape, const TriMesh& mean,
                      std::span<const uint32_t> subset) {
    TriMesh aligned = transformed(shape, procrustes_align(shape, mean, subset));
    double num = 0.0, den = 0.0;
    for (size_t v = 0; v < mean.vertices.size(); ++v) {
        num += mean.vertices[v].squaredNorm();
        den += aligned.vertices[v].dot(mean.vertices[v]);
    }
    if (!(den > 0.0)) throw DegenerateError("gpa: aligned shape is orthogonal to the mean");
    const double factor = num / den;
    for (Vec3& p : aligned.vertices) p *= factor;
    return aligned;
}

}  // namespace

GpaResult generalized_procrustes(std::span<const TriMesh> corpus, double tol, int max_iters) {
    if (corpus.size() < 2) throw Error("gpa: need at least 2 meshes");
    check_consistent(corpus);
    const auto subset = all_vertex_indices(corpus[0].vertex_count());

    GpaResult result;
    result.mean = corpus[0];
    normalize_shape(result.mean);

    const auto align_all = [&](const TriMesh& mean) {
        std::vector<TriMesh> aligned;
        aligned.reserve(corpus.size());
        for (const TriMesh& shape : corpus) aligned.push_back(tangent_align(shape, mean, subset));
        return aligned;
    };

    for (int iter = 0; iter < max_iters; ++iter) {
        const std::vector<TriMesh> aligned = align_all(result.mean);
        TriMesh new_mean = result.mean;
        for (size_t v = 0; v < new_mean.vertices.size(); ++v) {
            Vec3 acc = Vec3::Zero();
            for (const TriMesh& shape : aligned) acc += shape.vertices[v];
            new_mean.vertices[v] = acc / static_cast<double>(aligned.size());
        }
        normalize_shape(new_mean);
        result.mean_movement = rms_vertex_distance(new_mean, result.mean);
        result.mean = std::move(new_mean);
        result.iterations = iter + 1;
        if (result.mean_movement < tol) break;
    }
    result.aligned = align_all(result.mean);
    return result;
}

ShapeModel build_ssm(std::span<const TriMesh> aligned_corpus) {
    if (aligned_corpus.size() < 2) throw Error("build_ssm: need at least 2 samples");
    check_consistent(aligned_corpus);

    const Eigen::Index dim = 3 * static_cast<Eigen::Index>(aligned_corpus[0].vertex_count());
    const Eigen::Index samples = static_cast<Eigen::Index>(aligned_corpus.size());
    Eigen::MatrixXd data(dim, samples);
    for (Eigen::Index s = 0; s < samples; ++s) data.col(s) = flatten(aligned_corpus[s]);

    ShapeModel model;
    model.topology = aligned_corpus[0].triangles;
    model.sample_count = static_cast<uint32_t>(samples);
    model.mean = data.rowwise().mean();
    data.colwise() -= model.mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(data, Eigen::ComputeThinU);
    const Eigen::VectorXd sv = svd.singularValues();

    // Centered data has rank at most samples-1; the relative threshold drops
    // directions contributed only by duplicated shapes, the absolute floor
    // (vs the shape scale) drops pure roundoff when the corpus has no
    // variation at all.
    Eigen::Index keep = 0;
    const Eigen::Index cap = samples - 1;
    const double floor_sv = 1e-12 * std::max(model.mean.norm(), 1e-300);
    while (keep < cap && sv(keep) > 1e-10 * sv(0) && sv(keep) > floor_sv) ++keep;

    model.modes = svd.matrixU().leftCols(keep);
    model.mode_stddevs =
        sv.head(keep) / std::sqrt(static_cast<double>(model.sample_count - 1));
    return model;
}

ProjectionResult project(const TriMesh& partial, std::span<const uint32_t> known,
                         const ShapeModel& model, const ProjectOptions& options) {
    if (partial.vertex_count() != model.vertex_count())
        throw TopologyError("project: mesh does not match the model vertex count");
    int num_modes = options.num_modes < 0 ? model.num_modes() : options.num_modes;
    if (num_modes > model.num_modes())
        throw Error("project: requested " + std::to_string(num_modes) + " modes, model has " +
                    std::to_string(model.num_modes()));

    const TriMesh mean_mesh = model.mean_mesh();
    SimilarityTransform t = procrustes_align(partial, mean_mesh, known);

    // Tangent-space scale correction over the known rows, mirroring the
    // alignment rule the corpus was built with; without it training shapes
    // would not reproduce exactly under full-mode projection.
    {
        double num = 0.0, den = 0.0;
        for (uint32_t v : known) {
            num += mean_mesh.vertices[v].squaredNorm();
            den += t(partial.vertices[v]).dot(mean_mesh.vertices[v]);
        }
        if (!(den > 0.0))
            throw DegenerateError("project: known region aligns orthogonally to the mean");
        const double factor = num / den;
        t.scale *= factor;
        t.translation *= factor;
    }

    // Residual of the aligned shape against the mean. Unknown rows stay at
    // the mean (zero residual) so only known vertices drive the
    // coefficients; strict_zero_fill reproduces the literal zero-fill
    // reading instead.
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(model.mean.size());
    if (options.strict_zero_fill) residual = -model.mean;
    std::vector<uint8_t> is_known(partial.vertex_count(), 0);
    for (uint32_t v : known) is_known[v] = 1;
    for (uint32_t v = 0; v < partial.vertex_count(); ++v) {
        if (!is_known[v]) continue;
        residual.segment<3>(3 * v) = t(partial.vertices[v]) - model.mean.segment<3>(3 * v);
    }

    ProjectionResult result;
    result.transform = t;
    result.coefficients = model.modes.leftCols(num_modes).transpose() * residual;
    const Eigen::VectorXd recon =
        model.mean + model.modes.leftCols(num_modes) * result.coefficients;

    result.instance.triangles = model.topology;
    set_from_flat(result.instance, recon);
    const SimilarityTransform back = t.inverse();
    for (Vec3& p : result.instance.vertices) p = back(p);
    return result;
}

ProjectionResult project(const TriMesh& shape, const ShapeModel& model,
                         const ProjectOptions& options) {
    const auto all = all_vertex_indices(shape.vertex_count());
    return project(shape, all, model, options);
}

std::vector<ModeSweepEntry> loo_generalization(std::span<const TriMesh> corpus,
                                               std::span<const int> mode_counts,
                                               double gpa_tol, int gpa_max_iters) {
    if (corpus.size() < 3) throw Error("loo_generalization: need at least 3 meshes");
    check_consistent(corpus);
    const auto all = all_vertex_indices(corpus[0].vertex_count());

    std::vector<ModeSweepEntry> table(mode_counts.size());
    for (size_t k = 0; k < mode_counts.size(); ++k) table[k].mode_count = mode_counts[k];

    for (size_t leave = 0; leave < corpus.size(); ++leave) {
        std::vector<TriMesh> rest;
        rest.reserve(corpus.size() - 1);
        for (size_t i = 0; i < corpus.size(); ++i)
            if (i != leave) rest.push_back(corpus[i]);
        const GpaResult gpa = generalized_procrustes(rest, gpa_tol, gpa_max_iters);
        const ShapeModel model = build_ssm(gpa.aligned);

        for (auto& entry : table) {
            ProjectOptions options;
            options.num_modes = std::min(entry.mode_count, model.num_modes());
            const ProjectionResult proj = project(corpus[leave], model, options);
            entry.trials.push_back(surface_error_stats(corpus[leave], proj.instance, all));
        }
    }

    for (auto& entry : table) {
        std::vector<double> rs, ms, rv;
        for (const ErrorStats& s : entry.trials) {
            rs.push_back(s.rms_surface);
            ms.push_back(s.max_surface);
            rv.push_back(s.rms_vertex);
        }
        entry.rms_surface = mean_std(rs);
        entry.max_surface = mean_std(ms);
        entry.rms_vertex = mean_std(rv);
    }
    return table;
}

}  // namespace sx
