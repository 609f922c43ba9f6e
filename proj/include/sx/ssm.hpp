#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "sx/distance.hpp"
#include "sx/mesh.hpp"
#include "sx/similarity.hpp"
#include "sx/util.hpp"

namespace sx {

// Point distribution model: mean shape plus orthonormal variation modes with
// their per-mode standard deviations (non-increasing).
struct ShapeModel {
    Eigen::VectorXd mean;          // 3V stacked coordinates
    Eigen::MatrixXd modes;         // 3V x N, orthonormal columns
    Eigen::VectorXd mode_stddevs;  // N entries
    std::vector<Tri> topology;
    uint32_t sample_count = 0;

    int num_modes() const { return static_cast<int>(modes.cols()); }
    uint32_t vertex_count() const { return static_cast<uint32_t>(mean.size() / 3); }
    TriMesh mean_mesh() const;
};

struct GpaResult {
    std::vector<TriMesh> aligned;  // corpus aligned to the converged mean
    TriMesh mean;                  // unit centroid-size, centered at origin
    int iterations = 0;
    double mean_movement = 0.0;    // RMS vertex movement of the final update
};

// Iterative mutual alignment: align every shape to the current mean,
// recompute the mean, renormalize the gauge (centroid at origin, unit
// centroid-size), repeat until the mean stops moving.
GpaResult generalized_procrustes(std::span<const TriMesh> corpus, double tol = 1e-9,
                                 int max_iters = 100);

// PCA over an aligned corpus. Modes come from the thin SVD of the centered
// data matrix; stddevs use the n-1 covariance convention. Modes with
// sigma/sigma_max <= 1e-10 are dropped.
ShapeModel build_ssm(std::span<const TriMesh> aligned_corpus);

struct ProjectionResult {
    Eigen::VectorXd coefficients;   // one per mode used
    TriMesh instance;               // reconstruction mapped back to the input frame
    SimilarityTransform transform;  // input frame -> model frame
};

struct ProjectOptions {
    int num_modes = -1;            // -1 = all available modes
    bool strict_zero_fill = false; // ablation: leave unknown rows at literal zero
};

// Least-squares reconstruction in the mode span after similarity alignment
// of the known vertices to the mean. Unknown rows of the aligned shape are
// filled with the mean so they contribute nothing to the coefficients
// (strict_zero_fill keeps them at zero instead).
ProjectionResult project(const TriMesh& partial, std::span<const uint32_t> known,
                         const ShapeModel& model, const ProjectOptions& options = {});
ProjectionResult project(const TriMesh& shape, const ShapeModel& model,
                         const ProjectOptions& options = {});

struct ModeSweepEntry {
    int mode_count = 0;
    std::vector<ErrorStats> trials;  // one per left-out shape
    MeanStd rms_surface, max_surface, rms_vertex;
};

// Leave-one-out generalization: rebuild the model without each shape,
// project it back with each mode count, report full-surface errors.
std::vector<ModeSweepEntry> loo_generalization(std::span<const TriMesh> corpus,
                                               std::span<const int> mode_counts,
                                               double gpa_tol = 1e-9, int gpa_max_iters = 100);

}  // namespace sx
