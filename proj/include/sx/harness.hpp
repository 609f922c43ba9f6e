#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sx/distance.hpp"
#include "sx/extrapolate.hpp"
#include "sx/mesh.hpp"
#include "sx/partition.hpp"
#include "sx/util.hpp"

namespace sx {

enum class Axis : int { x = 0, y = 1, z = 2 };
enum class CropDirection { from_min, from_max };

Axis axis_from_name(const std::string& name);
std::string axis_name(Axis axis);

// Cutting plane on the mean shape's bounding box: the removed side spans
// `fraction` percent of the axis extent, starting from one end.
struct CropSpec {
    Axis axis = Axis::x;
    double fraction = 20.0;  // percent, (0, 50]
    CropDirection direction = CropDirection::from_min;
};

// Vertex indices of the mean shape on the removed side. The same index set
// applies to every corpus member (homologous vertices).
std::vector<uint32_t> crop_unknown_indices(const TriMesh& mean_shape, const CropSpec& spec);

// Partition of `target` induced by cropping the mean shape. Throws Error if
// the cut removes nothing or everything, TopologyError on a mesh mismatch.
RegionPartition crop_partition(const TriMesh& mean_shape, const TriMesh& target,
                               const CropSpec& spec, uint32_t max_depth = 0);

struct TrialReport {
    uint32_t left_out = 0;
    double fraction = 0.0;
    Method method = Method::projection_only;
    ErrorStats stats;      // over the method's eval region
    SeamJump seam;
    StageTimings timings;  // seconds
    uint32_t overlap_count = 0;
    uint32_t unknown_count = 0;
    bool failed = false;
    std::string failure;
};

struct LooOptions {
    std::vector<double> fractions = {5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    std::vector<Method> methods = {Method::projection_only, Method::feather, Method::tps};
    uint32_t feather_depth = kDefaultFeatherDepth;
    uint32_t tps_depth = kDefaultTpsDepth;
    Axis axis = Axis::x;
    CropDirection direction = CropDirection::from_min;
    double gpa_tol = 1e-9;
    int gpa_max_iters = 100;
    TpsBuildOptions tps;
    bool collect_heatmaps = true;
    bool warmup = true;  // run one throwaway trial first so timings are warm
};

struct LooAggregate {
    double fraction = 0.0;
    Method method = Method::projection_only;
    int trial_count = 0;
    MeanStd rms_vertex, rms_surface, max_surface, seam_max;
};

// Mean improvement of P+TPS over a baseline method, averaged over fractions
// (positive = P+TPS better).
struct Improvement {
    Method baseline = Method::projection_only;
    double rms_vertex = 0.0;
    double rms_surface = 0.0;
    double max_surface = 0.0;
};

struct HeatmapAccumulator {
    Eigen::VectorXd sum;
    Eigen::VectorXi count;

    explicit HeatmapAccumulator(uint32_t vertex_count = 0)
        : sum(Eigen::VectorXd::Zero(vertex_count)), count(Eigen::VectorXi::Zero(vertex_count)) {}
    void add(std::span<const uint32_t> region, std::span<const double> distances);
};

// Per-vertex mean surface distance over the accumulated trials, attached to
// `base`. Vertices that were never evaluated (the surface matches the truth
// there) carry the sentinel -1.
struct HeatmapMesh {
    TriMesh mesh;
    std::vector<double> mean_distance;
};
HeatmapMesh emit_heatmap(const TriMesh& base, const HeatmapAccumulator& accumulator);

struct HeatmapSlot {
    double fraction = 0.0;
    Method method = Method::projection_only;
    HeatmapAccumulator accumulator;
};

struct LooResult {
    std::vector<TrialReport> trials;
    std::vector<LooAggregate> aggregates;   // per (fraction, method)
    std::vector<Improvement> improvements;  // tps vs po, tps vs feather
    std::vector<HeatmapSlot> heatmaps;
    TriMesh heatmap_base;  // corpus mean rescaled to mm
};

// The cropping experiment: for every left-out shape build a model from the
// rest, crop at each fraction, complete with each method and score against
// the truth on that method's eval region. Failed trials are recorded, not
// fatal. Trials run serially so per-stage timings stay clean; the kernels
// inside them are the parallel ones.
LooResult run_loo_extrapolation(std::span<const TriMesh> corpus, const LooOptions& options = {});

LooAggregate aggregate_trials(std::span<const TrialReport> trials, double fraction, Method method);

struct RuntimeFit {
    Eigen::VectorXd coefficients;  // c0 + c1 N + c2 N^2 (+ c3 N^3)
    double r_squared = 0.0;
    double residual_rms = 0.0;
    double build_share_largest_bucket = 0.0;  // TPS build / total P+TPS extrapolation time
    uint32_t largest_bucket_overlap = 0;
};

// Least-squares polynomial of TPS build time against overlap vertex count
// over the P+TPS trials. Throws Error with fewer than 3 distinct sizes.
RuntimeFit fit_runtime_curve(std::span<const TrialReport> reports, int degree = 2);

}  // namespace sx
