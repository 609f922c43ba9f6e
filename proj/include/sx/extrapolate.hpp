#pragma once

#include <span>
#include <string>

#include "sx/mesh.hpp"
#include "sx/partition.hpp"
#include "sx/tps.hpp"

namespace sx {

enum class Method { projection_only, feather, tps };

std::string method_name(Method m);       // "po", "feather", "tps"
Method method_from_name(const std::string& name);

constexpr uint32_t kDefaultFeatherDepth = 20;
constexpr uint32_t kDefaultTpsDepth = 3;

struct StageTimings {
    double projection = 0.0;  // filled by the caller that ran the projection
    double band = 0.0;        // filled by the caller that built the partition
    double tps_build = 0.0;
    double tps_evaluate = 0.0;
    double assembly = 0.0;

    double extrapolation_total() const { return band + tps_build + tps_evaluate + assembly; }
};

struct ExtrapolationResult {
    TriMesh mesh;
    Method method = Method::projection_only;
    RegionPartition partition;
    std::vector<uint32_t> eval_region;  // sorted; unknown, or unknown + overlap for feather
    StageTimings timings;
};

// Copy-paste baseline: unknown vertices come from the model instance, known
// vertices are left bit-identical.
ExtrapolationResult extrapolate_po(const TriMesh& patient, const RegionPartition& partition,
                                   const TriMesh& instance);

// Depth-weighted blend q~ = ((d-n)/d) r + (n/d) q across the overlap band
// (r = instance, q = patient); unknown vertices pasted as in PO. Requires
// partition.max_depth >= 1. Known vertices outside the band are untouched,
// band vertices are generally modified.
ExtrapolationResult extrapolate_feather(const TriMesh& patient, const RegionPartition& partition,
                                        const TriMesh& instance);

// Thin-plate-spline extrapolation: a TPS is trained on displacements from
// the instance to the patient over the overlap vertices (all depths 0..d),
// then every unknown instance vertex is pushed through it. Known vertices
// are left bit-identical. If the control system is rank deficient, retries
// once with a small regularization before giving up.
ExtrapolationResult extrapolate_tps(const TriMesh& patient, const RegionPartition& partition,
                                    const TriMesh& instance, const TpsBuildOptions& options = {});

struct SeamJump {
    double max = 0.0;
    double rms = 0.0;
};

// Over boundary edges (a known, b unknown):
//   jump = | (out_b - out_a) - (truth_b - truth_a) |
// Quantifies how well the output reproduces the truth's displacement across
// the cut.
SeamJump seam_jump(const TriMesh& truth, const TriMesh& output, const VertexAdjacency& adjacency,
                   const RegionPartition& partition);

}  // namespace sx
