#include "sx/extrapolate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sx/errors.hpp"
#include "sx/util.hpp"

namespace sx {

std::string method_name(Method m) {
    switch (m) {
        case Method::projection_only: return "po";
        case Method::feather: return "feather";
        case Method::tps: return "tps";
    }
    return "?";
}

Method method_from_name(const std::string& name) {
    if (name == "po") return Method::projection_only;
    if (name == "feather") return Method::feather;
    if (name == "tps") return Method::tps;
    throw Error("unknown method '" + name + "' (expected po|feather|tps)");
}

namespace {

void check_inputs(const TriMesh& patient, const RegionPartition& partition,
                  const TriMesh& instance) {
    if (!same_topology(patient, instance))
        throw TopologyError("extrapolate: patient and instance topology mismatch");
    if (patient.vertex_count() != partition.vertex_count())
        throw Error("extrapolate: partition does not match the mesh");
}

std::vector<uint32_t> sorted_union(std::span<const uint32_t> a, std::span<const uint32_t> b) {
    std::vector<uint32_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

ExtrapolationResult extrapolate_po(const TriMesh& patient, const RegionPartition& partition,
                                   const TriMesh& instance) {
    check_inputs(patient, partition, instance);
    ExtrapolationResult result;
    result.method = Method::projection_only;
    result.partition = partition;

    Stopwatch timer;
    result.mesh = patient;
    for (uint32_t v : partition.unknown) result.mesh.vertices[v] = instance.vertices[v];
    result.timings.assembly = timer.seconds();
    result.eval_region = partition.unknown;
    return result;
}

ExtrapolationResult extrapolate_feather(const TriMesh& patient, const RegionPartition& partition,
                                        const TriMesh& instance) {
    check_inputs(patient, partition, instance);
    if (partition.max_depth < 1) throw Error("feather: band depth must be at least 1");
    ExtrapolationResult result;
    result.method = Method::feather;
    result.partition = partition;

    Stopwatch timer;
    result.mesh = patient;
    for (uint32_t v : partition.unknown) result.mesh.vertices[v] = instance.vertices[v];
    const double d = static_cast<double>(partition.max_depth);
    for (uint32_t v : partition.overlap) {
        const uint32_t n = partition.depth[v];
        if (n == 0) {
            result.mesh.vertices[v] = instance.vertices[v];
        } else if (n < partition.max_depth) {
            const double w = static_cast<double>(n) / d;
            result.mesh.vertices[v] = (1.0 - w) * instance.vertices[v] + w * patient.vertices[v];
        }
        // n == max_depth keeps the patient value exactly.
    }
    result.timings.assembly = timer.seconds();
    result.eval_region = sorted_union(partition.unknown, partition.overlap);
    return result;
}

ExtrapolationResult extrapolate_tps(const TriMesh& patient, const RegionPartition& partition,
                                    const TriMesh& instance, const TpsBuildOptions& options) {
    check_inputs(patient, partition, instance);
    if (partition.overlap.size() < 5)
        throw Error("tps extrapolation: overlap has fewer than 5 vertices, raise the depth");

    ExtrapolationResult result;
    result.method = Method::tps;
    result.partition = partition;

    std::vector<Vec3> sources, targets;
    sources.reserve(partition.overlap.size());
    targets.reserve(partition.overlap.size());
    for (uint32_t v : partition.overlap) {
        sources.push_back(instance.vertices[v]);
        targets.push_back(patient.vertices[v]);
    }

    Stopwatch timer;
    TpsModel tps;
    try {
        tps = build_tps(sources, targets, options);
    } catch (const DegenerateError&) {
        // Flat overlap: retry once with a small regularization before
        // giving up.
        double spacing_acc = 0.0;
        for (size_t i = 0; i < sources.size(); ++i) {
            double nearest = std::numeric_limits<double>::infinity();
            for (size_t j = 0; j < sources.size(); ++j)
                if (j != i) nearest = std::min(nearest, (sources[i] - sources[j]).norm());
            spacing_acc += nearest;
        }
        const double spacing = spacing_acc / static_cast<double>(sources.size());
        TpsBuildOptions retry = options;
        retry.regularization = std::max(options.regularization, 1e-6 * spacing * spacing);
        tps = build_tps(sources, targets, retry);
    }
    result.timings.tps_build = timer.seconds();

    timer.restart();
    std::vector<Vec3> queries;
    queries.reserve(partition.unknown.size());
    for (uint32_t v : partition.unknown) queries.push_back(instance.vertices[v]);
    const std::vector<Vec3> mapped = evaluate_tps(tps, queries);
    result.timings.tps_evaluate = timer.seconds();

    timer.restart();
    result.mesh = patient;
    for (size_t i = 0; i < partition.unknown.size(); ++i)
        result.mesh.vertices[partition.unknown[i]] = mapped[i];
    result.timings.assembly = timer.seconds();
    result.eval_region = partition.unknown;
    return result;
}

SeamJump seam_jump(const TriMesh& truth, const TriMesh& output, const VertexAdjacency& adjacency,
                   const RegionPartition& partition) {
    SeamJump jump;
    double ss = 0.0;
    size_t edges = 0;
    for (uint32_t b : partition.unknown) {
        for (uint32_t a : adjacency.neighbors(b)) {
            if (partition.is_unknown(a)) continue;
            const Vec3 out_delta = output.vertices[b] - output.vertices[a];
            const Vec3 truth_delta = truth.vertices[b] - truth.vertices[a];
            const double j = (out_delta - truth_delta).norm();
            jump.max = std::max(jump.max, j);
            ss += j * j;
            ++edges;
        }
    }
    if (edges > 0) jump.rms = std::sqrt(ss / static_cast<double>(edges));
    return jump;
}

}  // namespace sx
