#include "sx/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "sx/errors.hpp"
#include "sx/ssm.hpp"

namespace sx {

Axis axis_from_name(const std::string& name) {
    if (name == "x") return Axis::x;
    if (name == "y") return Axis::y;
    if (name == "z") return Axis::z;
    throw Error("unknown axis '" + name + "' (expected x|y|z)");
}

std::string axis_name(Axis axis) {
    switch (axis) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    return "?";
}

std::vector<uint32_t> crop_unknown_indices(const TriMesh& mean_shape, const CropSpec& spec) {
    if (!(spec.fraction > 0.0) || spec.fraction > 50.0)
        throw Error("crop fraction must lie in (0, 50], got " + std::to_string(spec.fraction));
    const int axis = static_cast<int>(spec.axis);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec3& p : mean_shape.vertices) {
        lo = std::min(lo, p[axis]);
        hi = std::max(hi, p[axis]);
    }
    const double extent = hi - lo;
    std::vector<uint32_t> unknown;
    for (uint32_t i = 0; i < mean_shape.vertex_count(); ++i) {
        const double c = mean_shape.vertices[i][axis];
        const bool removed = spec.direction == CropDirection::from_min
                                 ? c < lo + spec.fraction / 100.0 * extent
                                 : c > hi - spec.fraction / 100.0 * extent;
        if (removed) unknown.push_back(i);
    }
    return unknown;
}

RegionPartition crop_partition(const TriMesh& mean_shape, const TriMesh& target,
                               const CropSpec& spec, uint32_t max_depth) {
    if (!same_topology(mean_shape, target))
        throw TopologyError("crop_partition: target does not match the mean shape topology");
    const std::vector<uint32_t> unknown = crop_unknown_indices(mean_shape, spec);
    if (unknown.empty()) throw Error("crop removes no vertices at this fraction");
    if (unknown.size() == mean_shape.vertex_count()) throw Error("crop removes every vertex");
    return compute_partition(target, unknown, max_depth);
}

void HeatmapAccumulator::add(std::span<const uint32_t> region, std::span<const double> distances) {
    for (size_t i = 0; i < region.size(); ++i) {
        sum(region[i]) += distances[i];
        count(region[i]) += 1;
    }
}

HeatmapMesh emit_heatmap(const TriMesh& base, const HeatmapAccumulator& accumulator) {
    if ((accumulator.count.array() > 0).count() == 0)
        throw Error("emit_heatmap: no accumulated trials");
    HeatmapMesh out;
    out.mesh = base;
    out.mean_distance.resize(base.vertex_count());
    for (uint32_t v = 0; v < base.vertex_count(); ++v)
        out.mean_distance[v] =
            accumulator.count(v) > 0 ? accumulator.sum(v) / accumulator.count(v) : -1.0;
    return out;
}

LooAggregate aggregate_trials(std::span<const TrialReport> trials, double fraction, Method method) {
    LooAggregate agg;
    agg.fraction = fraction;
    agg.method = method;
    std::vector<double> rv, rs, ms, sm;
    for (const TrialReport& t : trials) {
        if (t.failed || t.fraction != fraction || t.method != method) continue;
        rv.push_back(t.stats.rms_vertex);
        rs.push_back(t.stats.rms_surface);
        ms.push_back(t.stats.max_surface);
        sm.push_back(t.seam.max);
    }
    agg.trial_count = static_cast<int>(rv.size());
    agg.rms_vertex = mean_std(rv);
    agg.rms_surface = mean_std(rs);
    agg.max_surface = mean_std(ms);
    agg.seam_max = mean_std(sm);
    return agg;
}

namespace {

// Mean centroid size of the raw corpus, used to rescale the normalized mean
// back to mm for heatmap output.
double mean_centroid_size(std::span<const TriMesh> corpus) {
    double acc = 0.0;
    for (const TriMesh& mesh : corpus) {
        Vec3 centroid = Vec3::Zero();
        for (const Vec3& p : mesh.vertices) centroid += p;
        centroid /= static_cast<double>(mesh.vertices.size());
        double ss = 0.0;
        for (const Vec3& p : mesh.vertices) ss += (p - centroid).squaredNorm();
        acc += std::sqrt(ss);
    }
    return acc / static_cast<double>(corpus.size());
}

struct TrialContext {
    const TriMesh* truth = nullptr;
    const ShapeModel* model = nullptr;
    const VertexAdjacency* adjacency = nullptr;
    double fraction = 0.0;
    std::span<const uint32_t> unknown;
    std::span<const uint32_t> known;
};

TrialReport run_single_trial(const TrialContext& ctx, Method method, uint32_t depth,
                             const TpsBuildOptions& tps_options,
                             std::vector<uint32_t>* eval_region_out = nullptr) {
    TrialReport report;
    report.fraction = ctx.fraction;
    report.method = method;
    report.unknown_count = static_cast<uint32_t>(ctx.unknown.size());

    Stopwatch timer;
    const ProjectionResult proj = project(*ctx.truth, ctx.known, *ctx.model);
    const double projection_time = timer.seconds();

    timer.restart();
    const RegionPartition partition = compute_partition(*ctx.adjacency, ctx.unknown, depth);
    const double band_time = timer.seconds();

    ExtrapolationResult extrap;
    switch (method) {
        case Method::projection_only:
            extrap = extrapolate_po(*ctx.truth, partition, proj.instance);
            break;
        case Method::feather:
            extrap = extrapolate_feather(*ctx.truth, partition, proj.instance);
            break;
        case Method::tps:
            extrap = extrapolate_tps(*ctx.truth, partition, proj.instance, tps_options);
            break;
    }
    extrap.timings.projection = projection_time;
    extrap.timings.band = band_time;

    report.timings = extrap.timings;
    report.overlap_count = static_cast<uint32_t>(partition.overlap.size());
    report.stats = surface_error_stats(*ctx.truth, extrap.mesh, extrap.eval_region);
    report.seam = seam_jump(*ctx.truth, extrap.mesh, *ctx.adjacency, partition);
    if (eval_region_out) *eval_region_out = std::move(extrap.eval_region);
    return report;
}

}  // namespace

LooResult run_loo_extrapolation(std::span<const TriMesh> corpus, const LooOptions& options) {
    if (corpus.size() < 3) throw Error("loo extrapolation: need at least 3 meshes");
    if (options.fractions.empty()) throw Error("loo extrapolation: no fractions requested");
    if (options.methods.empty()) throw Error("loo extrapolation: no methods requested");

    // The crop plane lives on the full-corpus mean so the same vertex set is
    // removed in every trial at a given fraction.
    const GpaResult global_gpa =
        generalized_procrustes(corpus, options.gpa_tol, options.gpa_max_iters);
    const VertexAdjacency adjacency(corpus[0]);

    std::vector<std::vector<uint32_t>> unknown_sets;
    for (double fraction : options.fractions) {
        CropSpec spec{options.axis, fraction, options.direction};
        std::vector<uint32_t> unknown = crop_unknown_indices(global_gpa.mean, spec);
        if (unknown.empty())
            throw Error("crop at " + std::to_string(fraction) + "% removes no vertices");
        if (unknown.size() >= corpus[0].vertex_count())
            throw Error("crop at " + std::to_string(fraction) + "% removes every vertex");
        unknown_sets.push_back(std::move(unknown));
    }

    LooResult result;
    result.heatmap_base = global_gpa.mean;
    const double base_scale = mean_centroid_size(corpus);
    for (Vec3& p : result.heatmap_base.vertices) p *= base_scale;

    if (options.collect_heatmaps)
        for (double fraction : options.fractions)
            for (Method method : options.methods)
                result.heatmaps.push_back(
                    {fraction, method, HeatmapAccumulator(corpus[0].vertex_count())});

    const auto depth_for = [&](Method m) {
        switch (m) {
            case Method::feather: return options.feather_depth;
            case Method::tps: return options.tps_depth;
            default: return 0u;
        }
    };

    std::vector<uint8_t> known_mask(corpus[0].vertex_count());
    const auto known_of = [&](std::span<const uint32_t> unknown) {
        std::fill(known_mask.begin(), known_mask.end(), 1);
        for (uint32_t u : unknown) known_mask[u] = 0;
        std::vector<uint32_t> known;
        known.reserve(known_mask.size() - unknown.size());
        for (uint32_t i = 0; i < known_mask.size(); ++i)
            if (known_mask[i]) known.push_back(i);
        return known;
    };

    bool warm = !options.warmup;
    for (size_t leave = 0; leave < corpus.size(); ++leave) {
        std::vector<TriMesh> rest;
        rest.reserve(corpus.size() - 1);
        for (size_t i = 0; i < corpus.size(); ++i)
            if (i != leave) rest.push_back(corpus[i]);
        const GpaResult gpa = generalized_procrustes(rest, options.gpa_tol, options.gpa_max_iters);
        const ShapeModel model = build_ssm(gpa.aligned);

        for (size_t f = 0; f < options.fractions.size(); ++f) {
            const std::vector<uint32_t> known = known_of(unknown_sets[f]);
            TrialContext ctx;
            ctx.truth = &corpus[leave];
            ctx.model = &model;
            ctx.adjacency = &adjacency;
            ctx.fraction = options.fractions[f];
            ctx.unknown = unknown_sets[f];
            ctx.known = known;

            for (Method method : options.methods) {
                TrialReport report;
                report.left_out = static_cast<uint32_t>(leave);
                report.fraction = options.fractions[f];
                report.method = method;
                try {
                    if (!warm) {
                        // Discard one run so first-touch costs stay out of
                        // the recorded timings.
                        run_single_trial(ctx, method, depth_for(method), options.tps);
                        warm = true;
                    }
                    std::vector<uint32_t> eval_region;
                    TrialReport r = run_single_trial(ctx, method, depth_for(method), options.tps,
                                                     &eval_region);
                    r.left_out = static_cast<uint32_t>(leave);
                    report = std::move(r);

                    if (options.collect_heatmaps) {
                        for (auto& slot : result.heatmaps)
                            if (slot.fraction == report.fraction && slot.method == method)
                                slot.accumulator.add(eval_region, report.stats.per_vertex_surface);
                    }
                } catch (const Error& err) {
                    report.failed = true;
                    report.failure = err.what();
                }
                result.trials.push_back(std::move(report));
            }
        }
    }

    for (double fraction : options.fractions)
        for (Method method : options.methods)
            result.aggregates.push_back(aggregate_trials(result.trials, fraction, method));

    // Mean improvement of P+TPS over each baseline, averaged over fractions,
    // positive when P+TPS has the smaller error.
    const bool has_tps = std::find(options.methods.begin(), options.methods.end(), Method::tps) !=
                         options.methods.end();
    if (has_tps) {
        for (Method baseline : options.methods) {
            if (baseline == Method::tps) continue;
            Improvement imp;
            imp.baseline = baseline;
            int count = 0;
            for (double fraction : options.fractions) {
                const auto find = [&](Method m) -> const LooAggregate* {
                    for (const auto& a : result.aggregates)
                        if (a.fraction == fraction && a.method == m) return &a;
                    return nullptr;
                };
                const LooAggregate* base = find(baseline);
                const LooAggregate* tps = find(Method::tps);
                if (!base || !tps || base->trial_count == 0 || tps->trial_count == 0) continue;
                imp.rms_vertex += base->rms_vertex.mean - tps->rms_vertex.mean;
                imp.rms_surface += base->rms_surface.mean - tps->rms_surface.mean;
                imp.max_surface += base->max_surface.mean - tps->max_surface.mean;
                ++count;
            }
            if (count > 0) {
                imp.rms_vertex /= count;
                imp.rms_surface /= count;
                imp.max_surface /= count;
            }
            result.improvements.push_back(imp);
        }
    }
    return result;
}

RuntimeFit fit_runtime_curve(std::span<const TrialReport> reports, int degree) {
    if (degree < 0 || degree > 3) throw Error("runtime fit: degree must be 0..3");

    // Mean build time per distinct overlap size; the regression runs on the
    // mean runtimes, not the raw per-trial samples.
    std::map<uint32_t, std::pair<double, int>> buckets;
    for (const TrialReport& r : reports) {
        if (r.method != Method::tps || r.failed) continue;
        buckets[r.overlap_count].first += r.timings.tps_build;
        buckets[r.overlap_count].second += 1;
    }
    if (buckets.size() < 3) throw Error("runtime fit: need at least 3 distinct overlap sizes");
    std::vector<double> sizes, times;
    for (const auto& [overlap, acc] : buckets) {
        sizes.push_back(static_cast<double>(overlap));
        times.push_back(acc.first / acc.second);
    }
    std::vector<double> distinct = sizes;

    // Fit in x/x_max for conditioning, then rescale the coefficients.
    const double x_max = distinct.back();
    const Eigen::Index n = static_cast<Eigen::Index>(sizes.size());
    Eigen::MatrixXd vandermonde(n, degree + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double u = sizes[i] / x_max;
        double p = 1.0;
        for (int c = 0; c <= degree; ++c) {
            vandermonde(i, c) = p;
            p *= u;
        }
        y(i) = times[i];
    }
    RuntimeFit fit;
    Eigen::VectorXd scaled = vandermonde.colPivHouseholderQr().solve(y);
    fit.coefficients.resize(degree + 1);
    double pow_x = 1.0;
    for (int c = 0; c <= degree; ++c) {
        fit.coefficients(c) = scaled(c) / pow_x;
        pow_x *= x_max;
    }

    const Eigen::VectorXd residual = y - vandermonde * scaled;
    const double ss_res = residual.squaredNorm();
    const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    fit.residual_rms = std::sqrt(ss_res / static_cast<double>(n));

    const uint32_t largest = static_cast<uint32_t>(distinct.back());
    double build = 0.0, total = 0.0;
    for (const TrialReport& r : reports) {
        if (r.method != Method::tps || r.failed || r.overlap_count != largest) continue;
        build += r.timings.tps_build;
        total += r.timings.extrapolation_total();
    }
    fit.largest_bucket_overlap = largest;
    fit.build_share_largest_bucket = total > 0.0 ? build / total : 0.0;
    return fit;
}

}  // namespace sx
