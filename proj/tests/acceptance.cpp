// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Criteria 4-7 share one leave-one-out experiment on the
// default synthetic corpus.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "sx/distance.hpp"
#include "sx/extrapolate.hpp"
#include "sx/harness.hpp"
#include "sx/mesh_io.hpp"
#include "sx/model_io.hpp"
#include "sx/ssm.hpp"
#include "sx/synthetic.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sx;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool passed, const std::string& detail,
            double seconds) {
    std::printf("criterion %d (%s): %s — %s (%.1f s)\n", id, name.c_str(),
                passed ? "PASS" : "FAIL", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!passed) ++failures;
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

// --- criterion 1: TPS correctness ----------------------------------------

void criterion_tps() {
    Stopwatch timer;
    gen::Rng rng(1001);
    bool ok = true;
    std::string why = "100 control sets, N in [5,200]";

    double worst_interp = 0.0, worst_side = 0.0, worst_affine = 0.0, worst_oracle = 0.0;
    for (int round = 0; round < 100 && ok; ++round) {
        const size_t n = static_cast<size_t>(rng.uniform_int(5, 200));
        const std::vector<Vec3> sources = rng.separated_points(n, 80.0, 1.5);
        std::vector<Vec3> targets;
        for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-10.0, 10.0));

        const TpsModel model = build_tps(sources, targets);

        for (size_t i = 0; i < n; ++i)
            worst_interp = std::max(worst_interp, (model(sources[i]) - targets[i]).norm());

        Vec3 sum = Vec3::Zero();
        Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
        double scale = 0.0;
        for (size_t i = 0; i < n; ++i) {
            sum += model.weights[i];
            moment += model.weights[i] * model.control_points[i].transpose();
            scale += model.weights[i].norm() * (1.0 + model.control_points[i].norm());
        }
        worst_side = std::max(
            worst_side, (sum.norm() + moment.norm()) / std::max(scale, 1e-12));

        // Affine reproduction on the same control set.
        Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
        a(0, 1) = rng.uniform(-0.4, 0.4);
        a(1, 2) = rng.uniform(-0.4, 0.4);
        a(2, 0) = rng.uniform(-0.4, 0.4);
        a(0, 0) = rng.uniform(0.7, 1.4);
        const Vec3 b = rng.vec3(-20.0, 20.0);
        std::vector<Vec3> affine_targets;
        double data_scale = 0.0;
        for (const Vec3& p : sources) {
            affine_targets.push_back(a * p + b);
            data_scale += affine_targets.back().norm();
        }
        const TpsModel affine_model = build_tps(sources, affine_targets);
        double wnorm = 0.0;
        for (const Vec3& w : affine_model.weights) wnorm += w.norm();
        worst_affine = std::max(worst_affine, wnorm / data_scale);

        // Dense direct-solve oracle (Gaussian elimination, partial pivoting).
        std::vector<std::vector<double>> system(n + 4, std::vector<double>(n + 4, 0.0));
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j)
                if (i != j) system[i][j] = (sources[i] - sources[j]).norm();
            system[i][n] = system[n][i] = 1.0;
            for (int k = 0; k < 3; ++k)
                system[i][n + 1 + k] = system[n + 1 + k][i] = sources[i][k];
        }
        for (int coord = 0; coord < 3; ++coord) {
            std::vector<double> rhs(n + 4, 0.0);
            for (size_t i = 0; i < n; ++i) rhs[i] = targets[i][coord];
            const std::vector<double> solution = oracle::gauss_solve(system, rhs);
            double diff = 0.0, norm = 0.0;
            for (size_t i = 0; i < n; ++i) {
                diff += std::pow(model.weights[i][coord] - solution[i], 2);
                norm += solution[i] * solution[i];
            }
            diff += std::pow(model.affine_translation[coord] - solution[n], 2);
            for (int k = 0; k < 3; ++k) {
                diff += std::pow(model.affine_linear(coord, k) - solution[n + 1 + k], 2);
                norm += solution[n + 1 + k] * solution[n + 1 + k];
            }
            worst_oracle = std::max(worst_oracle, std::sqrt(diff / std::max(norm, 1e-30)));
        }
    }

    ok = worst_interp <= 1e-6 && worst_side < 1e-8 && worst_affine < 1e-9 &&
         worst_oracle <= 1e-8;
    const double elapsed = timer.seconds();
    ok = ok && elapsed < 60.0;
    report(1, "TPS correctness", ok,
           fmt("interp %.2e mm (<=1e-6), side %.2e (<1e-8), affine %.2e (<1e-9), oracle %.2e "
               "(<=1e-8)",
               worst_interp, worst_side, worst_affine, worst_oracle),
           elapsed);
}

// --- criterion 2: SSM exactness ------------------------------------------

void criterion_ssm() {
    Stopwatch timer;
    SyntheticCorpusSpec spec;
    spec.vertex_budget = 700;
    spec.shape_count = 10;
    spec.latent_modes = 4;
    spec.amplitude_mm = 4.0;
    spec.noise_mm = 0.3;
    spec.seed = 1002;
    const auto corpus = generate_synthetic_corpus(spec);

    const ShapeModel model = build_ssm(generalized_procrustes(corpus).aligned);
    double worst_recon = 0.0;
    for (const TriMesh& shape : corpus) {
        const ProjectionResult proj = project(shape, model);
        double ss = 0.0;
        for (size_t v = 0; v < shape.vertices.size(); ++v)
            ss += (proj.instance.vertices[v] - shape.vertices[v]).squaredNorm();
        const double rel =
            std::sqrt(ss / static_cast<double>(shape.vertices.size())) / bounding_diameter(shape);
        worst_recon = std::max(worst_recon, rel);
    }

    const std::vector<int> counts = {0, 1, 2, 3, 4, 5, 7, 9};
    const auto table = loo_generalization(corpus, counts);
    bool monotone = true;
    for (size_t trial = 0; trial < corpus.size(); ++trial)
        for (size_t k = 1; k < table.size(); ++k)
            if (table[k].trials[trial].rms_vertex >
                table[k - 1].trials[trial].rms_vertex * (1.0 + 1e-9) + 1e-12)
                monotone = false;

    const double elapsed = timer.seconds();
    const bool ok = worst_recon < 1e-6 && monotone && elapsed < 120.0;
    report(2, "SSM exactness", ok,
           fmt("training recon %.2e of diameter (<1e-6), loo monotone over %zu mode counts: %s",
               worst_recon, counts.size(), monotone ? "yes" : "no"),
           elapsed);
}

// --- criterion 3: feathering contract ------------------------------------

void criterion_feather() {
    Stopwatch timer;
    gen::Rng rng(1003);
    const TriMesh patient = gen::deformed_blob(rng, 2000);
    TriMesh instance = patient;
    for (Vec3& p : instance.vertices)
        p += Vec3(2.0 * std::sin(0.02 * p.y()), 1.5 * std::cos(0.02 * p.z()), 1.0);

    double lo = 1e300, hi = -1e300;
    for (const Vec3& p : patient.vertices) {
        lo = std::min(lo, p.x());
        hi = std::max(hi, p.x());
    }
    std::vector<uint32_t> unknown;
    for (uint32_t v = 0; v < patient.vertex_count(); ++v)
        if (patient.vertices[v].x() < lo + 0.3 * (hi - lo)) unknown.push_back(v);

    const VertexAdjacency adjacency(patient);
    const uint32_t d = 8;
    const RegionPartition part_f = compute_partition(adjacency, unknown, d);
    const RegionPartition part_0 = compute_partition(adjacency, unknown, 0);
    const RegionPartition part_t = compute_partition(adjacency, unknown, 3);

    const ExtrapolationResult feather = extrapolate_feather(patient, part_f, instance);
    const ExtrapolationResult po = extrapolate_po(patient, part_0, instance);
    const ExtrapolationResult tps = extrapolate_tps(patient, part_t, instance);

    bool endpoints = true;
    size_t modified = 0;
    for (uint32_t v : part_f.overlap) {
        const uint32_t n = part_f.depth[v];
        if (n == 0 &&
            std::memcmp(feather.mesh.vertices[v].data(), instance.vertices[v].data(),
                        sizeof(Vec3)) != 0)
            endpoints = false;
        if (n == d &&
            std::memcmp(feather.mesh.vertices[v].data(), patient.vertices[v].data(),
                        sizeof(Vec3)) != 0)
            endpoints = false;
        if (std::memcmp(feather.mesh.vertices[v].data(), patient.vertices[v].data(),
                        sizeof(Vec3)) != 0)
            ++modified;
    }

    bool known_identical = true;
    for (uint32_t v = 0; v < patient.vertex_count(); ++v) {
        if (part_0.is_unknown(v)) continue;
        if (std::memcmp(po.mesh.vertices[v].data(), patient.vertices[v].data(), sizeof(Vec3)) !=
                0 ||
            std::memcmp(tps.mesh.vertices[v].data(), patient.vertices[v].data(), sizeof(Vec3)) !=
                0)
            known_identical = false;
    }

    const bool ok = endpoints && modified > 0 && known_identical;
    report(3, "feather blend contract", ok,
           fmt("endpoints exact: %s, overlap vertices modified: %zu (>0), po/tps known "
               "bit-identical: %s",
               endpoints ? "yes" : "no", modified, known_identical ? "yes" : "no"),
           timer.seconds());
}

// --- criteria 4-7: the cropping experiment --------------------------------

struct ExperimentChecks {
    LooResult result;
    LooOptions options;
    double seconds = 0.0;
};

ExperimentChecks run_experiment() {
    ExperimentChecks out;
    Stopwatch timer;
    const auto corpus = generate_synthetic_corpus(default_corpus_spec());
    out.options.collect_heatmaps = false;
    out.result = run_loo_extrapolation(corpus, out.options);
    out.seconds = timer.seconds();
    return out;
}

const LooAggregate* find_aggregate(const LooResult& result, double fraction, Method method) {
    for (const LooAggregate& a : result.aggregates)
        if (a.fraction == fraction && a.method == method) return &a;
    return nullptr;
}

void criterion_ordering(const ExperimentChecks& ex) {
    bool order_ok = true;
    std::string violation;
    for (double f : ex.options.fractions) {
        const LooAggregate* po = find_aggregate(ex.result, f, Method::projection_only);
        const LooAggregate* fe = find_aggregate(ex.result, f, Method::feather);
        const LooAggregate* tps = find_aggregate(ex.result, f, Method::tps);
        if (!po || !fe || !tps || po->trial_count == 0 || fe->trial_count == 0 ||
            tps->trial_count == 0) {
            order_ok = false;
            violation = fmt("missing trials at %.0f%%", f);
            break;
        }
        if (!(tps->rms_vertex.mean <= fe->rms_vertex.mean &&
              fe->rms_vertex.mean <= po->rms_vertex.mean)) {
            order_ok = false;
            violation = fmt("at %.0f%%: tps %.4f, feather %.4f, po %.4f", f,
                            tps->rms_vertex.mean, fe->rms_vertex.mean, po->rms_vertex.mean);
            break;
        }
    }

    std::map<std::pair<uint32_t, double>, std::map<int, const TrialReport*>> cells;
    for (const TrialReport& t : ex.result.trials)
        if (!t.failed) cells[{t.left_out, t.fraction}][static_cast<int>(t.method)] = &t;
    int wins = 0, pairs = 0;
    for (auto& [key, cell] : cells) {
        const TrialReport* po = cell[static_cast<int>(Method::projection_only)];
        const TrialReport* tps = cell[static_cast<int>(Method::tps)];
        if (!po || !tps) continue;
        ++pairs;
        if (tps->stats.rms_vertex < po->stats.rms_vertex) ++wins;
    }
    const double win_rate = pairs > 0 ? static_cast<double>(wins) / pairs : 0.0;

    const bool ok = order_ok && win_rate >= 0.8 && ex.seconds < 1800.0;
    report(4, "method ordering", ok,
           fmt("mean rms-vertex tps<=feather<=po at every fraction: %s%s%s; tps<po in %d/%d "
               "trials (%.0f%%, >=80%%); experiment %.0f s (<1800)",
               order_ok ? "yes" : "no", order_ok ? "" : " — ", violation.c_str(), wins, pairs,
               100.0 * win_rate, ex.seconds),
           ex.seconds);
}

void criterion_seam(const ExperimentChecks& ex) {
    Stopwatch timer;
    std::map<std::pair<uint32_t, double>, std::map<int, const TrialReport*>> cells;
    for (const TrialReport& t : ex.result.trials)
        if (!t.failed) cells[{t.left_out, t.fraction}][static_cast<int>(t.method)] = &t;

    int checked = 0, ok_count = 0;
    double worst_ratio = 0.0;
    for (auto& [key, cell] : cells) {
        const TrialReport* po = cell[static_cast<int>(Method::projection_only)];
        const TrialReport* tps = cell[static_cast<int>(Method::tps)];
        if (!po || !tps) continue;
        ++checked;
        if (tps->seam.max <= po->seam.max) ++ok_count;
        if (po->seam.max > 0.0) worst_ratio = std::max(worst_ratio, tps->seam.max / po->seam.max);
    }
    const bool ok = checked > 0 && ok_count == checked;
    report(5, "seam smoothness", ok,
           fmt("max boundary jump tps<=po in %d/%d trials, worst tps/po ratio %.3f", ok_count,
               checked, worst_ratio),
           timer.seconds());
}

void criterion_degradation(const ExperimentChecks& ex) {
    Stopwatch timer;
    bool ok = true;
    std::string violation = "none";
    for (Method m : ex.options.methods) {
        for (size_t i = 1; i < ex.options.fractions.size(); ++i) {
            const LooAggregate* prev =
                find_aggregate(ex.result, ex.options.fractions[i - 1], m);
            const LooAggregate* cur = find_aggregate(ex.result, ex.options.fractions[i], m);
            if (!prev || !cur || prev->trial_count == 0 || cur->trial_count == 0) continue;
            // One standard error of the difference of the two means.
            const double se = std::sqrt(
                prev->rms_vertex.stddev * prev->rms_vertex.stddev / prev->trial_count +
                cur->rms_vertex.stddev * cur->rms_vertex.stddev / cur->trial_count);
            if (prev->rms_vertex.mean - cur->rms_vertex.mean > se) {
                ok = false;
                violation = fmt("%s %.0f%%->%.0f%%: %.4f -> %.4f (se %.4f)",
                                method_name(m).c_str(), ex.options.fractions[i - 1],
                                ex.options.fractions[i], prev->rms_vertex.mean,
                                cur->rms_vertex.mean, se);
            }
        }
    }
    report(6, "degradation trend", ok,
           fmt("mean rms-vertex non-decreasing in crop fraction per method within one standard "
               "error; violation: %s",
               violation.c_str()),
           timer.seconds());
}

void criterion_runtime(const ExperimentChecks& ex) {
    Stopwatch timer;
    const RuntimeFit fit = fit_runtime_curve(ex.result.trials, 2);

    double worst_po = 0.0, worst_feather = 0.0;
    for (const TrialReport& t : ex.result.trials) {
        if (t.failed) continue;
        if (t.method == Method::projection_only)
            worst_po = std::max(worst_po, t.timings.extrapolation_total());
        if (t.method == Method::feather)
            worst_feather = std::max(worst_feather, t.timings.extrapolation_total());
    }

    const bool ok = fit.build_share_largest_bucket > 0.5 && fit.r_squared > 0.9 &&
                    worst_po < 0.1 && worst_feather < 0.1;
    report(7, "runtime structure", ok,
           fmt("tps build share %.0f%% (>50%%) at overlap %u, quadratic fit R^2 %.3f (>0.9), "
               "worst po %.1f ms / feather %.1f ms (<100)",
               100.0 * fit.build_share_largest_bucket, fit.largest_bucket_overlap, fit.r_squared,
               worst_po * 1e3, worst_feather * 1e3),
           timer.seconds());
}

// --- criterion 8: I/O round trips ----------------------------------------

void criterion_io() {
    Stopwatch timer;
    gen::Rng rng(1008);
    const fs::path dir =
        fs::temp_directory_path() / ("sx_accept_io_" + std::to_string(std::random_device{}()));
    fs::create_directories(dir);

    bool mesh_ok = true;
    for (int round = 0; round < 50; ++round) {
        const TriMesh mesh = gen::deformed_blob(rng, 150 + 40 * round, rng.uniform(0.0, 8.0));
        const std::string path = (dir / "mesh.ply").string();
        write_mesh(path, mesh);
        const TriMesh loaded = read_mesh(path);
        if (std::memcmp(mesh.vertices.data(), loaded.vertices.data(),
                        mesh.vertices.size() * sizeof(Vec3)) != 0 ||
            mesh.triangles != loaded.triangles)
            mesh_ok = false;
    }

    bool model_ok = true;
    for (int round = 0; round < 50; ++round) {
        SyntheticCorpusSpec spec;
        spec.vertex_budget = 150 + 10 * round;
        spec.shape_count = 4 + round % 4;
        spec.latent_modes = 2;
        spec.amplitude_mm = 2.0;
        spec.noise_mm = 0.05;
        spec.seed = 2000 + round;
        const auto corpus = generate_synthetic_corpus(spec);
        const ShapeModel model = build_ssm(generalized_procrustes(corpus).aligned);
        const std::string path = (dir / "model.ssm").string();
        write_model(path, model);
        const ShapeModel loaded = read_model(path);
        if (std::memcmp(model.mean.data(), loaded.mean.data(),
                        sizeof(double) * model.mean.size()) != 0 ||
            std::memcmp(model.modes.data(), loaded.modes.data(),
                        sizeof(double) * model.modes.size()) != 0 ||
            std::memcmp(model.mode_stddevs.data(), loaded.mode_stddevs.data(),
                        sizeof(double) * model.mode_stddevs.size()) != 0 ||
            model.topology != loaded.topology)
            model_ok = false;
    }
    fs::remove_all(dir);

    const bool ok = mesh_ok && model_ok;
    report(8, "I/O round trips", ok,
           fmt("50 PLY meshes bit-exact: %s; 50 model files bit-exact: %s",
               mesh_ok ? "yes" : "no", model_ok ? "yes" : "no"),
           timer.seconds());
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion_tps();
    criterion_ssm();
    criterion_feather();

    const ExperimentChecks experiment = run_experiment();
    criterion_ordering(experiment);
    criterion_seam(experiment);
    criterion_degradation(experiment);
    criterion_runtime(experiment);

    criterion_io();

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "OK" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
