// Compares the OpenMP kernels against their serial reference
// implementations: batched surface-distance statistics, TPS evaluation, and
// the pooled vs three-independent-solves TPS build.

#include <cstdio>
#include <random>
#include <vector>

#include <CLI11.hpp>

#include "sx/distance.hpp"
#include "sx/synthetic.hpp"
#include "sx/tps.hpp"
#include "sx/util.hpp"

using namespace sx;

namespace {

double best_of(int repeats, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        Stopwatch timer;
        fn();
        best = std::min(best, timer.seconds());
    }
    return best;
}

void row(const char* name, double serial, double parallel) {
    std::printf("%-34s %10.3f ms %10.3f ms %8.2fx\n", name, serial * 1e3, parallel * 1e3,
                serial / parallel);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"serial vs parallel kernel benchmark"};
    uint32_t vertices = 20000;
    uint32_t controls = 600;
    uint32_t queries = 20000;
    int repeats = 3;
    app.add_option("--vertices", vertices, "mesh vertex budget");
    app.add_option("--controls", controls, "TPS control count");
    app.add_option("--queries", queries, "TPS query count");
    app.add_option("--repeats", repeats, "repetitions, best time kept");
    CLI11_PARSE(app, argc, argv);

    std::printf("threads: %d\n", max_threads());
    std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    std::mt19937_64 engine(42);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    // Surface error statistics over a full mesh.
    {
        const TriMesh truth = make_template(TemplateShape::bumpy, vertices);
        TriMesh estimate = truth;
        for (Vec3& p : estimate.vertices)
            p += Vec3(unit(engine), unit(engine), unit(engine));
        std::vector<uint32_t> region(truth.vertex_count());
        std::iota(region.begin(), region.end(), 0u);

        const double serial = best_of(
            repeats, [&] { surface_error_stats_serial(truth, estimate, region); });
        const double parallel =
            best_of(repeats, [&] { surface_error_stats(truth, estimate, region); });
        row("surface_error_stats", serial, parallel);
    }

    // TPS evaluation.
    std::vector<Vec3> sources, targets;
    for (uint32_t i = 0; i < controls; ++i) {
        const Vec3 p(100 * unit(engine), 100 * unit(engine), 100 * unit(engine));
        sources.push_back(p);
        targets.push_back(p + Vec3(unit(engine), unit(engine), unit(engine)));
    }
    const TpsModel model = build_tps(sources, targets);
    {
        std::vector<Vec3> query_points;
        for (uint32_t i = 0; i < queries; ++i)
            query_points.emplace_back(120 * unit(engine), 120 * unit(engine), 120 * unit(engine));
        const double serial =
            best_of(repeats, [&] { evaluate_tps_serial(model, query_points); });
        const double parallel = best_of(repeats, [&] { evaluate_tps(model, query_points); });
        row("evaluate_tps", serial, parallel);
    }

    // TPS build: one shared factorization vs three independent solves.
    {
        TpsBuildOptions split;
        split.independent_solves = true;
        const double pooled = best_of(repeats, [&] { build_tps(sources, targets); });
        const double independent =
            best_of(repeats, [&] { build_tps(sources, targets, split); });
        std::printf("%-34s %10.3f ms %10.3f ms (pooled vs 3 solves)\n", "build_tps", pooled * 1e3,
                    independent * 1e3);
    }
    return 0;
}
