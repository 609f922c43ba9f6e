#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>

#include "sx/errors.hpp"
#include "sx/tps.hpp"

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace sx;

namespace {

double weight_scale(const TpsModel& model) {
    double acc = 0.0;
    for (const Vec3& w : model.weights) acc += w.norm();
    return acc;
}

void check_side_conditions(const TpsModel& model) {
    Vec3 sum = Vec3::Zero();
    Eigen::Matrix3d moment = Eigen::Matrix3d::Zero();
    double scale = 0.0;
    for (size_t i = 0; i < model.weights.size(); ++i) {
        sum += model.weights[i];
        moment += model.weights[i] * model.control_points[i].transpose();
        scale += model.weights[i].norm() * (1.0 + model.control_points[i].norm());
    }
    const double bound = 1e-8 * scale + 1e-12;
    CHECK(sum.norm() <= bound);
    CHECK(moment.norm() <= bound);
}

}  // namespace

TEST_CASE("identity data gives the identity map") {
    gen::Rng rng(51);
    const std::vector<Vec3> points = rng.separated_points(12, 40.0, 3.0);
    const TpsModel model = build_tps(points, points);
    CHECK((model.affine_linear - Eigen::Matrix3d::Identity()).norm() <= 1e-9);
    CHECK(model.affine_translation.norm() <= 1e-7);
    CHECK(weight_scale(model) <= 1e-9);
}

TEST_CASE("affine data is absorbed by the polynomial block") {
    gen::Rng rng(52);
    const std::vector<Vec3> sources = rng.separated_points(15, 50.0, 3.0);
    Eigen::Matrix3d a;
    a << 1.2, 0.3, -0.1, 0.0, 0.8, 0.25, -0.4, 0.1, 1.5;
    const Vec3 b(4.0, -2.0, 9.0);

    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(a * p + b);
    const TpsModel model = build_tps(sources, targets);

    CHECK((model.affine_linear - a).norm() <= 1e-9 * a.norm());
    CHECK((model.affine_translation - b).norm() <= 1e-7);
    double data_scale = 0.0;
    for (const Vec3& t : targets) data_scale += t.norm();
    CHECK(weight_scale(model) <= 1e-9 * data_scale);
    check_side_conditions(model);
}

TEST_CASE("solution matches a Gaussian-elimination oracle") {
    gen::Rng rng(53);
    for (const TpsKernel kernel : {TpsKernel::r, TpsKernel::r2_log_r}) {
        const size_t n = 7;
        const std::vector<Vec3> sources = rng.separated_points(n, 30.0, 4.0);
        std::vector<Vec3> targets;
        for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-5.0, 5.0));

        TpsBuildOptions options;
        options.kernel = kernel;
        const TpsModel model = build_tps(sources, targets, options);

        const auto kernel_fn = [&](double r) {
            return kernel == TpsKernel::r ? r : (r > 0.0 ? r * r * std::log(r) : 0.0);
        };
        std::vector<std::vector<double>> system(n + 4, std::vector<double>(n + 4, 0.0));
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = 0; j < n; ++j)
                if (i != j) system[i][j] = kernel_fn((sources[i] - sources[j]).norm());
            system[i][n] = system[n][i] = 1.0;
            for (int k = 0; k < 3; ++k)
                system[i][n + 1 + k] = system[n + 1 + k][i] = sources[i][k];
        }
        for (int coord = 0; coord < 3; ++coord) {
            std::vector<double> rhs(n + 4, 0.0);
            for (size_t i = 0; i < n; ++i) rhs[i] = targets[i][coord];
            const std::vector<double> solution = oracle::gauss_solve(system, rhs);

            double norm = 0.0, diff = 0.0;
            for (size_t i = 0; i < n; ++i) {
                diff += std::pow(model.weights[i][coord] - solution[i], 2);
                norm += solution[i] * solution[i];
            }
            diff += std::pow(model.affine_translation[coord] - solution[n], 2);
            for (int k = 0; k < 3; ++k) {
                diff += std::pow(model.affine_linear(coord, k) - solution[n + 1 + k], 2);
                norm += solution[n + 1 + k] * solution[n + 1 + k];
            }
            CHECK(std::sqrt(diff) <= 1e-8 * (1.0 + std::sqrt(norm)));
        }
    }
}

TEST_CASE("controls are interpolated exactly without regularization") {
    gen::Rng rng(54);
    for (int round = 0; round < 5; ++round) {
        const size_t n = static_cast<size_t>(rng.uniform_int(5, 60));
        const std::vector<Vec3> sources = rng.separated_points(n, 60.0, 2.0);
        std::vector<Vec3> targets;
        for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-8.0, 8.0));

        const TpsModel model = build_tps(sources, targets);
        for (size_t i = 0; i < n; ++i)
            CHECK((model(sources[i]) - targets[i]).norm() <= 1e-6);
        check_side_conditions(model);
    }
}

TEST_CASE("translation equivariance") {
    gen::Rng rng(55);
    const std::vector<Vec3> sources = rng.separated_points(14, 40.0, 3.0);
    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-6.0, 6.0));
    const Vec3 shift(13.0, -4.5, 8.25);

    std::vector<Vec3> sources2, targets2;
    for (const Vec3& p : sources) sources2.push_back(p + shift);
    for (const Vec3& p : targets) targets2.push_back(p + shift);

    const TpsModel a = build_tps(sources, targets);
    const TpsModel b = build_tps(sources2, targets2);
    for (int i = 0; i < 20; ++i) {
        const Vec3 q = rng.vec3(-50.0, 50.0);
        CHECK((a(q) + shift - b(q + shift)).norm() <= 1e-8 * (1.0 + q.norm()));
    }
}

TEST_CASE("the map is smooth away from the controls") {
    gen::Rng rng(56);
    const std::vector<Vec3> sources = rng.separated_points(10, 30.0, 4.0);
    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-5.0, 5.0));
    const TpsModel model = build_tps(sources, targets);

    for (int round = 0; round < 8; ++round) {
        const Vec3 q = rng.vec3(-45.0, 45.0);
        const Vec3 dir = rng.unit_vec3();
        const auto directional = [&](double h) {
            return ((model(q + h * dir) - model(q - h * dir)) / (2.0 * h)).eval();
        };
        const Vec3 coarse = directional(1e-3);
        const Vec3 fine = directional(5e-4);
        CHECK((coarse - fine).norm() <= 1e-3 * (1.0 + coarse.norm()));
    }
}

TEST_CASE("degenerate control sets are reported") {
    gen::Rng rng(57);
    std::vector<Vec3> planar, targets;
    for (int i = 0; i < 9; ++i) {
        const Vec3 p(rng.uniform(-10, 10), rng.uniform(-10, 10), 2.0);
        planar.push_back(p);
        targets.push_back(p + rng.vec3(-1, 1));
    }
    CHECK_THROWS_WITH_AS(build_tps(planar, targets), doctest::Contains("coplanar"),
                         DegenerateError);

    std::vector<Vec3> dup = rng.separated_points(8, 20.0, 2.0);
    dup[5] = dup[2];
    CHECK_THROWS_WITH_AS(build_tps(dup, dup), doctest::Contains("duplicate"), Error);

    const std::vector<Vec3> few = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    CHECK_THROWS_AS(build_tps(few, few), Error);
}

TEST_CASE("an identity model leaves queries unchanged") {
    TpsModel model;  // defaults: identity affine, no controls
    gen::Rng rng(58);
    std::vector<Vec3> queries;
    for (int i = 0; i < 50; ++i) queries.push_back(rng.vec3(-100, 100));
    const std::vector<Vec3> out = evaluate_tps(model, queries);
    for (size_t i = 0; i < queries.size(); ++i) CHECK(out[i] == queries[i]);
}

TEST_CASE("parallel evaluation matches the serial kernel bit for bit") {
    gen::Rng rng(59);
    const std::vector<Vec3> sources = rng.separated_points(40, 50.0, 2.0);
    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-6.0, 6.0));
    const TpsModel model = build_tps(sources, targets);

    std::vector<Vec3> queries;
    for (int i = 0; i < 1000; ++i) queries.push_back(rng.vec3(-80.0, 80.0));

    const std::vector<Vec3> par = evaluate_tps(model, queries);
    const std::vector<Vec3> ser = evaluate_tps_serial(model, queries);
    REQUIRE(par.size() == ser.size());
    CHECK(std::memcmp(par.data(), ser.data(), par.size() * sizeof(Vec3)) == 0);

    // A hand-rolled scalar evaluation as an independent reference.
    for (size_t i = 0; i < 25; ++i) {
        Vec3 expect = model.affine_linear * queries[i] + model.affine_translation;
        for (size_t c = 0; c < model.control_points.size(); ++c)
            expect += model.weights[c] * (queries[i] - model.control_points[c]).norm();
        CHECK((par[i] - expect).norm() <= 1e-12 * (1.0 + expect.norm()));
    }
}

TEST_CASE("pooled and independent solves agree") {
    gen::Rng rng(60);
    const std::vector<Vec3> sources = rng.separated_points(25, 40.0, 2.5);
    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-4.0, 4.0));

    TpsBuildOptions split;
    split.independent_solves = true;
    const TpsModel a = build_tps(sources, targets);
    const TpsModel b = build_tps(sources, targets, split);
    for (size_t i = 0; i < sources.size(); ++i)
        CHECK((a.weights[i] - b.weights[i]).norm() <= 1e-10 * (1.0 + a.weights[i].norm()));
    CHECK((a.affine_linear - b.affine_linear).norm() <= 1e-10);
}

TEST_CASE("regularization trades interpolation for smoothing") {
    gen::Rng rng(61);
    const std::vector<Vec3> sources = rng.separated_points(20, 30.0, 2.0);
    std::vector<Vec3> targets;
    for (const Vec3& p : sources) targets.push_back(p + rng.vec3(-5.0, 5.0));

    TpsBuildOptions smooth;
    smooth.regularization = 10.0;
    const TpsModel model = build_tps(sources, targets, smooth);
    double max_miss = 0.0;
    for (size_t i = 0; i < sources.size(); ++i)
        max_miss = std::max(max_miss, (model(sources[i]) - targets[i]).norm());
    CHECK(max_miss > 1e-3);      // no longer interpolating
    check_side_conditions(model);  // side conditions still hold
}
