#include "sx/synthetic.hpp"

#include <cmath>
#include <random>
#include <tuple>
#include <unordered_map>

#include <Eigen/Geometry>

#include "sx/errors.hpp"
#include "sx/similarity.hpp"

namespace sx {

namespace {

// Deterministic draws on top of the fully specified mt19937_64 stream; the
// std:: distributions are implementation-defined, so they are avoided here.
class RandomStream {
public:
    explicit RandomStream(uint64_t seed) : engine_(seed) {}

    double uniform01() {  // (0, 1]
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01(), u2 = uniform01();
        const double m = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = m * std::sin(a);
        has_spare_ = true;
        return m * std::cos(a);
    }

    Vec3 unit_vector() {
        for (;;) {
            const Vec3 v(normal(), normal(), normal());
            const double n = v.norm();
            if (n > 1e-6) return v / n;
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

constexpr double kScaleMm = 100.0;
const Vec3 kSemiAxes(1.0, 0.78, 0.62);

struct Bump {
    Vec3 direction;
    double amplitude;
    double width;
};

// Fixed protrusions/dents layered on the ellipsoid for the bumpy template.
const Bump kBumps[] = {
    {{1.0, 0.2, 0.1}, 0.12, 0.18},   {{-0.8, 0.5, 0.0}, -0.06, 0.12},
    {{0.1, 1.0, 0.3}, 0.09, 0.25},   {{0.0, -1.0, 0.2}, 0.10, 0.10},
    {{0.3, 0.2, 1.0}, -0.05, 0.20},  {{-0.2, -0.4, -1.0}, 0.08, 0.15},
    {{0.7, -0.7, 0.4}, 0.05, 0.08},  {{-0.6, 0.3, 0.8}, -0.04, 0.30},
};

// Cube-sphere grid: the integer lattice on the surface of an n-subdivided
// cube, shared-edge vertices deduplicated, projected onto the unit sphere.
TriMesh unit_cube_sphere(uint32_t n) {
    TriMesh mesh;
    std::unordered_map<uint64_t, uint32_t> ids;
    const uint64_t stride = n + 1;

    const auto vertex_id = [&](uint64_t i, uint64_t j, uint64_t k) {
        const uint64_t key = (i * stride + j) * stride + k;
        auto [it, inserted] = ids.try_emplace(key, mesh.vertex_count());
        if (inserted) {
            const Vec3 cube(2.0 * static_cast<double>(i) / n - 1.0,
                            2.0 * static_cast<double>(j) / n - 1.0,
                            2.0 * static_cast<double>(k) / n - 1.0);
            mesh.vertices.push_back(cube.normalized());
        }
        return it->second;
    };

    const auto add_face = [&](auto&& lattice) {
        for (uint32_t u = 0; u < n; ++u) {
            for (uint32_t v = 0; v < n; ++v) {
                const uint32_t p00 = std::apply(vertex_id, lattice(u, v));
                const uint32_t p10 = std::apply(vertex_id, lattice(u + 1, v));
                const uint32_t p01 = std::apply(vertex_id, lattice(u, v + 1));
                const uint32_t p11 = std::apply(vertex_id, lattice(u + 1, v + 1));
                mesh.triangles.push_back({p00, p10, p11});
                mesh.triangles.push_back({p00, p11, p01});
            }
        }
    };

    using L = std::array<uint64_t, 3>;
    add_face([n](uint64_t u, uint64_t v) { return L{0, u, v}; });
    add_face([n](uint64_t u, uint64_t v) { return L{n, u, v}; });
    add_face([n](uint64_t u, uint64_t v) { return L{u, 0, v}; });
    add_face([n](uint64_t u, uint64_t v) { return L{u, n, v}; });
    add_face([n](uint64_t u, uint64_t v) { return L{u, v, 0}; });
    add_face([n](uint64_t u, uint64_t v) { return L{u, v, n}; });

    // Orient every triangle outward while the surface is still the sphere.
    for (Tri& t : mesh.triangles) {
        const Vec3 &a = mesh.vertices[t[0]], &b = mesh.vertices[t[1]], &c = mesh.vertices[t[2]];
        if ((b - a).cross(c - a).dot(a + b + c) < 0.0) std::swap(t[1], t[2]);
    }
    return mesh;
}

}  // namespace

TemplateShape template_from_name(const std::string& name) {
    if (name == "ellipsoid") return TemplateShape::ellipsoid;
    if (name == "bumpy") return TemplateShape::bumpy;
    throw Error("unknown template '" + name + "' (expected ellipsoid|bumpy)");
}

std::string template_name(TemplateShape shape) {
    return shape == TemplateShape::ellipsoid ? "ellipsoid" : "bumpy";
}

TriMesh make_template(TemplateShape shape, uint32_t vertex_budget) {
    // 6n^2 + 2 vertices; pick the subdivision that stays within budget.
    uint32_t n = vertex_budget > 8
                     ? static_cast<uint32_t>(std::sqrt((vertex_budget - 2) / 6.0))
                     : 1;
    n = std::max<uint32_t>(n, 1);
    TriMesh mesh = unit_cube_sphere(n);

    for (Vec3& p : mesh.vertices) {
        double radial = 1.0;
        if (shape == TemplateShape::bumpy) {
            for (const Bump& bump : kBumps)
                radial += bump.amplitude *
                          std::exp((p.dot(bump.direction.normalized()) - 1.0) / bump.width);
        }
        p = kScaleMm * kSemiAxes.cwiseProduct(radial * p);
    }
    return mesh;
}

std::vector<TriMesh> generate_synthetic_corpus(const SyntheticCorpusSpec& spec) {
    if (spec.latent_modes < 1) throw Error("synthetic corpus: need at least 1 latent mode");
    if (spec.shape_count < spec.latent_modes + 2)
        throw Error("synthetic corpus: need at least latent_modes + 2 shapes");

    const TriMesh base = make_template(spec.shape, spec.vertex_budget);
    const uint32_t v = base.vertex_count();
    RandomStream rng(spec.seed);

    // Fixed smooth low-frequency displacement fields, one per latent mode,
    // normalized to unit RMS over the template.
    std::vector<std::vector<Vec3>> fields(spec.latent_modes);
    for (auto& field : fields) {
        const Vec3 dir_a = rng.unit_vector();
        const Vec3 wave_a = rng.unit_vector();
        const double wavelength_a = rng.uniform(0.8, 2.0) * 2.0 * kScaleMm;
        const double phase_a = rng.uniform(0.0, 2.0 * M_PI);
        const Vec3 dir_b = rng.unit_vector();
        const Vec3 wave_b = rng.unit_vector();
        const double wavelength_b = rng.uniform(0.8, 2.0) * 2.0 * kScaleMm;
        const double phase_b = rng.uniform(0.0, 2.0 * M_PI);

        field.resize(v);
        double ss = 0.0;
        for (uint32_t i = 0; i < v; ++i) {
            const Vec3& p = base.vertices[i];
            field[i] = dir_a * std::sin(2.0 * M_PI * wave_a.dot(p) / wavelength_a + phase_a) +
                       0.5 * dir_b * std::cos(2.0 * M_PI * wave_b.dot(p) / wavelength_b + phase_b);
            ss += field[i].squaredNorm();
        }
        const double rms = std::sqrt(ss / v);
        for (Vec3& f : field) f /= rms;
    }

    std::vector<TriMesh> corpus;
    corpus.reserve(spec.shape_count);
    for (uint32_t s = 0; s < spec.shape_count; ++s) {
        std::vector<double> coeffs(spec.latent_modes);
        for (uint32_t k = 0; k < spec.latent_modes; ++k)
            coeffs[k] = rng.normal() * spec.amplitude_mm / std::sqrt(1.0 + k);

        TriMesh mesh = base;
        for (uint32_t i = 0; i < v; ++i)
            for (uint32_t k = 0; k < spec.latent_modes; ++k)
                mesh.vertices[i] += coeffs[k] * fields[k][i];

        if (spec.noise_mm > 0.0)
            for (Vec3& p : mesh.vertices)
                p += spec.noise_mm * Vec3(rng.normal(), rng.normal(), rng.normal());

        SimilarityTransform pose;
        const Vec3 axis = rng.unit_vector();
        const double angle = rng.uniform(-0.25, 0.25);
        pose.rotation = Eigen::AngleAxisd(angle, axis).toRotationMatrix();
        pose.scale = std::exp(rng.uniform(-0.06, 0.06));
        pose.translation = Vec3(rng.uniform(-15.0, 15.0), rng.uniform(-15.0, 15.0),
                                rng.uniform(-15.0, 15.0));
        corpus.push_back(transformed(mesh, pose));
    }
    return corpus;
}

SyntheticCorpusSpec default_corpus_spec() {
    SyntheticCorpusSpec spec;
    spec.shape = TemplateShape::bumpy;
    spec.vertex_budget = 20000;
    spec.shape_count = 20;
    spec.latent_modes = 16;
    spec.amplitude_mm = 6.0;
    spec.noise_mm = 0.02;
    spec.seed = 20140719;
    return spec;
}

}  // namespace sx
