#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sx/mesh.hpp"

namespace sx {

enum class TemplateShape { ellipsoid, bumpy };

TemplateShape template_from_name(const std::string& name);  // "ellipsoid" | "bumpy"
std::string template_name(TemplateShape shape);

// Closed desk-scale surface (about 200 mm across) built from a cube-sphere
// grid sized to stay at or below vertex_budget.
TriMesh make_template(TemplateShape shape, uint32_t vertex_budget);

// Stand-in for a real corpus: one template deformed by a random linear
// combination of fixed smooth low-frequency displacement fields, plus
// optional per-vertex noise, plus a random similarity pose per shape.
// Identical spec -> byte-identical corpus.
struct SyntheticCorpusSpec {
    TemplateShape shape = TemplateShape::bumpy;
    uint32_t vertex_budget = 2562;
    uint32_t shape_count = 20;
    uint32_t latent_modes = 4;
    double amplitude_mm = 2.0;
    double noise_mm = 0.0;
    uint64_t seed = 0;
};

std::vector<TriMesh> generate_synthetic_corpus(const SyntheticCorpusSpec& spec);

// Corpus the acceptance experiments run on; also the CLI defaults.
SyntheticCorpusSpec default_corpus_spec();

}  // namespace sx
