// Command-line surface over the shape-model and extrapolation library.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sx/errors.hpp"
#include "sx/extrapolate.hpp"
#include "sx/harness.hpp"
#include "sx/mesh_io.hpp"
#include "sx/model_io.hpp"
#include "sx/ssm.hpp"
#include "sx/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Directories expand to the meshes they contain, sorted by name.
std::vector<std::string> expand_mesh_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> paths;
    for (const std::string& input : inputs) {
        if (fs::is_directory(input)) {
            std::vector<std::string> found;
            for (const auto& entry : fs::directory_iterator(input)) {
                const std::string ext = entry.path().extension().string();
                if (ext == ".ply" || ext == ".obj") found.push_back(entry.path().string());
            }
            std::sort(found.begin(), found.end());
            paths.insert(paths.end(), found.begin(), found.end());
        } else {
            paths.push_back(input);
        }
    }
    if (paths.empty()) throw sx::Error("no mesh files found");
    return paths;
}

std::vector<sx::TriMesh> load_corpus(const std::vector<std::string>& inputs) {
    std::vector<sx::TriMesh> corpus;
    for (const std::string& path : expand_mesh_paths(inputs))
        corpus.push_back(sx::read_mesh(path));
    for (size_t i = 1; i < corpus.size(); ++i)
        if (!sx::same_topology(corpus[0], corpus[i]))
            throw sx::TopologyError("mesh " + std::to_string(i) +
                                    " does not match the first mesh's topology");
    return corpus;
}

// "5:50:5", "5,10,20" or a single number.
std::vector<double> parse_fractions(const std::string& text) {
    std::vector<double> fractions;
    if (text.find(':') != std::string::npos) {
        double start, stop, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &stop, &step) != 3 || step <= 0)
            throw sx::Error("bad fraction range '" + text + "' (expected start:stop:step)");
        for (double f = start; f <= stop + 1e-9; f += step) fractions.push_back(f);
    } else {
        std::string token;
        std::istringstream ss(text);
        while (std::getline(ss, token, ',')) {
            if (token.empty()) continue;
            fractions.push_back(std::stod(token));
        }
    }
    if (fractions.empty()) throw sx::Error("no fractions given");
    return fractions;
}

std::vector<sx::Method> parse_methods(const std::string& text) {
    std::vector<sx::Method> methods;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        if (!token.empty()) methods.push_back(sx::method_from_name(token));
    }
    if (methods.empty()) throw sx::Error("no methods given");
    return methods;
}

std::vector<uint32_t> known_complement(uint32_t vertex_count,
                                       const std::vector<uint32_t>& unknown) {
    std::vector<uint8_t> mask(vertex_count, 1);
    for (uint32_t u : unknown) {
        if (u >= vertex_count) throw sx::Error("partition index out of range for this mesh");
        mask[u] = 0;
    }
    std::vector<uint32_t> known;
    for (uint32_t v = 0; v < vertex_count; ++v)
        if (mask[v]) known.push_back(v);
    return known;
}

ordered_json timings_json(const sx::StageTimings& t) {
    return {{"projection", t.projection},
            {"band", t.band},
            {"tps_build", t.tps_build},
            {"tps_evaluate", t.tps_evaluate},
            {"assembly", t.assembly}};
}

ordered_json trial_json(const sx::TrialReport& trial) {
    ordered_json j;
    j["left_out"] = trial.left_out;
    j["fraction"] = trial.fraction;
    j["method"] = sx::method_name(trial.method);
    j["failed"] = trial.failed;
    if (trial.failed) {
        j["failure"] = trial.failure;
        return j;
    }
    j["rms_vertex"] = trial.stats.rms_vertex;
    j["rms_surface"] = trial.stats.rms_surface;
    j["max_surface"] = trial.stats.max_surface;
    j["seam_max"] = trial.seam.max;
    j["seam_rms"] = trial.seam.rms;
    j["unknown_count"] = trial.unknown_count;
    j["overlap_count"] = trial.overlap_count;
    j["timings"] = timings_json(trial.timings);
    return j;
}

std::string summary_text(const sx::LooResult& result, const sx::LooOptions& options,
                         size_t corpus_size, uint32_t vertex_count) {
    char buf[256];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "leave-one-out extrapolation: %zu shapes, %u vertices, axis %s, %zu fractions\n",
                  corpus_size, vertex_count, sx::axis_name(options.axis).c_str(),
                  options.fractions.size());
    out += buf;
    out += "fraction  method   trials  rms_vertex[mm]      rms_surface[mm]     max_surface[mm]     seam_max[mm]\n";
    for (const sx::LooAggregate& agg : result.aggregates) {
        std::snprintf(buf, sizeof buf,
                      "%7.1f%%  %-8s %5d   %8.4f +-%7.4f  %8.4f +-%7.4f  %8.4f +-%7.4f  %8.4f\n",
                      agg.fraction, sx::method_name(agg.method).c_str(), agg.trial_count,
                      agg.rms_vertex.mean, agg.rms_vertex.stddev, agg.rms_surface.mean,
                      agg.rms_surface.stddev, agg.max_surface.mean, agg.max_surface.stddev,
                      agg.seam_max.mean);
        out += buf;
    }
    for (const sx::Improvement& imp : result.improvements) {
        std::snprintf(buf, sizeof buf,
                      "tps improvement vs %-8s rms_vertex %7.4f  rms_surface %7.4f  "
                      "max_surface %7.4f  [mm, mean over fractions]\n",
                      sx::method_name(imp.baseline).c_str(), imp.rms_vertex, imp.rms_surface,
                      imp.max_surface);
        out += buf;
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw sx::Error("cannot open '" + path + "' for writing");
    out << text;
}

// --- subcommand bodies ---------------------------------------------------

int run_gen_synthetic(const std::string& template_name, uint32_t shapes, uint32_t modes,
                      double amplitude, double noise, uint64_t seed, uint32_t budget,
                      const std::string& out_dir) {
    sx::SyntheticCorpusSpec spec;
    spec.shape = sx::template_from_name(template_name);
    spec.shape_count = shapes;
    spec.latent_modes = modes;
    spec.amplitude_mm = amplitude;
    spec.noise_mm = noise;
    spec.seed = seed;
    spec.vertex_budget = budget;

    const auto corpus = sx::generate_synthetic_corpus(spec);
    fs::create_directories(out_dir);
    char name[64];
    for (size_t s = 0; s < corpus.size(); ++s) {
        std::snprintf(name, sizeof name, "shape_%03zu.ply", s);
        sx::write_mesh((fs::path(out_dir) / name).string(), corpus[s]);
    }
    std::cout << "wrote " << corpus.size() << " meshes (" << corpus[0].vertex_count()
              << " vertices, " << corpus[0].triangle_count() << " triangles) to " << out_dir
              << "\n";
    return 0;
}

int run_build_ssm(const std::vector<std::string>& meshes, const std::string& out_model,
                  double gpa_tol, int max_iters) {
    const auto corpus = load_corpus(meshes);
    const sx::GpaResult gpa = sx::generalized_procrustes(corpus, gpa_tol, max_iters);
    const sx::ShapeModel model = sx::build_ssm(gpa.aligned);
    sx::write_model(out_model, model);
    std::cout << "model: " << model.vertex_count() << " vertices, " << model.num_modes()
              << " modes, " << model.sample_count << " samples, gpa iterations "
              << gpa.iterations << "\n";
    return 0;
}

int run_project(const std::string& model_path, const std::string& mesh_path,
                const std::string& partition_path, int num_modes, const std::string& out_mesh,
                const std::string& out_coeffs) {
    const sx::ShapeModel model = sx::read_model(model_path);
    const sx::TriMesh mesh = sx::read_mesh(mesh_path);

    std::vector<uint32_t> known(mesh.vertex_count());
    std::iota(known.begin(), known.end(), 0u);
    if (!partition_path.empty()) {
        const sx::PartitionFileData partition = sx::read_partition(partition_path);
        if (partition.vertex_count != mesh.vertex_count())
            throw sx::Error("partition vertex count does not match the mesh");
        known = known_complement(mesh.vertex_count(), partition.unknown);
    }

    sx::ProjectOptions options;
    options.num_modes = num_modes;
    const sx::ProjectionResult proj = sx::project(mesh, known, model, options);

    if (!out_mesh.empty()) sx::write_mesh(out_mesh, proj.instance);
    if (!out_coeffs.empty()) {
        std::string text;
        char buf[64];
        for (Eigen::Index i = 0; i < proj.coefficients.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g\n", proj.coefficients(i));
            text += buf;
        }
        write_text_file(out_coeffs, text);
    }
    std::cout << "projected with " << proj.coefficients.size() << " modes\n";
    return 0;
}

int run_extrapolate(const std::string& model_path, const std::string& mesh_path,
                    const std::string& partition_path, const std::string& method_name,
                    int depth_flag, const std::string& kernel_name, double tps_reg,
                    const std::string& out_mesh, const std::string& timings_out) {
    const sx::TriMesh mesh = sx::read_mesh(mesh_path);
    const sx::PartitionFileData partition_file = sx::read_partition(partition_path);
    if (partition_file.vertex_count != mesh.vertex_count())
        throw sx::Error("partition vertex count does not match the mesh");

    // Nothing to extrapolate: the completed mesh is the input itself.
    if (partition_file.unknown.empty()) {
        if (!out_mesh.empty()) sx::write_mesh(out_mesh, mesh);
        if (!timings_out.empty())
            write_text_file(timings_out, timings_json(sx::StageTimings{}).dump(2) + "\n");
        std::cout << "empty unknown set, output equals input\n";
        return 0;
    }

    const sx::Method method = sx::method_from_name(method_name);
    uint32_t depth = 0;
    if (method == sx::Method::feather) depth = sx::kDefaultFeatherDepth;
    if (method == sx::Method::tps) depth = sx::kDefaultTpsDepth;
    if (depth_flag >= 0) depth = static_cast<uint32_t>(depth_flag);
    if (method == sx::Method::feather && depth < 1)
        throw sx::Error("feathering needs --depth >= 1");

    const sx::ShapeModel model = sx::read_model(model_path);
    const std::vector<uint32_t> known =
        known_complement(mesh.vertex_count(), partition_file.unknown);

    sx::StageTimings timings;
    sx::Stopwatch timer;
    const sx::ProjectionResult proj = sx::project(mesh, known, model);
    timings.projection = timer.seconds();

    timer.restart();
    const sx::RegionPartition partition =
        sx::compute_partition(mesh, partition_file.unknown, depth);
    timings.band = timer.seconds();

    sx::TpsBuildOptions tps_options;
    if (kernel_name == "r") tps_options.kernel = sx::TpsKernel::r;
    else if (kernel_name == "r2logr") tps_options.kernel = sx::TpsKernel::r2_log_r;
    else throw sx::Error("unknown kernel '" + kernel_name + "' (expected r|r2logr)");
    tps_options.regularization = tps_reg;

    sx::ExtrapolationResult result;
    switch (method) {
        case sx::Method::projection_only:
            result = sx::extrapolate_po(mesh, partition, proj.instance);
            break;
        case sx::Method::feather:
            result = sx::extrapolate_feather(mesh, partition, proj.instance);
            break;
        case sx::Method::tps:
            result = sx::extrapolate_tps(mesh, partition, proj.instance, tps_options);
            break;
    }
    result.timings.projection = timings.projection;
    result.timings.band = timings.band;

    if (!out_mesh.empty()) sx::write_mesh(out_mesh, result.mesh);
    if (!timings_out.empty())
        write_text_file(timings_out, timings_json(result.timings).dump(2) + "\n");
    std::cout << sx::method_name(method) << ": filled " << partition.unknown.size()
              << " vertices (overlap " << partition.overlap.size() << ")\n";
    return 0;
}

int run_stats(const std::string& truth_path, const std::string& estimate_path,
              const std::string& partition_path, const std::string& region_name,
              uint32_t depth) {
    const sx::TriMesh truth = sx::read_mesh(truth_path);
    const sx::TriMesh estimate = sx::read_mesh(estimate_path);
    const sx::PartitionFileData partition_file = sx::read_partition(partition_path);
    if (partition_file.vertex_count != truth.vertex_count())
        throw sx::Error("partition vertex count does not match the mesh");

    std::vector<uint32_t> region;
    if (region_name == "unknown") {
        region = partition_file.unknown;
    } else if (region_name == "unknown+overlap") {
        const sx::RegionPartition partition =
            sx::compute_partition(truth, partition_file.unknown, depth);
        std::set_union(partition.unknown.begin(), partition.unknown.end(),
                       partition.overlap.begin(), partition.overlap.end(),
                       std::back_inserter(region));
    } else {
        throw sx::Error("unknown region '" + region_name + "' (expected unknown|unknown+overlap)");
    }
    if (region.empty()) throw sx::Error("evaluation region is empty");

    const sx::ErrorStats stats = sx::surface_error_stats(truth, estimate, region);
    ordered_json j;
    j["rms_surface"] = stats.rms_surface;
    j["max_surface"] = stats.max_surface;
    j["rms_vertex"] = stats.rms_vertex;
    j["vertex_count"] = region.size();
    std::cout << j.dump() << "\n";
    return 0;
}

int run_loo_eval(const std::vector<std::string>& meshes, const std::string& fractions_text,
                 const std::string& axis_name_text, const std::string& direction_text,
                 const std::string& methods_text, uint32_t d_feather, uint32_t d_tps,
                 const std::string& report_out, const std::string& heatmaps_out) {
    const auto corpus = load_corpus(meshes);

    sx::LooOptions options;
    options.fractions = parse_fractions(fractions_text);
    options.methods = parse_methods(methods_text);
    options.axis = sx::axis_from_name(axis_name_text);
    if (direction_text == "min") options.direction = sx::CropDirection::from_min;
    else if (direction_text == "max") options.direction = sx::CropDirection::from_max;
    else throw sx::Error("unknown direction '" + direction_text + "' (expected min|max)");
    options.feather_depth = d_feather;
    options.tps_depth = d_tps;
    options.collect_heatmaps = !heatmaps_out.empty();

    const sx::LooResult result = sx::run_loo_extrapolation(corpus, options);

    const std::string summary =
        summary_text(result, options, corpus.size(), corpus[0].vertex_count());
    std::cout << summary;

    if (!report_out.empty()) {
        std::string lines;
        for (const sx::TrialReport& trial : result.trials) lines += trial_json(trial).dump() + "\n";
        write_text_file(report_out, lines);
        write_text_file(report_out + ".summary.txt", summary);
        std::cout << "report: " << report_out << "\n";
    }
    if (!heatmaps_out.empty()) {
        fs::create_directories(heatmaps_out);
        char name[96];
        for (const sx::HeatmapSlot& slot : result.heatmaps) {
            bool any = false;
            for (Eigen::Index i = 0; i < slot.accumulator.count.size(); ++i)
                if (slot.accumulator.count(i) > 0) any = true;
            if (!any) continue;
            const sx::HeatmapMesh heat = sx::emit_heatmap(result.heatmap_base, slot.accumulator);
            std::snprintf(name, sizeof name, "heatmap_%s_f%02.0f.ply",
                          sx::method_name(slot.method).c_str(), slot.fraction);
            sx::WriteMeshOptions wopt;
            wopt.quality = heat.mean_distance;
            sx::write_mesh((fs::path(heatmaps_out) / name).string(), heat.mesh, wopt);
        }
        std::cout << "heatmaps: " << heatmaps_out << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statistical shape models and partial-mesh extrapolation"};
    app.require_subcommand(1);

    const sx::SyntheticCorpusSpec defaults = sx::default_corpus_spec();

    // gen-synthetic
    auto* gen = app.add_subcommand("gen-synthetic", "generate a synthetic mesh corpus");
    std::string gen_template = sx::template_name(defaults.shape);
    uint32_t gen_shapes = defaults.shape_count, gen_modes = defaults.latent_modes;
    uint32_t gen_budget = defaults.vertex_budget;
    double gen_amplitude = defaults.amplitude_mm, gen_noise = defaults.noise_mm;
    uint64_t gen_seed = defaults.seed;
    std::string gen_out;
    gen->add_option("--template", gen_template, "ellipsoid|bumpy");
    gen->add_option("--shapes", gen_shapes, "number of shapes");
    gen->add_option("--modes", gen_modes, "latent deformation modes");
    gen->add_option("--amplitude-mm", gen_amplitude, "deformation amplitude");
    gen->add_option("--noise-mm", gen_noise, "per-vertex noise");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("--vertex-budget", gen_budget, "approximate vertices per mesh");
    gen->add_option("--out-dir", gen_out, "output directory")->required();

    // build-ssm
    auto* build = app.add_subcommand("build-ssm", "align a corpus and build the shape model");
    std::vector<std::string> build_meshes;
    std::string build_out;
    double build_tol = 1e-9;
    int build_iters = 100;
    build->add_option("--meshes", build_meshes, "mesh files or directories")->required();
    build->add_option("--out-model", build_out, "output model file")->required();
    build->add_option("--gpa-tol", build_tol, "mean-movement convergence tolerance");
    build->add_option("--max-iters", build_iters, "alignment iteration cap");

    // project
    auto* proj = app.add_subcommand("project", "project a (partial) mesh onto a model");
    std::string proj_model, proj_mesh, proj_partition, proj_out_mesh, proj_out_coeffs;
    int proj_modes = -1;
    proj->add_option("--model", proj_model)->required();
    proj->add_option("--mesh", proj_mesh)->required();
    proj->add_option("--partition", proj_partition, "partition file; omit for a full projection");
    proj->add_option("--num-modes", proj_modes, "modes to use (-1 = all)");
    proj->add_option("--out-mesh", proj_out_mesh, "write the model instance here");
    proj->add_option("--out-coeffs", proj_out_coeffs, "write mode coefficients here");

    // extrapolate
    auto* ex = app.add_subcommand("extrapolate", "complete a partial mesh");
    std::string ex_model, ex_mesh, ex_partition, ex_method = "tps", ex_kernel = "r";
    std::string ex_out_mesh, ex_timings;
    int ex_depth = -1;
    double ex_reg = 0.0;
    ex->add_option("--model", ex_model)->required();
    ex->add_option("--mesh", ex_mesh)->required();
    ex->add_option("--partition", ex_partition)->required();
    ex->add_option("--method", ex_method, "po|feather|tps");
    ex->add_option("--depth", ex_depth, "band depth (default 20 feather, 3 tps)");
    ex->add_option("--tps-kernel", ex_kernel, "r|r2logr");
    ex->add_option("--tps-reg", ex_reg, "TPS regularization");
    ex->add_option("--out-mesh", ex_out_mesh, "completed mesh output");
    ex->add_option("--timings-out", ex_timings, "stage timings JSON output");

    // loo-eval
    auto* loo = app.add_subcommand("loo-eval", "leave-one-out cropping experiment");
    std::vector<std::string> loo_meshes;
    std::string loo_fractions = "5:50:5", loo_axis = "x", loo_direction = "min";
    std::string loo_methods = "po,feather,tps", loo_report, loo_heatmaps;
    uint32_t loo_df = sx::kDefaultFeatherDepth, loo_dt = sx::kDefaultTpsDepth;
    loo->add_option("--meshes", loo_meshes, "mesh files or directories")->required();
    loo->add_option("--fractions", loo_fractions, "start:stop:step or comma list, percent");
    loo->add_option("--axis", loo_axis, "x|y|z");
    loo->add_option("--direction", loo_direction, "min|max end of the axis");
    loo->add_option("--methods", loo_methods, "comma list of po|feather|tps");
    loo->add_option("--d-feather", loo_df, "feather band depth");
    loo->add_option("--d-tps", loo_dt, "tps band depth");
    loo->add_option("--report-out", loo_report, "trial records (JSON lines)");
    loo->add_option("--heatmaps-out", loo_heatmaps, "directory for heatmap meshes");

    // stats
    auto* st = app.add_subcommand("stats", "error statistics between two meshes");
    std::string st_truth, st_estimate, st_partition, st_region = "unknown";
    uint32_t st_depth = sx::kDefaultFeatherDepth;
    st->add_option("--truth", st_truth)->required();
    st->add_option("--estimate", st_estimate)->required();
    st->add_option("--partition", st_partition)->required();
    st->add_option("--region", st_region, "unknown|unknown+overlap");
    st->add_option("--depth", st_depth, "band depth for unknown+overlap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed())
            return run_gen_synthetic(gen_template, gen_shapes, gen_modes, gen_amplitude,
                                     gen_noise, gen_seed, gen_budget, gen_out);
        if (build->parsed()) return run_build_ssm(build_meshes, build_out, build_tol, build_iters);
        if (proj->parsed())
            return run_project(proj_model, proj_mesh, proj_partition, proj_modes, proj_out_mesh,
                               proj_out_coeffs);
        if (ex->parsed())
            return run_extrapolate(ex_model, ex_mesh, ex_partition, ex_method, ex_depth,
                                   ex_kernel, ex_reg, ex_out_mesh, ex_timings);
        if (loo->parsed())
            return run_loo_eval(loo_meshes, loo_fractions, loo_axis, loo_direction, loo_methods,
                                loo_df, loo_dt, loo_report, loo_heatmaps);
        if (st->parsed()) return run_stats(st_truth, st_estimate, st_partition, st_region, st_depth);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
