#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cbctforge/affine.hpp"
#include "cbctforge/compose.hpp"
#include "cbctforge/config.hpp"
#include "cbctforge/ganplan.hpp"
#include "cbctforge/metrics.hpp"
#include "cbctforge/normalize.hpp"
#include "cbctforge/osart.hpp"
#include "cbctforge/parallel.hpp"
#include "cbctforge/plahe.hpp"
#include "cbctforge/projector.hpp"
#include "cbctforge/volume_io.hpp"

namespace {

using namespace cbctforge;
using nlohmann::json;

constexpr const char* kVersion = "cbctforge 1.0.0";

int fail(const std::string& code, const std::string& message) {
    std::cerr << "error: " << message << '\n';
    std::cerr << json{{"error", {{"code", code}, {"message", message}}}}.dump() << '\n';
    return 1;
}

// VOL1 unless the extension says MetaImage.
Volume3 read_any_volume(const std::string& path) {
    const auto ext = std::filesystem::path(path).extension().string();
    return read_volume(path, ext == ".mha" ? VolumeFormat::MetaImage : VolumeFormat::VOL1);
}

// Scans arrive in HU; pass normalized volumes straight through.
Volume3 as_norm01(const Volume3& v, const char* what) {
    if (v.unit == Unit::Norm01) return v;
    if (v.unit == Unit::HU) return normalize01_ct(v);
    throw std::invalid_argument(std::string(what) + ": expected a HU or norm01 volume, got " +
                                unit_name(v.unit));
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path);
}

int run_extract(const std::string& cbct_path, const std::string& params_path,
                const std::string& out_path) {
    const Volume3 cbct = read_any_volume(cbct_path);
    const PlaheParams params = plahe_params_from_json(load_json_file(params_path));
    const ArtifactImage artifact = extract_artifact(as_norm01(cbct, "extract"), params);
    write_volume(artifact.base, out_path);
    std::cout << "wrote artifact " << out_path << '\n';
    return 0;
}

int run_inject(const std::string& pct_path, const std::string& artifact_path,
               const std::string& out_path) {
    const Volume3 pct = read_any_volume(pct_path);
    ArtifactImage artifact;
    artifact.base = read_volume(artifact_path);
    const Volume3 injected = inject_artifact(as_norm01(pct, "inject"), artifact);
    write_volume(injected, out_path);
    std::cout << "wrote injected volume " << out_path << '\n';
    return 0;
}

int run_project(const std::string& vol_path, const std::string& geometry_path, double noise_sigma,
                std::uint64_t seed, const std::string& out_path) {
    const Volume3 v = read_any_volume(vol_path);
    ConeBeamGeometry g;
    if (!geometry_path.empty()) g = geometry_from_json(load_json_file(geometry_path));
    ProjectionStack p = forward_project(as_norm01(v, "project"), g);
    p = add_projection_noise(p, noise_sigma, seed);
    write_projections(p, out_path);
    std::cout << "wrote projections " << out_path << '\n';
    return 0;
}

int run_reconstruct(const std::string& proj_path, const std::string& grid_path,
                    const std::string& osart_path, const std::string& out_path,
                    const std::string& report_path) {
    const ProjectionStack p = read_projections(proj_path);
    const Grid3 grid = grid_from_json(load_json_file(grid_path));
    OsartConfig cfg;
    if (!osart_path.empty()) cfg = osart_config_from_json(load_json_file(osart_path));
    const auto [recon, rep] = osart_reconstruct(p, grid, cfg);
    write_volume(recon, out_path);
    if (!report_path.empty())
        write_json_file(json{{"residuals", rep.residuals}, {"elapsed_s", rep.elapsed_s}},
                        report_path);
    std::cout << "wrote reconstruction " << out_path << '\n';
    return 0;
}

int run_compose(const std::string& pct_path, const std::string& cbct_path,
                const std::string& labels_path, const std::string& config_path,
                const std::string& outdir) {
    const PipelineConfig cfg = load_pipeline_config(config_path);
    const Volume3 pct = read_any_volume(pct_path);
    const Volume3 cbct = read_any_volume(cbct_path);
    const LabelVolume labels = read_label_volume(labels_path, cfg.label_scheme);
    const DatasetManifest manifest = compose_dataset(pct, cbct, labels, cfg, outdir,
                                                     {pct_path, cbct_path, labels_path});
    std::cout << "wrote " << manifest.records.size() << " samples to " << outdir << '\n';
    return 0;
}

int run_evaluate(const std::vector<std::string>& preds, const std::vector<std::string>& truths,
                 const std::vector<std::string>& pred_labels,
                 const std::vector<std::string>& truth_labels, const std::string& scheme_name_str,
                 const std::string& outdir) {
    if (preds.size() != truths.size())
        throw std::invalid_argument("evaluate: --pred and --truth counts differ");
    if (pred_labels.size() != truth_labels.size())
        throw std::invalid_argument("evaluate: --pred-labels and --truth-labels counts differ");
    if (!pred_labels.empty() && pred_labels.size() != preds.size())
        throw std::invalid_argument("evaluate: label count must match case count");

    const LabelScheme scheme = scheme_from_name(scheme_name_str);
    std::vector<EvalCase> cases;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        EvalCase c;
        c.name = std::filesystem::path(preds[i]).stem().string();
        if (!seen.insert(c.name).second)
            throw std::invalid_argument("evaluate: duplicate case name \"" + c.name +
                                        "\" (case names come from --pred file stems)");
        c.pred = read_any_volume(preds[i]);
        c.truth = read_any_volume(truths[i]);
        if (!pred_labels.empty()) {
            c.pred_labels = read_label_volume(pred_labels[i], scheme);
            c.truth_labels = read_label_volume(truth_labels[i], scheme);
        }
        cases.push_back(std::move(c));
    }
    report(cases, outdir);
    std::cout << "wrote report to " << outdir << '\n';
    return 0;
}

int run_plan_net(const std::string& arch, std::vector<int> dims) {
    if (dims.empty()) dims = {128, 128, 128};
    if (dims.size() == 1) dims = {dims[0], dims[0], dims[0]};
    if (dims.size() != 3)
        throw std::invalid_argument("plan-net: --input-dims takes 1 or 3 extents");
    const auto layers = arch == "generator" ? generator_layers() : discriminator_layers();
    const NetPlan plan = shape_plan({dims[0], dims[1], dims[2]}, layers);

    json jlayers = json::array();
    for (std::size_t l = 0; l < plan.layers.size(); ++l) {
        const LayerSpec& s = plan.layers[l];
        jlayers.push_back({{"kernel", s.kernel},
                           {"stride", s.stride},
                           {"pad", s.pad},
                           {"transposed", s.transposed},
                           {"output_dims", plan.output_dims[l]}});
    }
    json out{{"arch", arch},
             {"input_dims", plan.input_dims},
             {"layers", std::move(jlayers)},
             {"output_dims", plan.output_dims.back()},
             {"receptive_field",
              plan.receptive_field > 0 ? json(plan.receptive_field) : json(nullptr)}};
    if (plan.receptive_field > 0) out["receptive_field_chain"] = receptive_field_chain(layers);
    std::cout << out.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-based CBCT synthesis and evaluation toolkit"};
    app.set_version_flag("--version", kVersion);
    bool print_schema = false;
    app.add_flag("--schema", print_schema, "print the pipeline config JSON schema and exit");
    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (default: hardware parallelism)")
        ->envname("CBCT_FORGE_THREADS");

    auto* extract = app.add_subcommand("extract", "extract an artifact image from a CBCT scan");
    std::string ex_cbct, ex_params, ex_out;
    extract->add_option("--cbct", ex_cbct, "CBCT volume (VOL1 or .mha)")->required();
    extract->add_option("--params", ex_params, "PL-AHE parameter JSON file")->required();
    extract->add_option("--out", ex_out, "output VOL1 path")->required();

    auto* inject = app.add_subcommand("inject", "inject an artifact image into a planning CT");
    std::string in_pct, in_artifact, in_out;
    inject->add_option("--pct", in_pct, "planning CT volume (VOL1 or .mha)")->required();
    inject->add_option("--artifact", in_artifact, "artifact VOL1 from extract")->required();
    inject->add_option("--out", in_out, "output VOL1 path (norm01)")->required();

    auto* project = app.add_subcommand("project", "cone-beam forward projection");
    std::string pr_vol, pr_geom, pr_out;
    double pr_sigma = 0.0;
    std::uint64_t pr_seed = 0;
    project->add_option("--vol", pr_vol, "volume to project (HU or norm01)")->required();
    project->add_option("--geometry", pr_geom, "cone-beam geometry JSON (default geometry if omitted)");
    project->add_option("--noise-sigma", pr_sigma, "Gaussian noise level relative to the maximum");
    project->add_option("--seed", pr_seed, "noise seed");
    project->add_option("--out", pr_out, "output projection stem")->required();

    auto* reconstruct = app.add_subcommand("reconstruct", "OS-SART reconstruction");
    std::string re_proj, re_grid, re_cfg, re_out, re_report;
    reconstruct->add_option("--proj", re_proj, "projection stack (.proj.json)")->required();
    reconstruct->add_option("--grid", re_grid, "target grid JSON {dims, spacing, origin}")->required();
    reconstruct->add_option("--osart-config", re_cfg, "OS-SART config JSON (defaults if omitted)");
    reconstruct->add_option("--out", re_out, "output VOL1 path (norm01)")->required();
    reconstruct->add_option("--report", re_report, "residual/timing report JSON path");

    auto* compose = app.add_subcommand("compose", "expand one registered triple into a paired dataset");
    std::string co_pct, co_cbct, co_labels, co_config, co_outdir;
    compose->add_option("--pct", co_pct, "planning CT (HU)")->required();
    compose->add_option("--cbct", co_cbct, "CBCT scan (HU)")->required();
    compose->add_option("--labels", co_labels, "organ label VOL1")->required();
    compose->add_option("--config", co_config, "pipeline config JSON")->required();
    compose->add_option("--outdir", co_outdir, "output directory")->required();

    auto* evaluate = app.add_subcommand("evaluate", "image/segmentation metric reports");
    std::vector<std::string> ev_pred, ev_truth, ev_pred_labels, ev_truth_labels;
    std::string ev_scheme = "eso4", ev_outdir;
    evaluate->add_option("--pred", ev_pred, "predicted volume (repeat per case)")->required();
    evaluate->add_option("--truth", ev_truth, "ground-truth volume (repeat per case)")->required();
    evaluate->add_option("--pred-labels", ev_pred_labels, "predicted labels (repeat per case)");
    evaluate->add_option("--truth-labels", ev_truth_labels, "ground-truth labels (repeat per case)");
    evaluate->add_option("--label-scheme", ev_scheme, "label convention of the inputs")
        ->check(CLI::IsMember({"eso1", "eso4"}));
    evaluate->add_option("--outdir", ev_outdir, "report output directory")->required();

    auto* plan_net = app.add_subcommand("plan-net", "network shape / receptive-field report");
    std::string pn_arch;
    std::vector<int> pn_dims;
    plan_net->add_option("--arch", pn_arch, "architecture")
        ->check(CLI::IsMember({"generator", "discriminator"}))
        ->required();
    plan_net->add_option("--input-dims", pn_dims, "input extents, one or three values")
        ->delimiter(',');

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        if (rc != 0)
            std::cerr << json{{"error", {{"code", "usage"}, {"message", e.what()}}}}.dump()
                      << '\n';
        return rc;
    }

    if (print_schema) {
        std::cout << config_schema() << '\n';
        return 0;
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return fail("usage", "a subcommand is required (see --help)");
    }

    set_thread_count(threads);

    try {
        if (extract->parsed()) return run_extract(ex_cbct, ex_params, ex_out);
        if (inject->parsed()) return run_inject(in_pct, in_artifact, in_out);
        if (project->parsed()) return run_project(pr_vol, pr_geom, pr_sigma, pr_seed, pr_out);
        if (reconstruct->parsed())
            return run_reconstruct(re_proj, re_grid, re_cfg, re_out, re_report);
        if (compose->parsed()) return run_compose(co_pct, co_cbct, co_labels, co_config, co_outdir);
        if (evaluate->parsed())
            return run_evaluate(ev_pred, ev_truth, ev_pred_labels, ev_truth_labels, ev_scheme,
                                ev_outdir);
        if (plan_net->parsed()) return run_plan_net(pn_arch, pn_dims);
    } catch (const std::invalid_argument& e) {
        return fail("invalid_argument", e.what());
    } catch (const std::runtime_error& e) {
        return fail("runtime_error", e.what());
    } catch (const std::exception& e) {
        return fail("internal", e.what());
    }
    return fail("usage", "unknown subcommand");
}
