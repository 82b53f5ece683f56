#include "cbctforge/compose.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

#include "cbctforge/config.hpp"
#include "cbctforge/normalize.hpp"
#include "cbctforge/rng.hpp"
#include "cbctforge/sha256.hpp"
#include "cbctforge/volume_io.hpp"

namespace cbctforge {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
    if (artifact_bank.empty())
        throw std::invalid_argument("PipelineConfig: artifact_bank must not be empty");
    if (geoms.empty()) throw std::invalid_argument("PipelineConfig: geoms must not be empty");
    for (const auto& p : artifact_bank) p.validate();
    for (const auto& a : geoms) a.validate();
    geometry.validate();
    osart.validate();
    if (!(std::isfinite(noise_sigma) && noise_sigma >= 0.0))
        throw std::invalid_argument("PipelineConfig: noise_sigma must be finite and >= 0");
}

std::uint64_t sample_noise_seed(std::uint64_t seed, int artifact_index, int geom_index) {
    const std::uint64_t pair = (static_cast<std::uint64_t>(std::uint32_t(artifact_index)) << 32) |
                               static_cast<std::uint64_t>(std::uint32_t(geom_index));
    return seed ^ splitmix64(pair);
}

namespace {

std::string output_stem(const std::string& pct_path) {
    if (pct_path.empty()) return "sample";
    const std::string stem = fs::path(pct_path).stem().string();
    return stem.empty() ? "sample" : stem;
}

json record_to_json(const SampleRecord& r, const ComposeInputs& inputs, const json& cfg_json) {
    return json{{"inputs",
                 {{"pct", inputs.pct_path},
                  {"cbct", inputs.cbct_path},
                  {"labels", inputs.labels_path},
                  {"config", cfg_json}}},
                {"plahe", to_json(r.plahe)},
                {"affine", to_json(r.affine)},
                {"noise_seed", r.noise_seed},
                {"hu_range", {r.hu_range.first, r.hu_range.second}},
                {"outputs", r.outputs},
                {"sha256", r.sha256}};
}

}  // namespace

DatasetManifest compose_dataset(const Volume3& pct, const Volume3& cbct,
                                const LabelVolume& labels, const PipelineConfig& cfg,
                                const std::string& outdir, const ComposeInputs& inputs) {
    cfg.validate();
    pct.validate();
    cbct.validate();
    labels.validate();
    require_same_grid(pct.grid, cbct.grid, "compose_dataset: pct vs cbct");
    require_same_grid(pct.grid, labels.grid, "compose_dataset: pct vs labels");
    if (pct.unit != Unit::HU || cbct.unit != Unit::HU)
        throw std::invalid_argument("compose_dataset: pct and cbct must be in HU");

    fs::create_directories(outdir);
    const std::string stem = output_stem(inputs.pct_path);
    const json cfg_json = to_json(cfg);

    const Volume3 pct01 = normalize01_ct(pct);
    const Volume3 cbct01 = normalize01_ct(cbct);
    const LabelVolume labels_out = relabel(labels, cfg.label_scheme);

    DatasetManifest manifest;
    json records = json::array();

    for (std::size_t i = 0; i < cfg.artifact_bank.size(); ++i) {
        const ArtifactImage artifact = extract_artifact(cbct01, cfg.artifact_bank[i]);

        Volume3 induced = pct01;
        induced.unit = Unit::Unitless;
        for (std::size_t v = 0; v < induced.data.size(); ++v)
            induced.data[v] += artifact.base.data[v];
        auto [induced01, minmax] = rescale01(induced);
        if (!(minmax.second - minmax.first > 1e-12))
            throw std::runtime_error(
                "compose_dataset: artifact-induced volume is constant; HU restoration is "
                "undefined");
        const std::pair<double, double> hu_range{minmax.first * 4095.0 - 1000.0,
                                                 minmax.second * 4095.0 - 1000.0};

        // Everything up to the noise draw is independent of the geom index.
        const ProjectionStack clean = forward_project(induced01, cfg.geometry);

        for (std::size_t g = 0; g < cfg.geoms.size(); ++g) {
            SampleRecord rec;
            rec.artifact_index = static_cast<int>(i);
            rec.geom_index = static_cast<int>(g);
            rec.plahe = cfg.artifact_bank[i];
            rec.affine = cfg.geoms[g];
            rec.noise_seed = sample_noise_seed(cfg.seed, rec.artifact_index, rec.geom_index);
            rec.hu_range = hu_range;

            const ProjectionStack noisy =
                add_projection_noise(clean, cfg.noise_sigma, rec.noise_seed);
            auto [recon, report] = osart_reconstruct(noisy, pct.grid, cfg.osart);
            const Volume3 pscbct = restore_hu(recon, hu_range);

            const Volume3 out_pct = apply_affine(pct, cfg.geoms[g]);
            const Volume3 out_ps = apply_affine(pscbct, cfg.geoms[g]);
            const LabelVolume out_lab = apply_affine(labels_out, cfg.geoms[g]);

            const std::string base =
                stem + "_a" + std::to_string(i) + "_g" + std::to_string(g) + "_";
            const std::string pct_name = base + "pct";
            const std::string ps_name = base + "pscbct";
            const std::string lab_name = base + "labels";
            write_volume(out_pct, (fs::path(outdir) / (pct_name + ".json")).string());
            write_volume(out_ps, (fs::path(outdir) / (ps_name + ".json")).string());
            write_label_volume(out_lab, (fs::path(outdir) / (lab_name + ".json")).string());

            rec.outputs = {{"pct", pct_name + ".json"},
                           {"pscbct", ps_name + ".json"},
                           {"labels", lab_name + ".json"}};
            for (const std::string& n : {pct_name, ps_name, lab_name}) {
                for (const char* ext : {".json", ".raw"}) {
                    const std::string file = n + ext;
                    rec.sha256[file] = sha256_file((fs::path(outdir) / file).string());
                }
            }

            records.push_back(record_to_json(rec, inputs, cfg_json));
            manifest.records.push_back(std::move(rec));
        }
    }

    const fs::path manifest_path = fs::path(outdir) / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("compose_dataset: cannot write " + manifest_path.string());
    out << records.dump(2) << '\n';
    if (!out) throw std::runtime_error("compose_dataset: write failed for " + manifest_path.string());
    return manifest;
}

}  // namespace cbctforge
