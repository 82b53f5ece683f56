#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cbctforge/affine.hpp"
#include "cbctforge/osart.hpp"
#include "cbctforge/plahe.hpp"
#include "cbctforge/projector.hpp"
#include "cbctforge/volume.hpp"

namespace cbctforge {

/// Full recipe for expanding one registered (pCT, CBCT, labels) triple into
/// |artifact_bank| x |geoms| paired training samples.
struct PipelineConfig {
    std::vector<PlaheParams> artifact_bank;
    std::vector<AffineSpec> geoms;
    ConeBeamGeometry geometry;
    OsartConfig osart;
    double noise_sigma = 0.01;
    std::uint64_t seed = 0;
    LabelScheme label_scheme = LabelScheme::Eso4;

    void validate() const;
};

/// Per-sample noise seed: cfg.seed xor a splitmix64 hash of (i, j), so
/// samples are reproducible individually and uncorrelated with each other.
std::uint64_t sample_noise_seed(std::uint64_t seed, int artifact_index, int geom_index);

struct SampleRecord {
    int artifact_index = 0;
    int geom_index = 0;
    PlaheParams plahe;
    AffineSpec affine;
    std::uint64_t noise_seed = 0;
    std::pair<double, double> hu_range{0.0, 0.0};
    // role ("pct" | "pscbct" | "labels") -> header file name relative to outdir
    std::map<std::string, std::string> outputs;
    // emitted file name -> hex digest, both halves of each VOL1 pair
    std::map<std::string, std::string> sha256;
};

struct DatasetManifest {
    std::vector<SampleRecord> records;
};

/// Input provenance recorded in the manifest; `pct_path`'s stem also names
/// the emitted files (empty -> "sample").
struct ComposeInputs {
    std::string pct_path;
    std::string cbct_path;
    std::string labels_path;
};

/// For each (artifact i, geom j): extract the artifact from `cbct`, inject it
/// into `pct`, forward-project, add seeded noise, reconstruct, restore HU,
/// then apply geom j jointly to pCT / psCBCT / labels and emit the triple as
/// `<stem>_a<i>_g<j>_{pct,pscbct,labels}.{json,raw}` plus a manifest record.
/// Writes `manifest.json` into `outdir` and returns the same content.
DatasetManifest compose_dataset(const Volume3& pct, const Volume3& cbct,
                                const LabelVolume& labels, const PipelineConfig& cfg,
                                const std::string& outdir, const ComposeInputs& inputs = {});

}  // namespace cbctforge
