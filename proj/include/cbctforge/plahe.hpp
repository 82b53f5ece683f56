#pragma once

#include <array>
#include <vector>

#include "cbctforge/volume.hpp"

namespace cbctforge {

struct PlaheParams {
    double alpha = 1.0;                  // power-law exponent in (0,1]; 1 = linear cumulation
    double beta = 1.0;                   // blend: 1 = pure power law, 0 = local-mean subtraction
    std::array<int, 3> window{9, 9, 9};  // per-axis window extent in voxels, odd
    double gain = 0.5;                   // artifact amplitude multiplier

    void validate() const;
};

struct ArtifactImage {
    Volume3 base;  // unitless, zero-centered field
    PlaheParams params;
};

// Five stock settings ordered from high-frequency streaks to smooth shading.
std::vector<PlaheParams> default_artifact_bank();

// Box mean with truncated (renormalized) windows at the volume boundary.
Volume3 box_mean(const Volume3& v, const std::array<int, 3>& window);

// Power-law adaptive histogram equalization. Per voxel x,
//   g(x) = sum_{s in W(x)} q(f(x) - f(s)) / |W(x)|,
//   q(d) = beta * qhat(d, alpha) + (1 - beta) * qhat(d, 1),
//   qhat(d, a) = 1/2 + sign(d) * |d|^a / 2,
// clamped to [0,1]. A constant input maps to constant 0.5.
Volume3 plahe(const Volume3& v, const PlaheParams& p);

// gain * (plahe(cbct) - 1/2): the zero-centered artifact-only field.
ArtifactImage extract_artifact(const Volume3& cbct, const PlaheParams& p);

// Pixelwise pct + artifact, min-max rescaled back to [0,1].
Volume3 inject_artifact(const Volume3& pct, const ArtifactImage& a);

}  // namespace cbctforge
