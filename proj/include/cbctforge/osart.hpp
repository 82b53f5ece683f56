#pragma once

#include <utility>
#include <vector>

#include "cbctforge/projector.hpp"
#include "cbctforge/volume.hpp"

namespace cbctforge {

struct OsartConfig {
    int n_subsets = 10;
    int n_iterations = 20;  // full passes over all subsets
    double relax = 0.5;     // relaxation factor, in (0,2)
    bool nonneg = true;     // clamp negatives after every subiteration
    double init = 0.0;      // constant initial voxel value

    void validate() const;
};

struct ReconReport {
    std::vector<double> residuals;  // ||b_S - A_S x||_2 per subiteration, before the update
    double elapsed_s = 0.0;
};

/// Voxel-driven adjoint of forward_project: every voxel accumulates, over the
/// stack's views, the bilinearly interpolated detector value at its projected
/// (u,v) position, scaled by the ray sampling step.
Volume3 back_project(const ProjectionStack& p, const Grid3& target);

/// OS-SART with round-robin subsets (view i -> subset i mod n_subsets):
///   x <- x + relax * V_S (.) At_S( W_S (.) (b_S - A_S x) )
/// where W_S = 1/(A_S 1) per detector bin and V_S = 1/(At_S 1) per voxel,
/// reciprocals below 1e-8 zeroed. The result is clamped to [0,1].
std::pair<Volume3, ReconReport> osart_reconstruct(const ProjectionStack& p, const Grid3& target,
                                                  const OsartConfig& cfg);

/// Affine map [0,1] -> [lo,hi] HU.
Volume3 restore_hu(const Volume3& recon, std::pair<double, double> hu_range);

}  // namespace cbctforge
