#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbctforge/volume.hpp"

namespace cbctforge {

/// Mean SSIM over all full (boundary-skipped) cubic windows, stride 1,
/// C1 = 0.01^2, C2 = 0.03^2, population moments. Inputs are first mapped to
/// [0,1]: HU and signed/01-normalized volumes by their fixed affine maps,
/// unitless pairs by their joint min-max range.
double mssim(const Volume3& a, const Volume3& b, int window = 7);

double mae(const Volume3& a, const Volume3& b);
double rmse(const Volume3& a, const Volume3& b);

enum class PsnrReference { A, B };

/// 20 log10 MAX(I_ref) - 10 log10 MSE; empty when MSE = 0 (identical inputs)
/// or when the reference peak is non-positive.
std::optional<double> psnr(const Volume3& a, const Volume3& b,
                           PsnrReference ref = PsnrReference::B);

/// 2|X n Y| / (|X| + |Y|) on the organ's masks; empty if both masks are empty.
std::optional<double> dice(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ);

/// Foreground voxels with at least one background 6-neighbor (volume border
/// counts as background), in x-fastest scan order.
std::vector<std::array<int, 3>> surface_voxels(const LabelVolume& m, std::uint8_t organ);

/// Mean / 95th-percentile (nearest-rank) of Euclidean surface-to-surface
/// distances in mm, averaged over both directions; empty if either mask has
/// no voxels.
std::optional<double> msd(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ);
std::optional<double> hd95(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ);

struct SurfaceDistances {
    double msd_mm;
    double hd95_mm;
};
std::optional<SurfaceDistances> surface_distance(const LabelVolume& x, const LabelVolume& y,
                                                 std::uint8_t organ);

struct EvalCase {
    std::string name;
    Volume3 pred;
    Volume3 truth;
    std::optional<LabelVolume> pred_labels;
    std::optional<LabelVolume> truth_labels;
};

struct ImageMetricReport {
    std::vector<double> mssim, mae, rmse;         // per case
    std::vector<std::optional<double>> psnr_db;   // empty where undefined
};

struct SegMetricReport {
    struct Organ {
        std::uint8_t label;
        std::string name;
        std::vector<std::optional<double>> dice, msd_mm, hd95_mm;  // per case
    };
    std::vector<Organ> organs;
};

/// Evaluates every case, writes report.json, report.csv (mean ± population
/// std per metric), per-case 256-bin intensity histograms (hist_<case>.csv)
/// and residual volumes (residual_<case> VOL1), and returns the raw numbers.
std::pair<ImageMetricReport, SegMetricReport> report(const std::vector<EvalCase>& cases,
                                                     const std::string& outdir);

}  // namespace cbctforge
