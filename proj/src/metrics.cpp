#include "cbctforge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "cbctforge/plahe.hpp"
#include "cbctforge/volume_io.hpp"
#include "json.hpp"

namespace cbctforge {
namespace {

using nlohmann::json;

void check_pair(const Volume3& a, const Volume3& b, const char* what) {
    a.validate();
    b.validate();
    require_same_grid(a.grid, b.grid, what);
    if (a.unit != b.unit)
        throw std::invalid_argument(std::string(what) + ": unit mismatch (" + unit_name(a.unit) +
                                    " vs " + unit_name(b.unit) + ")");
}

// Common [0,1] mapping for structural comparison; unitless pairs share their
// joint min-max range.
std::pair<std::vector<double>, std::vector<double>> map01(const Volume3& a, const Volume3& b) {
    std::vector<double> x = a.data, y = b.data;
    auto affine = [&](double scale, double shift) {
        for (double& v : x) v = (v + shift) * scale;
        for (double& v : y) v = (v + shift) * scale;
    };
    switch (a.unit) {
        case Unit::HU: affine(1.0 / (kHuMax - kHuMin), -kHuMin); break;
        case Unit::NormSigned: affine(0.5, 1.0); break;
        case Unit::Norm01: break;
        case Unit::Unitless: {
            const auto [alo, ahi] = std::minmax_element(x.begin(), x.end());
            const auto [blo, bhi] = std::minmax_element(y.begin(), y.end());
            const double lo = std::min(*alo, *blo), hi = std::max(*ahi, *bhi);
            if (hi > lo) {
                const double inv = 1.0 / (hi - lo);
                affine(inv, -lo);
            } else {
                affine(0.0, 0.0);
            }
            break;
        }
    }
    return {std::move(x), std::move(y)};
}

double percentile95_nearest_rank(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
    return v[rank - 1];
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

// Exact nearest-surface distances from each of `from` to the set `to`,
// in `from` scan order. Points are binned into B^3-voxel cells; rings of
// cells are scanned outward until no closer point can exist.
std::vector<double> directed_distances(const std::vector<std::array<int, 3>>& from,
                                       const std::vector<std::array<int, 3>>& to,
                                       const Grid3& grid) {
    constexpr int B = 4;
    const std::array<int, 3> cd = {(grid.dims[0] + B - 1) / B, (grid.dims[1] + B - 1) / B,
                                   (grid.dims[2] + B - 1) / B};
    const std::size_t n_cells =
        static_cast<std::size_t>(cd[0]) * cd[1] * cd[2];
    auto cell_of = [&](const std::array<int, 3>& v) {
        return (static_cast<std::size_t>(v[2] / B) * cd[1] + v[1] / B) * cd[0] + v[0] / B;
    };

    std::vector<int> counts(n_cells + 1, 0);
    for (const auto& q : to) ++counts[cell_of(q) + 1];
    for (std::size_t c = 1; c <= n_cells; ++c) counts[c] += counts[c - 1];
    std::vector<int> order(to.size());
    {
        std::vector<int> fill = counts;
        for (std::size_t i = 0; i < to.size(); ++i)
            order[static_cast<std::size_t>(fill[cell_of(to[i])]++)] = static_cast<int>(i);
    }
    std::vector<std::array<double, 3>> to_world(to.size());
    for (std::size_t i = 0; i < to.size(); ++i)
        to_world[i] = grid.world(to[i][0], to[i][1], to[i][2]);

    const double min_sp = std::min({grid.spacing[0], grid.spacing[1], grid.spacing[2]});
    const int max_r = std::max({cd[0], cd[1], cd[2]});
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> out(from.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < static_cast<std::ptrdiff_t>(from.size()); ++qi) {
        const auto& q = from[qi];
        const auto w = grid.world(q[0], q[1], q[2]);
        const int qc[3] = {q[0] / B, q[1] / B, q[2] / B};
        double best = inf;
        for (int r = 0; r <= max_r; ++r) {
            if (best < inf && r >= 1) {
                const double lb = (static_cast<double>(B) * r - (B - 1)) * min_sp;
                if (lb * lb * (1.0 - 1e-9) > best) break;
            }
            const int z0 = std::max(0, qc[2] - r), z1 = std::min(cd[2] - 1, qc[2] + r);
            const int y0 = std::max(0, qc[1] - r), y1 = std::min(cd[1] - 1, qc[1] + r);
            const int x0 = std::max(0, qc[0] - r), x1 = std::min(cd[0] - 1, qc[0] + r);
            for (int cz = z0; cz <= z1; ++cz)
                for (int cy = y0; cy <= y1; ++cy)
                    for (int cx = x0; cx <= x1; ++cx) {
                        const int cheb = std::max(
                            {std::abs(cx - qc[0]), std::abs(cy - qc[1]), std::abs(cz - qc[2])});
                        if (cheb != r) continue;
                        const std::size_t c =
                            (static_cast<std::size_t>(cz) * cd[1] + cy) * cd[0] + cx;
                        for (int s = counts[c]; s < counts[c + 1]; ++s) {
                            const auto& pw = to_world[static_cast<std::size_t>(order[s])];
                            const double dx = w[0] - pw[0], dy = w[1] - pw[1], dz = w[2] - pw[2];
                            const double d2 = dx * dx + dy * dy + dz * dz;
                            if (d2 < best) best = d2;
                        }
                    }
        }
        out[qi] = std::sqrt(best);
    }
    return out;
}

std::string fmt_mean_std(double mean, double sd, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f ± %.*f", decimals, mean, decimals, sd);
    return buf;
}

std::string csv_cell(const std::vector<std::optional<double>>& v, int decimals) {
    std::vector<double> defined;
    for (const auto& o : v)
        if (o) defined.push_back(*o);
    if (defined.size() != v.size() || defined.empty()) return "undefined";
    return fmt_mean_std(mean_of(defined), population_std(defined), decimals);
}

json agg_json(const std::vector<std::optional<double>>& v) {
    json per = json::array();
    std::vector<double> defined;
    for (const auto& o : v) {
        if (o) {
            per.push_back(*o);
            defined.push_back(*o);
        } else {
            per.push_back(nullptr);
        }
    }
    json out;
    out["per_case"] = std::move(per);
    if (defined.size() == v.size() && !defined.empty()) {
        out["mean"] = mean_of(defined);
        out["std"] = population_std(defined);
    } else {
        out["mean"] = nullptr;
        out["std"] = nullptr;
    }
    return out;
}

std::vector<std::optional<double>> lift(const std::vector<double>& v) {
    return {v.begin(), v.end()};
}

}  // namespace

double mssim(const Volume3& a, const Volume3& b, int window) {
    check_pair(a, b, "mssim");
    if (window < 1 || window % 2 == 0)
        throw std::invalid_argument("mssim: window must be odd and >= 1");
    for (int axis = 0; axis < 3; ++axis)
        if (a.grid.dims[axis] < window)
            throw std::invalid_argument("mssim: volume smaller than the window");

    auto [x, y] = map01(a, b);
    const std::size_t n = x.size();
    Volume3 vx(a.grid, Unit::Unitless), vy(a.grid, Unit::Unitless);
    Volume3 vxx(a.grid, Unit::Unitless), vyy(a.grid, Unit::Unitless), vxy(a.grid, Unit::Unitless);
    for (std::size_t i = 0; i < n; ++i) {
        vx.data[i] = x[i];
        vy.data[i] = y[i];
        vxx.data[i] = x[i] * x[i];
        vyy.data[i] = y[i] * y[i];
        vxy.data[i] = x[i] * y[i];
    }
    const std::array<int, 3> w{window, window, window};
    const Volume3 mx = box_mean(vx, w), my = box_mean(vy, w);
    const Volume3 mxx = box_mean(vxx, w), myy = box_mean(vyy, w), mxy = box_mean(vxy, w);

    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    const int h = window / 2;
    const auto& d = a.grid.dims;
    double sum = 0.0;
    std::size_t count = 0;
    for (int k = h; k < d[2] - h; ++k)
        for (int j = h; j < d[1] - h; ++j)
            for (int i = h; i < d[0] - h; ++i) {
                const std::size_t idx = a.grid.index(i, j, k);
                const double ux = mx.data[idx], uy = my.data[idx];
                const double var_x = mxx.data[idx] - ux * ux;
                const double var_y = myy.data[idx] - uy * uy;
                const double cov = mxy.data[idx] - ux * uy;
                sum += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) /
                       ((ux * ux + uy * uy + c1) * (var_x + var_y + c2));
                ++count;
            }
    return sum / static_cast<double>(count);
}

double mae(const Volume3& a, const Volume3& b) {
    check_pair(a, b, "mae");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s / static_cast<double>(a.data.size());
}

double rmse(const Volume3& a, const Volume3& b) {
    check_pair(a, b, "rmse");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(a.data.size()));
}

std::optional<double> psnr(const Volume3& a, const Volume3& b, PsnrReference ref) {
    check_pair(a, b, "psnr");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.data.size());
    const auto& r = (ref == PsnrReference::A) ? a.data : b.data;
    const double peak = *std::max_element(r.begin(), r.end());
    if (mse == 0.0 || peak <= 0.0) return std::nullopt;
    return 20.0 * std::log10(peak) - 10.0 * std::log10(mse);
}

std::optional<double> dice(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ) {
    x.validate();
    y.validate();
    require_same_grid(x.grid, y.grid, "dice");
    std::size_t nx = 0, ny = 0, nxy = 0;
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
        const bool in_x = x.labels[i] == organ, in_y = y.labels[i] == organ;
        nx += in_x;
        ny += in_y;
        nxy += in_x && in_y;
    }
    if (nx + ny == 0) return std::nullopt;
    return 2.0 * static_cast<double>(nxy) / static_cast<double>(nx + ny);
}

std::vector<std::array<int, 3>> surface_voxels(const LabelVolume& m, std::uint8_t organ) {
    m.validate();
    const auto& d = m.grid.dims;
    auto fg = [&](int i, int j, int k) {
        if (i < 0 || j < 0 || k < 0 || i >= d[0] || j >= d[1] || k >= d[2]) return false;
        return m.at(i, j, k) == organ;
    };
    std::vector<std::array<int, 3>> out;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i) {
                if (!fg(i, j, k)) continue;
                if (!fg(i - 1, j, k) || !fg(i + 1, j, k) || !fg(i, j - 1, k) ||
                    !fg(i, j + 1, k) || !fg(i, j, k - 1) || !fg(i, j, k + 1))
                    out.push_back({i, j, k});
            }
    return out;
}

std::optional<SurfaceDistances> surface_distance(const LabelVolume& x, const LabelVolume& y,
                                                 std::uint8_t organ) {
    x.validate();
    y.validate();
    require_same_grid(x.grid, y.grid, "surface_distance");
    const auto sx = surface_voxels(x, organ);
    const auto sy = surface_voxels(y, organ);
    if (sx.empty() || sy.empty()) return std::nullopt;

    const auto d_xy = directed_distances(sx, sy, x.grid);
    const auto d_yx = directed_distances(sy, sx, x.grid);
    SurfaceDistances r;
    r.msd_mm = 0.5 * (mean_of(d_xy) + mean_of(d_yx));
    r.hd95_mm = 0.5 * (percentile95_nearest_rank(d_xy) + percentile95_nearest_rank(d_yx));
    return r;
}

std::optional<double> msd(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ) {
    const auto r = surface_distance(x, y, organ);
    if (!r) return std::nullopt;
    return r->msd_mm;
}

std::optional<double> hd95(const LabelVolume& x, const LabelVolume& y, std::uint8_t organ) {
    const auto r = surface_distance(x, y, organ);
    if (!r) return std::nullopt;
    return r->hd95_mm;
}

std::pair<ImageMetricReport, SegMetricReport> report(const std::vector<EvalCase>& cases,
                                                     const std::string& outdir) {
    if (cases.empty()) throw std::invalid_argument("report: no cases");
    std::filesystem::create_directories(outdir);

    ImageMetricReport img;
    SegMetricReport seg;
    std::optional<LabelScheme> scheme;

    for (const auto& c : cases) {
        check_pair(c.pred, c.truth, ("report case " + c.name).c_str());
        if (c.pred_labels.has_value() != c.truth_labels.has_value())
            throw std::invalid_argument("report: case " + c.name +
                                        " has labels on only one side");
        if (c.pred_labels) {
            if (c.pred_labels->scheme != c.truth_labels->scheme)
                throw std::invalid_argument("report: case " + c.name + " label scheme mismatch");
            if (scheme && *scheme != c.pred_labels->scheme)
                throw std::invalid_argument("report: label schemes differ across cases");
            scheme = c.pred_labels->scheme;
        }
    }
    if (scheme) {
        for (const auto& c : cases)
            if (!c.pred_labels)
                throw std::invalid_argument("report: case " + c.name +
                                            " lacks labels while other cases have them");
        for (std::uint8_t organ = 1; organ <= kMaxLabel; ++organ)
            seg.organs.push_back({organ, organ_name(*scheme, organ), {}, {}, {}});
    }

    for (const auto& c : cases) {
        img.mssim.push_back(mssim(c.pred, c.truth));
        img.mae.push_back(mae(c.pred, c.truth));
        img.rmse.push_back(rmse(c.pred, c.truth));
        img.psnr_db.push_back(psnr(c.pred, c.truth, PsnrReference::B));

        for (auto& organ : seg.organs) {
            if (!c.pred_labels) continue;
            organ.dice.push_back(dice(*c.pred_labels, *c.truth_labels, organ.label));
            const auto sd = surface_distance(*c.pred_labels, *c.truth_labels, organ.label);
            organ.msd_mm.push_back(sd ? std::optional<double>(sd->msd_mm) : std::nullopt);
            organ.hd95_mm.push_back(sd ? std::optional<double>(sd->hd95_mm) : std::nullopt);
        }

        // residual volume and intensity histograms (prediction = a, truth = b)
        Volume3 residual(c.pred.grid, Unit::Unitless);
        for (std::size_t i = 0; i < residual.data.size(); ++i)
            residual.data[i] = c.pred.data[i] - c.truth.data[i];
        write_volume(residual, outdir + "/residual_" + c.name + ".json");

        double lo = kHuMin, hi = kHuMax;
        if (c.pred.unit != Unit::HU) {
            const auto [alo, ahi] = std::minmax_element(c.pred.data.begin(), c.pred.data.end());
            const auto [blo, bhi] = std::minmax_element(c.truth.data.begin(), c.truth.data.end());
            lo = std::min(*alo, *blo);
            hi = std::max(*ahi, *bhi);
            if (!(hi > lo)) hi = lo + 1.0;
        }
        constexpr int kBins = 256;
        std::array<std::size_t, kBins> count_a{}, count_b{};
        const double width = (hi - lo) / kBins;
        auto bin_of = [&](double v) {
            return std::clamp(static_cast<int>((v - lo) / width), 0, kBins - 1);
        };
        for (double v : c.pred.data) ++count_a[static_cast<std::size_t>(bin_of(v))];
        for (double v : c.truth.data) ++count_b[static_cast<std::size_t>(bin_of(v))];

        std::ofstream hist(outdir + "/hist_" + c.name + ".csv");
        if (!hist) throw std::runtime_error("cannot write histogram for case " + c.name);
        hist << "bin_lo,bin_hi,count_a,count_b\n";
        for (int bin = 0; bin < kBins; ++bin)
            hist << lo + bin * width << ',' << lo + (bin + 1) * width << ',' << count_a[bin]
                 << ',' << count_b[bin] << '\n';
    }

    json j;
    j["cases"] = json::array();
    for (const auto& c : cases) j["cases"].push_back(c.name);
    j["image"]["mssim"] = agg_json(lift(img.mssim));
    j["image"]["mae_hu"] = agg_json(lift(img.mae));
    j["image"]["psnr_db"] = agg_json(img.psnr_db);
    j["image"]["rmse_hu"] = agg_json(lift(img.rmse));
    if (scheme) {
        json s;
        for (const auto& organ : seg.organs) {
            s[organ.name]["dice"] = agg_json(organ.dice);
            s[organ.name]["msd_mm"] = agg_json(organ.msd_mm);
            s[organ.name]["hd95_mm"] = agg_json(organ.hd95_mm);
        }
        j["segmentation"] = std::move(s);
        j["label_scheme"] = scheme_name(*scheme);
    }
    {
        std::ofstream out(outdir + "/report.json");
        if (!out) throw std::runtime_error("cannot write report.json");
        out << j.dump(2) << "\n";
    }

    std::ofstream csv(outdir + "/report.csv");
    if (!csv) throw std::runtime_error("cannot write report.csv");
    csv << "MSSIM,MAE (HU),PSNR (dB),RMSE (HU)\n";
    csv << csv_cell(lift(img.mssim), 2) << ',' << csv_cell(lift(img.mae), 1) << ','
        << csv_cell(img.psnr_db, 1) << ',' << csv_cell(lift(img.rmse), 1) << '\n';
    if (scheme) {
        csv << "\norgan,DICE,MSD (mm),HD95 (mm)\n";
        for (const auto& organ : seg.organs)
            csv << organ.name << ',' << csv_cell(organ.dice, 2) << ','
                << csv_cell(organ.msd_mm, 1) << ',' << csv_cell(organ.hd95_mm, 1) << '\n';
    }

    return {std::move(img), std::move(seg)};
}

}  // namespace cbctforge
