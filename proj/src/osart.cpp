#include "cbctforge/osart.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace cbctforge {
namespace {

constexpr double kZeroGuard = 1e-8;

void reciprocal_guarded(std::vector<double>& v) {
    for (double& x : v) x = (x >= kZeroGuard) ? 1.0 / x : 0.0;
}

// Bilinear read of one detector view; zero outside the bin-center lattice.
double detector_sample(const ProjectionStack& p, int view, double cu, double cv) {
    const int nu = p.geometry.det_dims[0], nv = p.geometry.det_dims[1];
    if (cu < 0.0 || cu > nu - 1 || cv < 0.0 || cv > nv - 1) return 0.0;
    const int iu0 = std::min(static_cast<int>(cu), std::max(nu - 2, 0));
    const int iv0 = std::min(static_cast<int>(cv), std::max(nv - 2, 0));
    const int iu1 = std::min(iu0 + 1, nu - 1);
    const int iv1 = std::min(iv0 + 1, nv - 1);
    const double tu = cu - iu0, tv = cv - iv0;
    const double a = p.at(view, iv0, iu0) + tu * (p.at(view, iv0, iu1) - p.at(view, iv0, iu0));
    const double b = p.at(view, iv1, iu0) + tu * (p.at(view, iv1, iu1) - p.at(view, iv1, iu0));
    return a + tv * (b - a);
}

}  // namespace

void OsartConfig::validate() const {
    if (n_subsets < 1) throw std::invalid_argument("OsartConfig: n_subsets must be >= 1");
    if (n_iterations < 1) throw std::invalid_argument("OsartConfig: n_iterations must be >= 1");
    if (!(relax > 0.0 && relax < 2.0))
        throw std::invalid_argument("OsartConfig: relax must be in (0,2)");
    if (!std::isfinite(init)) throw std::invalid_argument("OsartConfig: init must be finite");
}

Volume3 back_project(const ProjectionStack& p, const Grid3& target) {
    p.validate();
    target.validate();
    if (p.geometry.n_views < 1 || p.data.empty())
        throw std::invalid_argument("back_project: empty projection stack");

    const auto angles = p.geometry.view_angles();
    const double step = p.geometry.resolve_step(target);
    const double sad = p.geometry.sad, sdd = p.geometry.sdd;
    const double du = p.geometry.det_spacing[0], dv = p.geometry.det_spacing[1];
    const int nu = p.geometry.det_dims[0], nv = p.geometry.det_dims[1];
    const auto iso = target.center();

    std::vector<double> cos_a(angles.size()), sin_a(angles.size());
    for (std::size_t a = 0; a < angles.size(); ++a) {
        cos_a[a] = std::cos(angles[a]);
        sin_a[a] = std::sin(angles[a]);
    }

    Volume3 out(target, Unit::Unitless);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < target.dims[2]; ++k) {
        for (int j = 0; j < target.dims[1]; ++j) {
            for (int i = 0; i < target.dims[0]; ++i) {
                const auto w = target.world(i, j, k);
                const double dx = w[0] - iso[0], dy = w[1] - iso[1], dz = w[2] - iso[2];
                double acc = 0.0;
                for (int view = 0; view < p.geometry.n_views; ++view) {
                    const double ca = cos_a[view];
                    const double sa = sin_a[view];
                    const double depth = sad - (dx * ca + dy * sa);
                    if (depth < 1e-9) continue;  // at or behind the source plane
                    const double mag = sdd / depth;
                    const double cu = mag * (dy * ca - dx * sa) / du + 0.5 * (nu - 1);
                    const double cv = mag * dz / dv + 0.5 * (nv - 1);
                    acc += detector_sample(p, view, cu, cv);
                }
                out.at(i, j, k) = acc * step;
            }
        }
    }
    return out;
}

std::pair<Volume3, ReconReport> osart_reconstruct(const ProjectionStack& p, const Grid3& target,
                                                  const OsartConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    p.validate();
    target.validate();
    cfg.validate();
    if (cfg.n_subsets > p.geometry.n_views)
        throw std::invalid_argument("osart_reconstruct: more subsets than views (empty subset)");

    ConeBeamGeometry rg = p.geometry;
    rg.angles = p.geometry.view_angles();
    rg.step_mm = p.geometry.resolve_step(target);
    const int nu = rg.det_dims[0], nv = rg.det_dims[1];
    const std::size_t view_len = static_cast<std::size_t>(nu) * nv;

    // Round-robin subsets, each a self-contained stack over its own views.
    const int ns = cfg.n_subsets;
    std::vector<ProjectionStack> b(ns);
    for (int s = 0; s < ns; ++s) {
        ConeBeamGeometry g = rg;
        g.angles.clear();
        for (int view = s; view < rg.n_views; view += ns) g.angles.push_back(rg.angles[view]);
        g.n_views = static_cast<int>(g.angles.size());
        b[s].geometry = std::move(g);
        b[s].data.resize(view_len * b[s].geometry.n_views);
        int local = 0;
        for (int view = s; view < rg.n_views; view += ns, ++local)
            std::copy_n(p.data.begin() + static_cast<std::ptrdiff_t>(view * view_len), view_len,
                        b[s].data.begin() + static_cast<std::ptrdiff_t>(local * view_len));
    }

    // W_S: reciprocal ray lengths through the [0,1]-support (forward of ones);
    // V_S: reciprocal voxel sensitivity (adjoint of ones).
    const Volume3 ones(target, Unit::Norm01, 1.0);
    std::vector<std::vector<double>> w(ns);
    std::vector<Volume3> v(ns);
    double peak_sensitivity = 0.0;
    for (int s = 0; s < ns; ++s) {
        w[s] = forward_project(ones, b[s].geometry).data;
        reciprocal_guarded(w[s]);
        ProjectionStack unit{b[s].geometry, std::vector<double>(b[s].data.size(), 1.0)};
        v[s] = back_project(unit, target);
        peak_sensitivity =
            std::max(peak_sensitivity, *std::max_element(v[s].data.begin(), v[s].data.end()));
        reciprocal_guarded(v[s].data);
    }
    if (peak_sensitivity < kZeroGuard)
        throw std::runtime_error("osart_reconstruct: target grid is outside every cone");

    Volume3 x(target, Unit::Norm01, cfg.init);
    ReconReport report;
    report.residuals.reserve(static_cast<std::size_t>(cfg.n_iterations) * ns);

    for (int it = 0; it < cfg.n_iterations; ++it) {
        for (int s = 0; s < ns; ++s) {
            ProjectionStack fp = forward_project(x, b[s].geometry);
            double norm2 = 0.0;
            for (std::size_t i = 0; i < fp.data.size(); ++i) {
                const double r = b[s].data[i] - fp.data[i];
                norm2 += r * r;
                fp.data[i] = r * w[s][i];
            }
            report.residuals.push_back(std::sqrt(norm2));

            const Volume3 upd = back_project(fp, target);
            for (std::size_t i = 0; i < x.data.size(); ++i) {
                x.data[i] += cfg.relax * v[s].data[i] * upd.data[i];
                if (cfg.nonneg && x.data[i] < 0.0) x.data[i] = 0.0;
            }
        }
    }

    for (double& val : x.data) val = std::clamp(val, 0.0, 1.0);
    report.elapsed_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return {std::move(x), std::move(report)};
}

Volume3 restore_hu(const Volume3& recon, std::pair<double, double> hu_range) {
    recon.validate();
    if (recon.unit != Unit::Norm01)
        throw std::invalid_argument("restore_hu: expected a norm01 volume, got " +
                                    std::string(unit_name(recon.unit)));
    const auto [lo, hi] = hu_range;
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw std::invalid_argument("restore_hu: invalid HU range");

    Volume3 out(recon.grid, Unit::HU);
    for (std::size_t i = 0; i < out.data.size(); ++i)
        out.data[i] = lo + recon.data[i] * (hi - lo);
    return out;
}

}  // namespace cbctforge
