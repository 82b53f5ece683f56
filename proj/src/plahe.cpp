#include "cbctforge/plahe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cbctforge/normalize.hpp"

namespace cbctforge {
namespace {

void check_norm01(const Volume3& v, const char* what) {
    v.validate();
    if (v.unit != Unit::Norm01)
        throw std::invalid_argument(std::string(what) + ": expected a norm01 volume, got " +
                                    unit_name(v.unit));
    for (double x : v.data)
        if (!(x >= 0.0 && x <= 1.0))
            throw std::invalid_argument(std::string(what) + ": values outside [0,1]");
}

// Windowed sums along one axis via per-line prefix sums; windows truncate at the ends.
// stride/count describe the axis being filtered, lines indexes the remaining two.
void box_pass(const std::vector<double>& in, std::vector<double>& out, int n, std::size_t stride,
              std::size_t n_lines, std::size_t line_stride_a, int dim_a, std::size_t line_stride_b,
              int half) {
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1);
    for (std::size_t line = 0; line < n_lines; ++line) {
        const std::size_t a = line % static_cast<std::size_t>(dim_a);
        const std::size_t b = line / static_cast<std::size_t>(dim_a);
        const std::size_t base = a * line_stride_a + b * line_stride_b;
        prefix[0] = 0.0;
        for (int t = 0; t < n; ++t) prefix[t + 1] = prefix[t] + in[base + t * stride];
        for (int i = 0; i < n; ++i) {
            const int lo = std::max(0, i - half);
            const int hi = std::min(n - 1, i + half);
            out[base + i * stride] = prefix[hi + 1] - prefix[lo];
        }
    }
}

}  // namespace

void PlaheParams::validate() const {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("PlaheParams: alpha must be in (0,1]");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw std::invalid_argument("PlaheParams: beta must be in [0,1]");
    for (int w : window)
        if (w < 1 || w % 2 == 0)
            throw std::invalid_argument("PlaheParams: window extents must be odd and >= 1");
    if (!(gain >= 0.0) || !std::isfinite(gain))
        throw std::invalid_argument("PlaheParams: gain must be finite and >= 0");
}

std::vector<PlaheParams> default_artifact_bank() {
    return {
        {1.0, 1.0, {9, 9, 9}, 0.5},     {0.7, 1.0, {9, 9, 9}, 0.5},
        {0.5, 0.8, {15, 15, 15}, 0.4},  {0.3, 0.6, {21, 21, 21}, 0.35},
        {0.2, 0.3, {31, 31, 31}, 0.3},
    };
}

Volume3 box_mean(const Volume3& v, const std::array<int, 3>& window) {
    v.validate();
    const auto& d = v.grid.dims;
    const std::size_t nx = d[0], ny = d[1], nz = d[2];

    std::vector<double> sum = v.data;
    std::vector<double> tmp(sum.size());
    // x pass: lines indexed by (y, z)
    box_pass(sum, tmp, d[0], 1, ny * nz, nx, d[1], nx * ny, window[0] / 2);
    // y pass: lines indexed by (x, z)
    box_pass(tmp, sum, d[1], nx, nx * nz, 1, d[0], nx * ny, window[1] / 2);
    // z pass: lines indexed by (x, y)
    box_pass(sum, tmp, d[2], nx * ny, nx * ny, 1, d[0], nx, window[2] / 2);

    Volume3 out(v.grid, Unit::Unitless);
    std::vector<int> cx(nx), cy(ny), cz(nz);
    for (int i = 0; i < d[0]; ++i)
        cx[i] = std::min(d[0] - 1, i + window[0] / 2) - std::max(0, i - window[0] / 2) + 1;
    for (int j = 0; j < d[1]; ++j)
        cy[j] = std::min(d[1] - 1, j + window[1] / 2) - std::max(0, j - window[1] / 2) + 1;
    for (int k = 0; k < d[2]; ++k)
        cz[k] = std::min(d[2] - 1, k + window[2] / 2) - std::max(0, k - window[2] / 2) + 1;
    std::size_t idx = 0;
    for (int k = 0; k < d[2]; ++k)
        for (int j = 0; j < d[1]; ++j)
            for (int i = 0; i < d[0]; ++i, ++idx)
                out.data[idx] = tmp[idx] / (static_cast<double>(cx[i]) * cy[j] * cz[k]);
    return out;
}

Volume3 plahe(const Volume3& v, const PlaheParams& p) {
    check_norm01(v, "plahe");
    p.validate();

    // Box-filter deviations from a reference sample instead of raw values:
    // the constant mode then sums to exactly zero, so a flat input lands on
    // exactly 0.5 and the local-mean term keeps full precision.
    const double ref = v.data[0];
    Volume3 dev(v.grid, Unit::Unitless);
    for (std::size_t i = 0; i < v.data.size(); ++i) dev.data[i] = v.data[i] - ref;
    const Volume3 mean = box_mean(dev, p.window);
    const auto& d = v.grid.dims;
    Volume3 out(v.grid, Unit::Norm01);

    // alpha = 1 collapses the power-law term onto the linear one for any beta.
    if (p.alpha == 1.0 || p.beta == 0.0) {
        for (std::size_t i = 0; i < v.data.size(); ++i)
            out.data[i] = std::clamp(0.5 + 0.5 * (dev.data[i] - mean.data[i]), 0.0, 1.0);
        return out;
    }

    const int hx = p.window[0] / 2, hy = p.window[1] / 2, hz = p.window[2] / 2;
    const double alpha = p.alpha, beta = p.beta;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < d[2]; ++k) {
        const int z0 = std::max(0, k - hz), z1 = std::min(d[2] - 1, k + hz);
        for (int j = 0; j < d[1]; ++j) {
            const int y0 = std::max(0, j - hy), y1 = std::min(d[1] - 1, j + hy);
            for (int i = 0; i < d[0]; ++i) {
                const int x0 = std::max(0, i - hx), x1 = std::min(d[0] - 1, i + hx);
                const double fx = v.at(i, j, k);
                double s = 0.0;
                for (int sk = z0; sk <= z1; ++sk)
                    for (int sj = y0; sj <= y1; ++sj)
                        for (int si = x0; si <= x1; ++si) {
                            const double diff = fx - v.at(si, sj, sk);
                            if (diff > 0.0)
                                s += std::pow(diff, alpha);
                            else if (diff < 0.0)
                                s -= std::pow(-diff, alpha);
                        }
                const double count = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1) * (z1 - z0 + 1);
                const double g = 0.5 + 0.5 * beta * (s / count) +
                                 0.5 * (1.0 - beta) * (dev.at(i, j, k) - mean.at(i, j, k));
                out.at(i, j, k) = std::clamp(g, 0.0, 1.0);
            }
        }
    }
    return out;
}

ArtifactImage extract_artifact(const Volume3& cbct, const PlaheParams& p) {
    Volume3 g = plahe(cbct, p);
    ArtifactImage a{Volume3(cbct.grid, Unit::Unitless), p};
    double sum = 0.0;
    for (std::size_t i = 0; i < g.data.size(); ++i) {
        a.base.data[i] = p.gain * (g.data[i] - 0.5);
        sum += a.base.data[i];
    }
    const double mean = sum / static_cast<double>(a.base.data.size());
    if (std::abs(mean) > 0.05)
        throw std::runtime_error("extract_artifact: artifact field mean " + std::to_string(mean) +
                                 " is not zero-centered");
    return a;
}

Volume3 inject_artifact(const Volume3& pct, const ArtifactImage& a) {
    check_norm01(pct, "inject_artifact");
    a.base.validate();
    require_same_grid(pct.grid, a.base.grid, "inject_artifact");
    Volume3 sum(pct.grid, Unit::Unitless);
    for (std::size_t i = 0; i < sum.data.size(); ++i) sum.data[i] = pct.data[i] + a.base.data[i];
    return rescale01(sum).first;
}

}  // namespace cbctforge
