// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned inline.
// The CLI binary is taken from $CBCTFORGE_BIN (or argv[1]); exits nonzero if
// any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "cbctforge/affine.hpp"
#include "cbctforge/ganplan.hpp"
#include "cbctforge/metrics.hpp"
#include "cbctforge/normalize.hpp"
#include "cbctforge/osart.hpp"
#include "cbctforge/parallel.hpp"
#include "cbctforge/plahe.hpp"
#include "cbctforge/projector.hpp"
#include "cbctforge/volume_io.hpp"
#include "test_support.hpp"

using namespace cbctforge;
using namespace testsup;
using nlohmann::json;

namespace {

std::string g_cli;

struct Failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void expect(bool ok, const std::string& msg) {
    if (!ok) throw Failure(msg);
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CliResult {
    int code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    expect(!g_cli.empty(), "CLI binary not provided (set CBCTFORGE_BIN or pass argv[1])");
    const std::string cmd = g_cli + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    expect(pipe != nullptr, "popen failed");
    CliResult r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// ---------------------------------------------------------------------------

std::string c1_receptive_field() {
    const auto layers = discriminator_layers();
    const auto t0 = std::chrono::steady_clock::now();
    const auto chain = receptive_field_chain(layers);
    const double ms = seconds_since(t0) * 1e3;

    const std::vector<int> want{1, 4, 7, 16, 34, 70};
    expect(chain == want, "library chain differs from 1 4 7 16 34 70");
    expect(ms < 1.0, "chain computed in " + fmt(ms) + " ms (limit 1 ms)");

    const CliResult r = run_cli("plan-net --arch discriminator");
    expect(r.code == 0, "plan-net exited with " + std::to_string(r.code));
    const json j = json::parse(r.out);
    expect(j.at("receptive_field") == 70, "cli receptive_field != 70");
    expect(j.at("receptive_field_chain") == json(want), "cli chain differs");
    return "chain 1 4 7 16 34 70 in " + fmt(ms, 2) + " ms, cli agrees";
}

std::string c2_normalization_endpoints() {
    Grid3 tiny = centered_grid({2, 1, 1});
    Volume3 hu(tiny, Unit::HU);
    hu.data = {-1000.0, 3095.0};
    const Volume3 n = normalize_ct(hu);
    expect(n.data[0] == -1.0 && n.data[1] == 1.0, "HU endpoints are not exactly -1/+1");

    LabelVolume lv(tiny, LabelScheme::Eso4);
    lv.labels = {0, 4};
    const Volume3 enc = encode_labels(lv);
    expect(enc.data[0] == -1.0 && enc.data[1] == 1.0, "label endpoints are not exactly -1/+1");

    Grid3 g = centered_grid({16, 16, 16});
    Volume3 vol = random_volume(g, Unit::HU, 1009, -1000.0, 3095.0);
    vol.data[0] = -1000.0;
    vol.data[1] = 3095.0;
    TempDir tmp("acc_norm");
    write_volume(normalize_ct(vol), tmp.str("n.json"));
    const Volume3 back = denormalize_ct(read_volume(tmp.str("n.json")));
    double worst = 0.0;
    for (std::size_t i = 0; i < vol.data.size(); ++i)
        worst = std::max(worst, std::abs(back.data[i] - vol.data[i]));
    expect(worst <= 1e-4, "f32 round trip off by " + fmt(worst) + " HU (limit 1e-4)");
    return "endpoints exact, f32 round trip worst " + fmt(worst, 3) + " HU";
}

std::string c3_chord_integrals() {
    Grid3 g = centered_grid({64, 64, 64});
    Volume3 cube(g, Unit::Norm01);
    std::fill(cube.data.begin(), cube.data.end(), 1.0);

    ConeBeamGeometry geom;
    geom.det_dims = {65, 65};
    geom.det_spacing = {1.0, 1.0};
    geom.n_views = 2;
    geom.angles = {0.0, std::acos(-1.0) / 4.0};
    geom.step_mm = 0.5;
    set_thread_count(1);
    const ProjectionStack p = forward_project(cube, geom);

    const double perp = p.at(0, 32, 32);
    const double chord45 = 64.0 * std::sqrt(2.0);
    const double obl = p.at(1, 32, 32);
    const double e_perp = std::abs(perp - 64.0) / 64.0;
    const double e_obl = std::abs(obl - chord45) / chord45;
    expect(e_perp <= 0.01, "perpendicular chord off by " + fmt(e_perp) + " (limit 1%)");
    expect(e_obl <= 0.02, "45-degree chord off by " + fmt(e_obl) + " (limit 2%)");

    ConeBeamGeometry timing;
    timing.det_dims = {64, 64};
    timing.det_spacing = {2.0, 2.0};
    timing.n_views = 60;
    const auto t0 = std::chrono::steady_clock::now();
    forward_project(cube, timing);
    const double dt = seconds_since(t0);
    set_thread_count(0);
    expect(dt < 5.0, "60-view projection took " + fmt(dt) + " s single-threaded (limit 5)");
    return "chord errors " + fmt(e_perp, 2) + " / " + fmt(e_obl, 2) + ", 60 views in " +
           fmt(dt, 3) + " s";
}

std::string c4_linearity() {
    Grid3 g = centered_grid({32, 32, 32});
    const Volume3 a = random_volume(g, Unit::Norm01, 41);
    const Volume3 b = random_volume(g, Unit::Norm01, 43);
    Volume3 combo(g, Unit::Norm01);
    for (std::size_t i = 0; i < combo.data.size(); ++i)
        combo.data[i] = 0.7 * a.data[i] + 1.3 * b.data[i];

    ConeBeamGeometry geom;
    geom.det_dims = {48, 48};
    geom.det_spacing = {1.5, 1.5};
    geom.n_views = 12;
    const ProjectionStack pa = forward_project(a, geom);
    const ProjectionStack pb = forward_project(b, geom);
    const ProjectionStack pc = forward_project(combo, geom);

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < pc.data.size(); ++i) {
        const double d = pc.data[i] - (0.7 * pa.data[i] + 1.3 * pb.data[i]);
        num += d * d;
        den += pc.data[i] * pc.data[i];
    }
    const double rel = std::sqrt(num / den);
    expect(rel < 1e-5, "superposition relative error " + fmt(rel) + " (limit 1e-5)");
    return "superposition relative error " + fmt(rel, 2);
}

std::string c5_reconstruction_convergence() {
    Grid3 g = centered_grid({64, 64, 64});
    // Soften the phantom edges so the comparison measures convergence, not the
    // band limit of 60 views.
    Volume3 truth = nested_ellipsoids(g);
    truth.data = box_mean(truth, {3, 3, 3}).data;

    ConeBeamGeometry geom;
    geom.det_dims = {64, 64};
    geom.det_spacing = {3.0, 3.0};
    geom.n_views = 60;
    const ProjectionStack b = forward_project(truth, geom);

    OsartConfig cfg;
    cfg.n_subsets = 6;
    cfg.n_iterations = 10;
    cfg.relax = 0.5;
    const auto t0 = std::chrono::steady_clock::now();
    const auto [x, rep] = osart_reconstruct(b, g, cfg);
    const double dt = seconds_since(t0);

    double sum = 0.0;
    for (std::size_t i = 0; i < x.data.size(); ++i) sum += std::abs(x.data[i] - truth.data[i]);
    const double mae_01 = sum / static_cast<double>(x.data.size());

    expect(rep.residuals.size() == 60, "expected 60 subiteration residuals");
    const double ratio = rep.residuals[30] / rep.residuals[0];
    expect(mae_01 < 0.03, "reconstruction MAE " + fmt(mae_01) + " (limit 0.03)");
    expect(ratio < 0.2, "residual after pass 5 at " + fmt(ratio) + " of start (limit 0.2)");
    expect(dt < 60.0, "reconstruction took " + fmt(dt) + " s (limit 60)");
    return "MAE " + fmt(mae_01, 3) + ", residual ratio " + fmt(ratio, 2) + ", " + fmt(dt, 3) +
           " s";
}

std::string c6_fixed_point() {
    Grid3 g = centered_grid({16, 16, 16});
    Volume3 truth(g, Unit::Norm01);
    std::fill(truth.data.begin(), truth.data.end(), 0.35);

    ConeBeamGeometry geom;
    geom.det_dims = {20, 20};
    geom.det_spacing = {2.4, 2.4};
    geom.n_views = 8;
    const ProjectionStack b = forward_project(truth, geom);

    OsartConfig cfg;
    cfg.n_subsets = 4;
    cfg.n_iterations = 1;
    cfg.relax = 0.9;
    cfg.init = 0.35;
    const auto [x, rep] = osart_reconstruct(b, g, cfg);
    double worst = 0.0;
    for (double v : x.data) worst = std::max(worst, std::abs(v - 0.35));
    expect(worst <= 1e-6, "consistent data moved the volume by " + fmt(worst) + " (limit 1e-6)");
    return "one full pass moved a consistent volume by " + fmt(worst, 2);
}

std::string c7_metric_oracles() {
    Grid3 g8 = centered_grid({8, 8, 8});
    const Volume3 a = random_volume(g8, Unit::HU, 71, -500.0, 1500.0);
    const Volume3 b = random_volume(g8, Unit::HU, 73, -500.0, 1500.0);
    const std::size_t n = a.data.size();
    double sum_abs = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.data[i] - b.data[i];
        sum_abs += std::abs(d);
        sum_sq += d * d;
    }
    expect(mae(a, b) == sum_abs / static_cast<double>(n), "MAE differs from the direct loop");
    expect(rmse(a, b) == std::sqrt(sum_sq / static_cast<double>(n)),
           "RMSE differs from the direct loop");
    const double peak = *std::max_element(b.data.begin(), b.data.end());
    const double want_psnr =
        20.0 * std::log10(peak) - 10.0 * std::log10(sum_sq / static_cast<double>(n));
    expect(psnr(a, b).value() == want_psnr, "PSNR differs from the direct loop");

    LabelVolume mx(g8, LabelScheme::Eso4), my(g8, LabelScheme::Eso4);
    {
        Rng rng(79);
        for (std::size_t i = 0; i < mx.labels.size(); ++i) {
            mx.labels[i] = rng.uniform() < 0.3 ? 2 : 0;
            my.labels[i] = rng.uniform() < 0.3 ? 2 : 0;
        }
    }
    std::size_t cx = 0, cy = 0, cxy = 0;
    for (std::size_t i = 0; i < mx.labels.size(); ++i) {
        cx += mx.labels[i] == 2;
        cy += my.labels[i] == 2;
        cxy += (mx.labels[i] == 2) && (my.labels[i] == 2);
    }
    expect(dice(mx, my, 2).value() ==
               2.0 * static_cast<double>(cxy) / static_cast<double>(cx + cy),
           "DICE differs from the direct count");

    // MSSIM against per-window population moments (window 7, full windows only).
    Grid3 g12 = centered_grid({12, 12, 12});
    Volume3 sa(g12, Unit::Norm01), sb(g12, Unit::Norm01);
    {
        Rng rng(77);
        for (int k = 0; k < 12; ++k)
            for (int j = 0; j < 12; ++j)
                for (int i = 0; i < 12; ++i) {
                    const double base =
                        0.5 + 0.25 * std::sin(0.4 * i) * std::cos(0.3 * j + 0.2 * k);
                    sa.at(i, j, k) = std::clamp(base + 0.05 * (rng.uniform() - 0.5), 0.0, 1.0);
                    sb.at(i, j, k) =
                        std::clamp(0.9 * base + 0.05 + 0.05 * (rng.uniform() - 0.5), 0.0, 1.0);
                }
    }
    double ssim_sum = 0.0;
    std::size_t windows = 0;
    constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
    for (int k = 3; k < 9; ++k)
        for (int j = 3; j < 9; ++j)
            for (int i = 3; i < 9; ++i) {
                double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
                for (int dk = -3; dk <= 3; ++dk)
                    for (int dj = -3; dj <= 3; ++dj)
                        for (int di = -3; di <= 3; ++di) {
                            const double u = sa.at(i + di, j + dj, k + dk);
                            const double v = sb.at(i + di, j + dj, k + dk);
                            sx += u;
                            sy += v;
                            sxx += u * u;
                            syy += v * v;
                            sxy += u * v;
                        }
                const double m = 343.0;
                const double ux = sx / m, uy = sy / m;
                const double vx = sxx / m - ux * ux, vy = syy / m - uy * uy;
                const double cov = sxy / m - ux * uy;
                ssim_sum += ((2.0 * ux * uy + kC1) * (2.0 * cov + kC2)) /
                            ((ux * ux + uy * uy + kC1) * (vx + vy + kC2));
                ++windows;
            }
    const double mssim_want = ssim_sum / static_cast<double>(windows);
    const double mssim_got = mssim(sa, sb);
    expect(std::abs(mssim_got - mssim_want) <= 1e-8,
           "MSSIM off the window oracle by " + fmt(std::abs(mssim_got - mssim_want)));

    // Surface distances against the all-pairs oracle on anisotropic voxels.
    Grid3 g10 = centered_grid({10, 10, 10}, {1.0, 1.5, 2.5});
    LabelVolume sx_(g10, LabelScheme::Eso4), sy_(g10, LabelScheme::Eso4);
    {
        Rng rng(83);
        for (std::size_t i = 0; i < sx_.labels.size(); ++i) {
            sx_.labels[i] = rng.uniform() < 0.2 ? 3 : 0;
            sy_.labels[i] = rng.uniform() < 0.2 ? 3 : 0;
        }
    }
    const auto sfx = surface_voxels(sx_, 3);
    const auto sfy = surface_voxels(sy_, 3);
    expect(!sfx.empty() && !sfy.empty(), "degenerate random masks");
    auto brute = [&](const std::vector<std::array<int, 3>>& from,
                     const std::vector<std::array<int, 3>>& to) {
        std::vector<double> out(from.size());
        for (std::size_t qi = 0; qi < from.size(); ++qi) {
            const auto w = g10.world(from[qi][0], from[qi][1], from[qi][2]);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& t : to) {
                const auto pw = g10.world(t[0], t[1], t[2]);
                const double dx = w[0] - pw[0], dy = w[1] - pw[1], dz = w[2] - pw[2];
                const double d2 = dx * dx + dy * dy + dz * dz;
                if (d2 < best) best = d2;
            }
            out[qi] = std::sqrt(best);
        }
        return out;
    };
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto p95 = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const auto rank =
            static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(v.size())));
        return v[rank - 1];
    };
    const auto d_xy = brute(sfx, sfy);
    const auto d_yx = brute(sfy, sfx);
    const double msd_want = 0.5 * (mean_of(d_xy) + mean_of(d_yx));
    const double hd_want = 0.5 * (p95(d_xy) + p95(d_yx));
    expect(msd(sx_, sy_, 3).value() == msd_want, "MSD differs from the all-pairs oracle");
    expect(hd95(sx_, sy_, 3).value() == hd_want, "HD95 differs from the all-pairs oracle");
    return "MAE/RMSE/PSNR/DICE/MSD/HD95 exact, MSSIM within " +
           fmt(std::abs(mssim_got - mssim_want), 2);
}

std::string c8_contrast_closed_forms() {
    Grid3 g = centered_grid({8, 8, 8});

    Volume3 c(g, Unit::Norm01);
    std::fill(c.data.begin(), c.data.end(), 0.42);
    for (const PlaheParams& p : {PlaheParams{1.0, 1.0, {9, 9, 9}, 0.5},
                                 PlaheParams{0.6, 0.7, {5, 5, 5}, 0.4},
                                 PlaheParams{0.2, 0.0, {3, 3, 3}, 1.0}}) {
        const Volume3 out = plahe(c, p);
        for (double v : out.data)
            expect(v == 0.5, "constant input did not map to exactly 0.5");
    }

    const Volume3 f = random_volume(g, Unit::Norm01, 89);
    PlaheParams p0;
    p0.alpha = 0.3;
    p0.beta = 0.0;
    p0.window = {5, 5, 5};
    const Volume3 g0 = plahe(f, p0);
    const Volume3 bm = box_mean(f, p0.window);
    double worst0 = 0.0;
    for (std::size_t i = 0; i < f.data.size(); ++i)
        worst0 = std::max(worst0,
                          std::abs(g0.data[i] - (0.5 + 0.5 * (f.data[i] - bm.data[i]))));
    expect(worst0 <= 1e-6,
           "beta=0 deviates from the mean-subtraction form by " + fmt(worst0) + " (limit 1e-6)");

    PlaheParams p1;
    p1.alpha = 1.0;
    p1.beta = 1.0;
    p1.window = {17, 17, 17};  // covers the whole 8^3 volume at every voxel
    const Volume3 g1 = plahe(f, p1);
    double worst1 = 0.0;
    const double count = static_cast<double>(f.data.size());
    for (std::size_t i = 0; i < f.data.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < f.data.size(); ++j) {
            const double d = f.data[i] - f.data[j];
            if (d > 0.0)
                s += std::pow(d, p1.alpha);
            else if (d < 0.0)
                s -= std::pow(-d, p1.alpha);
        }
        const double want = std::clamp(0.5 + 0.5 * s / count, 0.0, 1.0);
        worst1 = std::max(worst1, std::abs(g1.data[i] - want));
    }
    expect(worst1 <= 1e-6,
           "full-window output deviates from the pairwise oracle by " + fmt(worst1) +
               " (limit 1e-6)");
    return "constant exact, beta=0 within " + fmt(worst0, 2) + ", full window within " +
           fmt(worst1, 2);
}

std::string c9_loss_arithmetic() {
    constexpr double kTol = 1e-12;
    expect(std::abs(generator_loss({1.0}, {0.5}, {0.5})) <= kTol, "fooled, exact L1 != 0");
    expect(std::abs(generator_loss({0.0}, {0.5}, {0.5}) - 1.0) <= kTol, "rejected != 1");
    expect(std::abs(generator_loss({1.0}, {0.49}, {0.5}) - 1.0) <= kTol,
           "lambda * 0.01 L1 != 1");
    expect(std::abs(generator_loss({1.0, 0.0}, {0.25}, {0.25}) - 0.5) <= kTol,
           "mixed batch != 0.5");
    expect(std::abs(discriminator_loss({1.0}, {0.0})) <= kTol, "perfect discriminator != 0");
    expect(std::abs(discriminator_loss({0.0}, {1.0}) - 1.0) <= kTol, "inverted != 1");

    StabilizerConfig sc;
    expect(noise_variance(0, sc) == 0.2, "instance noise does not start at 0.2");
    expect(noise_variance(sc.total_epochs - 1, sc) == 0.0, "instance noise does not reach 0");
    expect(learning_rate(0, 100) == 0.0002, "learning rate does not start at 2e-4");
    expect(learning_rate(99, 100) == 0.0, "learning rate does not reach 0");
    return "six worked losses within 1e-12, schedules hit 0.2->0 and 0.0002->0";
}

json make_compose_config(std::array<int, 2> det, int views, int subsets, int iterations,
                         std::int64_t seed, bool full_bank) {
    json cfg{{"geometry", {{"det_dims", {det[0], det[1]}},
                           {"det_spacing", {3.0, 3.0}},
                           {"n_views", views}}},
             {"osart",
              {{"n_subsets", subsets}, {"n_iterations", iterations}, {"relax", 0.5}}},
             {"noise_sigma", 0.01},
             {"seed", seed}};
    if (full_bank) {
        cfg["artifact_bank"] = {
            {{"alpha", 1.0}, {"beta", 1.0}, {"window", {9, 9, 9}}, {"gain", 0.5}},
            {{"alpha", 1.0}, {"beta", 0.0}, {"window", {13, 13, 13}}, {"gain", 0.45}},
            {{"alpha", 0.7}, {"beta", 1.0}, {"window", {9, 9, 9}}, {"gain", 0.4}},
            {{"alpha", 0.5}, {"beta", 0.8}, {"window", {11, 11, 11}}, {"gain", 0.35}},
            {{"alpha", 0.3}, {"beta", 0.6}, {"window", {13, 13, 13}}, {"gain", 0.3}}};
        cfg["geoms"] = {{{"kind", "identity"}},
                        {{"kind", "scale_shear"}, {"scale", 1.2}, {"shear_deg", 8.0}},
                        {{"kind", "scale_rotate"}, {"scale", 0.8}, {"rotate_deg", 5.0}}};
    } else {
        cfg["artifact_bank"] = {
            {{"alpha", 1.0}, {"beta", 1.0}, {"window", {5, 5, 5}}, {"gain", 0.5}},
            {{"alpha", 0.6}, {"beta", 0.8}, {"window", {5, 5, 5}}, {"gain", 0.4}}};
        cfg["geoms"] = {{{"kind", "identity"}},
                        {{"kind", "scale_rotate"}, {"scale", 0.9}, {"rotate_deg", 6.0}}};
    }
    return cfg;
}

void write_compose_inputs(const Grid3& g, const TempDir& tmp, const std::string& prefix,
                          std::uint64_t seed) {
    const Volume3 shape = nested_ellipsoids(g);
    Volume3 pct(g, Unit::HU);
    for (std::size_t i = 0; i < pct.data.size(); ++i)
        pct.data[i] = -950.0 + 1800.0 * shape.data[i];
    Volume3 cbct = pct;
    Rng rng(seed);
    for (auto& v : cbct.data)
        v = std::clamp(v + 120.0 * (rng.uniform() - 0.5), -1000.0, 3095.0);
    write_volume(pct, tmp.str(prefix + "_pct.json"));
    write_volume(cbct, tmp.str(prefix + "_cbct.json"));
    write_label_volume(sphere_labels(g, 0.15 * g.dims[0] * g.spacing[0], 4),
                       tmp.str(prefix + "_labels.json"));
}

std::vector<std::string> file_list(const std::filesystem::path& dir) {
    std::vector<std::string> names;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
        if (e.is_regular_file())
            names.push_back(std::filesystem::relative(e.path(), dir).string());
    std::sort(names.begin(), names.end());
    return names;
}

std::string c10_pipeline_determinism() {
    TempDir tmp("acc_compose");

    // Desk scale: 5 artifacts x 3 geometries at 64^3, 60 views.
    const Grid3 g = centered_grid({64, 64, 64});
    write_compose_inputs(g, tmp, "full", 20260818);
    {
        std::ofstream out(tmp.str("full_cfg.json"));
        out << make_compose_config({64, 64}, 60, 6, 3, 20260818, true).dump(2) << '\n';
    }
    const std::string full_args = "compose --pct " + tmp.str("full_pct.json") + " --cbct " +
                                  tmp.str("full_cbct.json") + " --labels " +
                                  tmp.str("full_labels.json") + " --config " +
                                  tmp.str("full_cfg.json") + " --outdir " + tmp.str("full_out");
    const auto t0 = std::chrono::steady_clock::now();
    const CliResult full = run_cli(full_args);
    const double dt = seconds_since(t0);
    expect(full.code == 0, "desk-scale compose exited with " + std::to_string(full.code));
    expect(dt < 900.0, "desk-scale compose took " + fmt(dt) + " s (limit 900)");
    const json manifest = json::parse(std::ifstream(tmp.str("full_out/manifest.json")));
    expect(manifest.size() == 15,
           "expected 15 manifest records, found " + std::to_string(manifest.size()));
    for (const auto& rec : manifest) {
        const Volume3 vp = read_volume(tmp.str("full_out/") +
                                       rec.at("outputs").at("pct").get<std::string>());
        const Volume3 vs = read_volume(tmp.str("full_out/") +
                                       rec.at("outputs").at("pscbct").get<std::string>());
        const LabelVolume vl = read_label_volume(
            tmp.str("full_out/") + rec.at("outputs").at("labels").get<std::string>());
        for (const Grid3* gr : {&vp.grid, &vs.grid, &vl.grid})
            expect(gr->dims == g.dims && gr->spacing == g.spacing && gr->origin == g.origin,
                   "emitted volume grid differs from the input grid");
    }

    // Determinism: a small 2 x 2 run repeated must match byte for byte.
    const Grid3 gs = centered_grid({32, 32, 32});
    write_compose_inputs(gs, tmp, "small", 7);
    {
        std::ofstream out(tmp.str("small_cfg.json"));
        out << make_compose_config({32, 32}, 12, 2, 2, 7, false).dump(2) << '\n';
    }
    const std::string small_args = "compose --pct " + tmp.str("small_pct.json") + " --cbct " +
                                   tmp.str("small_cbct.json") + " --labels " +
                                   tmp.str("small_labels.json") + " --config " +
                                   tmp.str("small_cfg.json") + " --outdir ";
    expect(run_cli(small_args + tmp.str("rep1")).code == 0, "small compose run 1 failed");
    expect(run_cli(small_args + tmp.str("rep2")).code == 0, "small compose run 2 failed");
    const auto names1 = file_list(tmp.path() / "rep1");
    const auto names2 = file_list(tmp.path() / "rep2");
    expect(names1 == names2, "reruns emitted different file sets");
    for (const auto& name : names1)
        expect(slurp((tmp.path() / "rep1" / name).string()) ==
                   (slurp((tmp.path() / "rep2" / name).string())),
               "rerun differs in " + name);
    return "15 records on one grid in " + fmt(dt, 3) + " s; rerun bit-identical (" +
           std::to_string(names1.size()) + " files)";
}

std::string c11_volume_scaling() {
    Grid3 g = centered_grid({64, 64, 64});
    const LabelVolume sphere = sphere_labels(g, 20.0, 4);
    AffineSpec spec;
    spec.kind = AffineKind::ScaleRotate;
    spec.scale = 0.8;
    spec.rotate_deg = 5.0;
    const LabelVolume warped = apply_affine(sphere, spec);

    auto count = [](const LabelVolume& lv) {
        std::size_t n = 0;
        for (auto l : lv.labels) n += l == 4;
        return static_cast<double>(n);
    };
    const double ratio = count(warped) / count(sphere);
    const double want = 0.8 * 0.8 * 0.8;
    expect(std::abs(ratio - want) <= 0.05 * want,
           "voxel count ratio " + fmt(ratio) + " vs 0.512 (limit 5%)");
    return "voxel count ratio " + fmt(ratio, 4) + " (expected 0.512 within 5%)";
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* env = std::getenv("CBCTFORGE_BIN"))
        g_cli = env;
    else if (argc > 1)
        g_cli = argv[1];

    struct Criterion {
        const char* name;
        std::function<std::string()> body;
    };
    const std::vector<Criterion> criteria{
        {"receptive-field chain", c1_receptive_field},
        {"normalization endpoints", c2_normalization_endpoints},
        {"projector chord integrals", c3_chord_integrals},
        {"projector linearity", c4_linearity},
        {"reconstruction convergence", c5_reconstruction_convergence},
        {"reconstruction fixed point", c6_fixed_point},
        {"metric oracle equivalence", c7_metric_oracles},
        {"contrast-transform closed forms", c8_contrast_closed_forms},
        {"adversarial loss arithmetic", c9_loss_arithmetic},
        {"pipeline determinism and pairing", c10_pipeline_determinism},
        {"augmentation volume scaling", c11_volume_scaling},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        std::string detail;
        bool ok = true;
        try {
            detail = criteria[i].body();
        } catch (const std::exception& e) {
            ok = false;
            detail = e.what();
        }
        std::printf("%s %2zu/%zu  %-34s %s\n", ok ? "PASS" : "FAIL", i + 1, criteria.size(),
                    criteria[i].name, detail.c_str());
        std::fflush(stdout);
        failed += !ok;
    }
    if (failed) std::printf("%d criterion(s) FAILED\n", failed);
    return failed ? 1 : 0;
}
