#include "cbctforge/projector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cbctforge/rng.hpp"
#include "io_util.hpp"
#include "json.hpp"

namespace cbctforge {
namespace {

using nlohmann::json;

// Trilinear sampling in continuous voxel index space, clamped to the lattice
// (texture-style clamp-to-edge); callers only pass points inside the voxel
// extents, where clamping reaches at most half a voxel.
struct ClampSampler {
    const double* data;
    int nx, ny, nz;
    std::size_t sy, sz;

    explicit ClampSampler(const Volume3& v)
        : data(v.data.data()),
          nx(v.grid.dims[0]),
          ny(v.grid.dims[1]),
          nz(v.grid.dims[2]),
          sy(static_cast<std::size_t>(v.grid.dims[0])),
          sz(static_cast<std::size_t>(v.grid.dims[0]) * v.grid.dims[1]) {}

    double operator()(double cx, double cy, double cz) const {
        cx = std::clamp(cx, 0.0, static_cast<double>(nx - 1));
        cy = std::clamp(cy, 0.0, static_cast<double>(ny - 1));
        cz = std::clamp(cz, 0.0, static_cast<double>(nz - 1));
        const int i0 = std::min(static_cast<int>(cx), std::max(nx - 2, 0));
        const int j0 = std::min(static_cast<int>(cy), std::max(ny - 2, 0));
        const int k0 = std::min(static_cast<int>(cz), std::max(nz - 2, 0));
        const int i1 = std::min(i0 + 1, nx - 1);
        const int j1 = std::min(j0 + 1, ny - 1);
        const int k1 = std::min(k0 + 1, nz - 1);
        const double tx = cx - i0, ty = cy - j0, tz = cz - k0;

        const double* p00 = data + k0 * sz + j0 * sy;
        const double* p01 = data + k0 * sz + j1 * sy;
        const double* p10 = data + k1 * sz + j0 * sy;
        const double* p11 = data + k1 * sz + j1 * sy;
        const double a = p00[i0] + tx * (p00[i1] - p00[i0]);
        const double b = p01[i0] + tx * (p01[i1] - p01[i0]);
        const double c = p10[i0] + tx * (p10[i1] - p10[i0]);
        const double d = p11[i0] + tx * (p11[i1] - p11[i0]);
        const double e0 = a + ty * (b - a);
        const double e1 = c + ty * (d - c);
        return e0 + tz * (e1 - e0);
    }
};

std::string proj_stem(const std::string& path) {
    return strip_extension(strip_extension(path, ".proj.json"), ".proj.raw");
}

}  // namespace

void ConeBeamGeometry::validate() const {
    if (!(sad > 0.0) || !(sdd > sad) || !std::isfinite(sdd))
        throw std::invalid_argument("ConeBeamGeometry: require 0 < sad < sdd");
    if (det_dims[0] < 1 || det_dims[1] < 1)
        throw std::invalid_argument("ConeBeamGeometry: detector dims must be >= 1");
    if (!(det_spacing[0] > 0.0) || !(det_spacing[1] > 0.0))
        throw std::invalid_argument("ConeBeamGeometry: detector spacing must be > 0");
    if (n_views < 1) throw std::invalid_argument("ConeBeamGeometry: n_views must be >= 1");
    if (!angles.empty() && static_cast<int>(angles.size()) != n_views)
        throw std::invalid_argument("ConeBeamGeometry: angles size must match n_views");
    for (double a : angles)
        if (!std::isfinite(a)) throw std::invalid_argument("ConeBeamGeometry: non-finite angle");
    if (step_mm && !(*step_mm > 0.0 && std::isfinite(*step_mm)))
        throw std::invalid_argument("ConeBeamGeometry: step_mm must be > 0");
}

std::vector<double> ConeBeamGeometry::view_angles() const {
    if (!angles.empty()) return angles;
    std::vector<double> out(n_views);
    const double d = 2.0 * std::acos(-1.0) / n_views;
    for (int i = 0; i < n_views; ++i) out[i] = i * d;
    return out;
}

double ConeBeamGeometry::resolve_step(const Grid3& grid) const {
    if (step_mm) return *step_mm;
    return 0.5 * std::min({grid.spacing[0], grid.spacing[1], grid.spacing[2]});
}

void ProjectionStack::validate() const {
    geometry.validate();
    const std::size_t expect = static_cast<std::size_t>(geometry.n_views) *
                               geometry.det_dims[0] * geometry.det_dims[1];
    if (data.size() != expect)
        throw std::invalid_argument("ProjectionStack: data length does not match geometry");
    for (double x : data)
        if (!std::isfinite(x))
            throw std::invalid_argument("ProjectionStack: non-finite projection value");
}

ProjectionStack forward_project(const Volume3& vol, const ConeBeamGeometry& g) {
    vol.validate();
    g.validate();
    if (vol.unit != Unit::Norm01)
        throw std::invalid_argument("forward_project: expected a norm01 volume, got " +
                                    std::string(unit_name(vol.unit)));

    ConeBeamGeometry rg = g;
    rg.angles = g.view_angles();
    rg.step_mm = g.resolve_step(vol.grid);
    const double step = *rg.step_mm;
    const int nu = rg.det_dims[0], nv = rg.det_dims[1];
    const double du = rg.det_spacing[0], dv = rg.det_spacing[1];

    ProjectionStack p{rg, std::vector<double>(
                              static_cast<std::size_t>(rg.n_views) * nu * nv, 0.0)};

    double blo[3], bhi[3];  // voxel extents, not voxel centers
    for (int a = 0; a < 3; ++a) {
        blo[a] = vol.grid.origin[a] - 0.5 * vol.grid.spacing[a];
        bhi[a] = vol.grid.origin[a] + (vol.grid.dims[a] - 0.5) * vol.grid.spacing[a];
    }
    const auto iso = vol.grid.center();
    const ClampSampler sample(vol);
    const double inv_sp[3] = {1.0 / vol.grid.spacing[0], 1.0 / vol.grid.spacing[1],
                              1.0 / vol.grid.spacing[2]};

#pragma omp parallel for schedule(static)
    for (int view = 0; view < rg.n_views; ++view) {
        const double ca = std::cos(rg.angles[view]);
        const double sa = std::sin(rg.angles[view]);
        const double src[3] = {iso[0] + rg.sad * ca, iso[1] + rg.sad * sa, iso[2]};
        const double det[3] = {iso[0] - (rg.sdd - rg.sad) * ca, iso[1] - (rg.sdd - rg.sad) * sa,
                               iso[2]};
        const double uhat[2] = {-sa, ca};  // detector u axis (in-plane); v axis is +z

        for (int iv = 0; iv < nv; ++iv) {
            const double off_v = (iv - 0.5 * (nv - 1)) * dv;
            for (int iu = 0; iu < nu; ++iu) {
                const double off_u = (iu - 0.5 * (nu - 1)) * du;
                const double bin[3] = {det[0] + off_u * uhat[0], det[1] + off_u * uhat[1],
                                       det[2] + off_v};
                double dir[3] = {bin[0] - src[0], bin[1] - src[1], bin[2] - src[2]};
                const double len =
                    std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
                for (double& d : dir) d /= len;

                double t0 = 0.0, t1 = len;
                for (int a = 0; a < 3; ++a) {
                    if (std::abs(dir[a]) < 1e-12) {
                        if (src[a] < blo[a] || src[a] > bhi[a]) t1 = t0;
                    } else {
                        double ta = (blo[a] - src[a]) / dir[a];
                        double tb = (bhi[a] - src[a]) / dir[a];
                        if (ta > tb) std::swap(ta, tb);
                        t0 = std::max(t0, ta);
                        t1 = std::min(t1, tb);
                    }
                }
                if (!(t1 > t0)) continue;

                const double L = t1 - t0;
                const long long n = std::max<long long>(1, static_cast<long long>(std::ceil(L / step)));
                const double h = L / static_cast<double>(n);
                double acc = 0.0;
                for (long long m = 0; m < n; ++m) {
                    const double t = t0 + (m + 0.5) * h;
                    acc += sample((src[0] + t * dir[0] - vol.grid.origin[0]) * inv_sp[0],
                                  (src[1] + t * dir[1] - vol.grid.origin[1]) * inv_sp[1],
                                  (src[2] + t * dir[2] - vol.grid.origin[2]) * inv_sp[2]);
                }
                p.at(view, iv, iu) = acc * h;
            }
        }
    }
    return p;
}

ProjectionStack add_projection_noise(const ProjectionStack& p, double sigma, std::uint64_t seed) {
    p.validate();
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("add_projection_noise: sigma must be finite and >= 0");

    ProjectionStack out = p;
    if (sigma == 0.0 || p.data.empty()) return out;
    const double sd = sigma * *std::max_element(p.data.begin(), p.data.end());
    if (sd <= 0.0) return out;

    Rng rng(seed);
    for (double& x : out.data) x += sd * rng.normal();
    return out;
}

void write_projections(const ProjectionStack& p, const std::string& path) {
    p.validate();
    const std::string stem = proj_stem(path);

    json j;
    j["sad"] = p.geometry.sad;
    j["sdd"] = p.geometry.sdd;
    j["det_dims"] = {p.geometry.det_dims[0], p.geometry.det_dims[1]};
    j["det_spacing"] = {p.geometry.det_spacing[0], p.geometry.det_spacing[1]};
    j["n_views"] = p.geometry.n_views;
    j["angles"] = p.geometry.view_angles();
    if (p.geometry.step_mm) j["step_mm"] = *p.geometry.step_mm;

    const std::string header = j.dump(2) + "\n";
    write_file(stem + ".proj.json", header.data(), header.size());

    std::vector<float> payload(p.data.size());
    for (std::size_t i = 0; i < payload.size(); ++i)
        payload[i] = static_cast<float>(p.data[i]);
    write_file(stem + ".proj.raw", reinterpret_cast<const char*>(payload.data()),
               payload.size() * sizeof(float));
}

ProjectionStack read_projections(const std::string& path) {
    const std::string stem = proj_stem(path);

    ConeBeamGeometry g;
    try {
        json j = json::parse(read_file(stem + ".proj.json"));
        g.sad = j.at("sad").get<double>();
        g.sdd = j.at("sdd").get<double>();
        g.det_dims = {j.at("det_dims").at(0).get<int>(), j.at("det_dims").at(1).get<int>()};
        g.det_spacing = {j.at("det_spacing").at(0).get<double>(),
                         j.at("det_spacing").at(1).get<double>()};
        g.n_views = j.at("n_views").get<int>();
        if (j.contains("angles")) g.angles = j.at("angles").get<std::vector<double>>();
        if (j.contains("step_mm")) g.step_mm = j.at("step_mm").get<double>();
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed projection header " + stem + ".proj.json: " +
                                 e.what());
    }
    g.validate();

    const std::vector<char> raw = read_file(stem + ".proj.raw");
    const std::size_t count = static_cast<std::size_t>(g.n_views) * g.det_dims[0] * g.det_dims[1];
    if (raw.size() != count * sizeof(float))
        throw std::runtime_error(stem + ".proj.raw: payload length does not match header");

    ProjectionStack p{std::move(g), std::vector<double>(count)};
    const float* f = reinterpret_cast<const float*>(raw.data());
    for (std::size_t i = 0; i < count; ++i) p.data[i] = f[i];
    p.validate();
    return p;
}

}  // namespace cbctforge
