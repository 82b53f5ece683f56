#include "cbctforge/resample.hpp"

#include <cmath>

namespace cbctforge {
namespace {

// Continuous input index of a world point; no bounds handling here.
inline void world_to_index(const Grid3& g, const double w[3], double c[3]) {
    for (int a = 0; a < 3; ++a) c[a] = (w[a] - g.origin[a]) / g.spacing[a];
}

inline bool nearest_index(const Grid3& g, const double c[3], int idx[3]) {
    for (int a = 0; a < 3; ++a) {
        const int i = static_cast<int>(std::lround(c[a]));
        if (i < 0 || i >= g.dims[a]) return false;
        idx[a] = i;
    }
    return true;
}

}  // namespace

double sample_trilinear(const Volume3& v, const double c[3], double fill) {
    const auto& d = v.grid.dims;
    int i0[3];
    double t[3];
    for (int a = 0; a < 3; ++a) {
        if (c[a] < 0.0 || c[a] > d[a] - 1) return fill;
        int i = static_cast<int>(std::floor(c[a]));
        if (i > d[a] - 2) i = d[a] - 2;  // c == dims-1 lands on the last cell
        if (i < 0) i = 0;                // single-voxel axis
        i0[a] = i;
        t[a] = c[a] - i;
    }
    const int i1 = (d[0] > 1) ? i0[0] + 1 : i0[0];
    const int j1 = (d[1] > 1) ? i0[1] + 1 : i0[1];
    const int k1 = (d[2] > 1) ? i0[2] + 1 : i0[2];

    const double c000 = v.at(i0[0], i0[1], i0[2]);
    const double c100 = v.at(i1, i0[1], i0[2]);
    const double c010 = v.at(i0[0], j1, i0[2]);
    const double c110 = v.at(i1, j1, i0[2]);
    const double c001 = v.at(i0[0], i0[1], k1);
    const double c101 = v.at(i1, i0[1], k1);
    const double c011 = v.at(i0[0], j1, k1);
    const double c111 = v.at(i1, j1, k1);

    const double x0 = 1.0 - t[0], y0 = 1.0 - t[1], z0 = 1.0 - t[2];
    return z0 * (y0 * (x0 * c000 + t[0] * c100) + t[1] * (x0 * c010 + t[0] * c110)) +
           t[2] * (y0 * (x0 * c001 + t[0] * c101) + t[1] * (x0 * c011 + t[0] * c111));
}

Volume3 resample(const Volume3& v, const Grid3& target, Interp interp) {
    v.validate();
    target.validate();
    if (target == v.grid) return v;

    Volume3 out(target, v.unit);
    const double fill = fill_value(v.unit);
    for (int k = 0; k < target.dims[2]; ++k)
        for (int j = 0; j < target.dims[1]; ++j)
            for (int i = 0; i < target.dims[0]; ++i) {
                const auto w = target.world(i, j, k);
                double c[3];
                world_to_index(v.grid, w.data(), c);
                double value;
                if (interp == Interp::Trilinear) {
                    value = sample_trilinear(v, c, fill);
                } else {
                    int idx[3];
                    value = nearest_index(v.grid, c, idx) ? v.at(idx[0], idx[1], idx[2]) : fill;
                }
                out.at(i, j, k) = value;
            }
    return out;
}

LabelVolume resample(const LabelVolume& lv, const Grid3& target, Interp interp) {
    if (interp != Interp::Nearest)
        throw std::invalid_argument("resample: label volumes require nearest-neighbor interpolation");
    lv.validate();
    target.validate();
    if (target == lv.grid) return lv;

    LabelVolume out(target, lv.scheme);
    for (int k = 0; k < target.dims[2]; ++k)
        for (int j = 0; j < target.dims[1]; ++j)
            for (int i = 0; i < target.dims[0]; ++i) {
                const auto w = target.world(i, j, k);
                double c[3];
                world_to_index(lv.grid, w.data(), c);
                int idx[3];
                out.at(i, j, k) = nearest_index(lv.grid, c, idx) ? lv.at(idx[0], idx[1], idx[2])
                                                                 : std::uint8_t{0};
            }
    return out;
}

}  // namespace cbctforge
