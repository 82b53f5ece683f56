#include "cbctforge/affine.hpp"

#include <cmath>
#include <stdexcept>

#include "cbctforge/resample.hpp"

namespace cbctforge {
namespace {

constexpr double kPi = 3.14159265358979323846;

Mat4 identity_mat() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

// Transformed point, assuming an affine bottom row.
std::array<double, 3> apply(const Mat4& m, const std::array<double, 3>& p) {
    std::array<double, 3> out{};
    for (int r = 0; r < 3; ++r)
        out[r] = m[r][0] * p[0] + m[r][1] * p[1] + m[r][2] * p[2] + m[r][3];
    return out;
}

}  // namespace

const char* affine_kind_name(AffineKind k) {
    switch (k) {
        case AffineKind::Identity: return "identity";
        case AffineKind::ScaleShear: return "scale_shear";
        case AffineKind::ScaleRotate: return "scale_rotate";
        case AffineKind::Custom: return "custom";
    }
    throw std::logic_error("affine_kind_name: bad enum value");
}

AffineKind affine_kind_from_name(const std::string& name) {
    if (name == "identity") return AffineKind::Identity;
    if (name == "scale_shear") return AffineKind::ScaleShear;
    if (name == "scale_rotate") return AffineKind::ScaleRotate;
    if (name == "custom") return AffineKind::Custom;
    throw std::invalid_argument("unknown affine kind \"" + name + "\"");
}

void AffineSpec::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("AffineSpec: scale must be finite and > 0");
    if (!(std::abs(shear_deg) < 45.0))
        throw std::invalid_argument("AffineSpec: |shear_deg| must be < 45");
    if (!std::isfinite(rotate_deg))
        throw std::invalid_argument("AffineSpec: rotate_deg must be finite");
    if ((kind == AffineKind::Custom) != matrix.has_value())
        throw std::invalid_argument("AffineSpec: matrix is required for custom and only custom");
    if (matrix) {
        const auto& m = *matrix;
        for (const auto& row : m)
            for (double x : row)
                if (!std::isfinite(x))
                    throw std::invalid_argument("AffineSpec: non-finite matrix entry");
        if (m[3][0] != 0.0 || m[3][1] != 0.0 || m[3][2] != 0.0 || m[3][3] != 1.0)
            throw std::invalid_argument("AffineSpec: matrix must be affine (bottom row 0 0 0 1)");
    }
}

Mat4 AffineSpec::to_matrix(const std::array<double, 3>& center) const {
    validate();
    if (kind == AffineKind::Custom) return *matrix;

    Mat4 m = identity_mat();
    if (kind == AffineKind::ScaleShear) {
        m[0][0] = scale;
        m[0][1] = scale * std::tan(shear_deg * kPi / 180.0);
        m[1][1] = scale;
        m[2][2] = scale;
    } else if (kind == AffineKind::ScaleRotate) {
        const double c = std::cos(rotate_deg * kPi / 180.0);
        const double s = std::sin(rotate_deg * kPi / 180.0);
        m[0][0] = scale * c;
        m[0][1] = -scale * s;
        m[1][0] = scale * s;
        m[1][1] = scale * c;
        m[2][2] = scale;
    }
    // recenter: T(center) * L * T(-center)
    for (int r = 0; r < 3; ++r)
        m[r][3] = center[r] - (m[r][0] * center[0] + m[r][1] * center[1] + m[r][2] * center[2]);
    return m;
}

Mat4 invert_affine(const Mat4& m) {
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    if (!(std::abs(det) > 1e-12)) throw std::invalid_argument("singular affine matrix");

    Mat4 inv = identity_mat();
    const double d = 1.0 / det;
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * d;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * d;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * d;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
    for (int r = 0; r < 3; ++r)
        inv[r][3] = -(inv[r][0] * m[0][3] + inv[r][1] * m[1][3] + inv[r][2] * m[2][3]);
    return inv;
}

Volume3 apply_affine(const Volume3& v, const AffineSpec& a) {
    v.validate();
    a.validate();
    if (a.kind == AffineKind::Identity) return v;

    const Mat4 inv = invert_affine(a.to_matrix(v.grid.center()));
    const double fill = fill_value(v.unit);
    Volume3 out(v.grid, v.unit);
    const auto& g = v.grid;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                const auto src = apply(inv, g.world(i, j, k));
                const double c[3] = {(src[0] - g.origin[0]) / g.spacing[0],
                                     (src[1] - g.origin[1]) / g.spacing[1],
                                     (src[2] - g.origin[2]) / g.spacing[2]};
                out.at(i, j, k) = sample_trilinear(v, c, fill);
            }
    return out;
}

LabelVolume apply_affine(const LabelVolume& lv, const AffineSpec& a) {
    lv.validate();
    a.validate();
    if (a.kind == AffineKind::Identity) return lv;

    const Mat4 inv = invert_affine(a.to_matrix(lv.grid.center()));
    LabelVolume out(lv.grid, lv.scheme);
    const auto& g = lv.grid;
#pragma omp parallel for schedule(static)
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i) {
                const auto src = apply(inv, g.world(i, j, k));
                std::uint8_t label = 0;
                bool inside = true;
                int idx[3];
                for (int axis = 0; axis < 3; ++axis) {
                    const double c = (src[axis] - g.origin[axis]) / g.spacing[axis];
                    const long r = std::lround(c);
                    if (r < 0 || r >= g.dims[axis]) {
                        inside = false;
                        break;
                    }
                    idx[axis] = static_cast<int>(r);
                }
                if (inside) label = lv.at(idx[0], idx[1], idx[2]);
                out.at(i, j, k) = label;
            }
    return out;
}

}  // namespace cbctforge
