#pragma once

#include <array>
#include <optional>
#include <string>

#include "cbctforge/volume.hpp"

namespace cbctforge {

enum class AffineKind { Identity, ScaleShear, ScaleRotate, Custom };

const char* affine_kind_name(AffineKind k);
AffineKind affine_kind_from_name(const std::string& name);

using Mat4 = std::array<std::array<double, 4>, 4>;

/// In-plane augmentation transform. The built-in kinds act about the volume
/// center with z untouched: shear maps x' = x + tan(shear_deg) * y, rotation
/// spins about the z axis, scale is uniform. A custom matrix is a full
/// homogeneous world-coordinate transform, applied as given (no recentering).
struct AffineSpec {
    AffineKind kind = AffineKind::Identity;
    double scale = 1.0;
    double shear_deg = 0.0;
    double rotate_deg = 0.0;
    std::optional<Mat4> matrix;  // Custom only

    void validate() const;
    Mat4 to_matrix(const std::array<double, 3>& center) const;
};

Mat4 invert_affine(const Mat4& m);  // throws on a singular matrix

/// Inverse-mapping resample onto the same grid: each output voxel pulls from
/// the input at A^-1 x_world. Trilinear for images (fill -1000 HU / unit
/// floor), nearest for labels (fill 0).
Volume3 apply_affine(const Volume3& v, const AffineSpec& a);
LabelVolume apply_affine(const LabelVolume& lv, const AffineSpec& a);

}  // namespace cbctforge
