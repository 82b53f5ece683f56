#pragma once

#include <utility>

#include "cbctforge/volume.hpp"

namespace cbctforge {

/// Maps HU in [-1000, 3095] to [-1, 1]: ((I + 1000) / 4095) * 2 - 1.
Volume3 normalize_ct(const Volume3& v);

/// Exact inverse affine of normalize_ct.
Volume3 denormalize_ct(const Volume3& v);

/// HU to [0, 1] through the same fixed affine ((I + 1000) / 4095).
Volume3 normalize01_ct(const Volume3& v);

/// [0, 1] back to HU.
Volume3 denormalize01_ct(const Volume3& v);

/// Label L in {0..4} to (L/4)*2 - 1, i.e. {-1, -0.5, 0, 0.5, 1}.
Volume3 encode_labels(const LabelVolume& lv);

/// round((v+1)/2*4), clamped to {0..4}.
LabelVolume decode_labels(const Volume3& v, LabelScheme scheme);

/// Permutes organ labels between the eso1 and eso4 orderings (L -> 5 - L for
/// nonzero labels); an involution.
LabelVolume relabel(const LabelVolume& lv, LabelScheme target);

/// Min-max affine map onto [0, 1]. Constant input maps to all zeros.
/// Returns the rescaled volume and the input (min, max).
std::pair<Volume3, std::pair<double, double>> rescale01(const Volume3& v);

}  // namespace cbctforge
