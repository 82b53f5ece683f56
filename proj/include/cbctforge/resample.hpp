#pragma once

#include "cbctforge/volume.hpp"

namespace cbctforge {

enum class Interp { Trilinear, Nearest };

/// Samples the volume on `target` in world coordinates. Out-of-support
/// voxels take fill_value(v.unit). Resampling onto the identical grid
/// returns a bit-identical copy.
Volume3 resample(const Volume3& v, const Grid3& target, Interp interp);

/// Label volumes resample with nearest-neighbor only; fill is 0.
LabelVolume resample(const LabelVolume& lv, const Grid3& target, Interp interp);

/// Trilinear sample at a continuous voxel index; `c` outside
/// [0, dims-1] returns `fill`.
double sample_trilinear(const Volume3& v, const double c[3], double fill);

}  // namespace cbctforge
