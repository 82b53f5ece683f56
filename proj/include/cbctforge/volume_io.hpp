#pragma once

#include <string>

#include "cbctforge/volume.hpp"

namespace cbctforge {

enum class VolumeFormat { VOL1, MetaImage };

// VOL1 is the toolkit's native pair format: "<stem>.json" header plus
// "<stem>.raw" little-endian payload. Image payloads are f32le, label
// payloads are u8. Paths may name either the .json file or the bare stem.
//
// MetaImage support covers uncompressed local-data .mha files with
// MET_SHORT or MET_FLOAT elements; values are interpreted as HU.

/// Reads a scalar volume. HU data is clamped to [-1000, 3095] on ingest.
Volume3 read_volume(const std::string& path, VolumeFormat format = VolumeFormat::VOL1);

/// Writes a VOL1 pair. Rejects non-finite data.
void write_volume(const Volume3& v, const std::string& path);

/// Reads a VOL1 label volume (dtype u8, unit "label").
LabelVolume read_label_volume(const std::string& path,
                              LabelScheme scheme = LabelScheme::Eso4);

void write_label_volume(const LabelVolume& lv, const std::string& path);

}  // namespace cbctforge
