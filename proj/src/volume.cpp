#include "cbctforge/volume.hpp"

#include <cmath>

namespace cbctforge {

void Grid3::validate() const {
    for (int a = 0; a < 3; ++a) {
        if (dims[a] < 1)
            throw std::invalid_argument("Grid3: dims must be >= 1");
        if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
            throw std::invalid_argument("Grid3: spacing must be > 0");
        if (!std::isfinite(origin[a]))
            throw std::invalid_argument("Grid3: origin must be finite");
    }
}

const char* unit_name(Unit u) {
    switch (u) {
        case Unit::HU: return "HU";
        case Unit::Norm01: return "norm01";
        case Unit::NormSigned: return "normSigned";
        case Unit::Unitless: return "unitless";
    }
    return "unitless";
}

Unit unit_from_name(const std::string& name) {
    if (name == "HU") return Unit::HU;
    if (name == "norm01") return Unit::Norm01;
    if (name == "normSigned") return Unit::NormSigned;
    if (name == "unitless") return Unit::Unitless;
    throw std::invalid_argument("unknown unit name: " + name);
}

double fill_value(Unit u) {
    switch (u) {
        case Unit::HU: return kHuMin;
        case Unit::NormSigned: return -1.0;
        case Unit::Norm01:
        case Unit::Unitless: return 0.0;
    }
    return 0.0;
}

const char* scheme_name(LabelScheme s) {
    return s == LabelScheme::Eso1 ? "eso1" : "eso4";
}

LabelScheme scheme_from_name(const std::string& name) {
    if (name == "eso1") return LabelScheme::Eso1;
    if (name == "eso4") return LabelScheme::Eso4;
    throw std::invalid_argument("unknown label scheme: " + name);
}

const char* organ_name(LabelScheme s, std::uint8_t label) {
    static const char* eso4[] = {"background", "lungs", "heart", "spinal_cord", "esophagus"};
    static const char* eso1[] = {"background", "esophagus", "spinal_cord", "heart", "lungs"};
    if (label > kMaxLabel) throw std::invalid_argument("organ_name: label out of range");
    return (s == LabelScheme::Eso1 ? eso1 : eso4)[label];
}

void Volume3::validate() const {
    grid.validate();
    if (data.size() != grid.voxel_count())
        throw std::invalid_argument("Volume3: data length does not match dims");
}

void LabelVolume::validate() const {
    grid.validate();
    if (labels.size() != grid.voxel_count())
        throw std::invalid_argument("LabelVolume: label count does not match dims");
    for (std::uint8_t v : labels)
        if (v > kMaxLabel)
            throw std::invalid_argument("LabelVolume: label outside {0..4}");
}

void require_same_grid(const Grid3& a, const Grid3& b, const char* what) {
    if (!(a == b))
        throw std::invalid_argument(std::string(what) + ": grids do not match");
}

}  // namespace cbctforge
