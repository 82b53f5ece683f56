#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbctforge {

// CT intensity bounds enforced on ingest.
inline constexpr double kHuMin = -1000.0;
inline constexpr double kHuMax = 3095.0;

/// Regular 3D voxel lattice with physical placement. `origin` is the world
/// position (mm) of the center of voxel (0,0,0); voxel data is stored
/// x-fastest (x, then y, then z).
struct Grid3 {
    std::array<int, 3> dims{1, 1, 1};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    std::array<double, 3> origin{0.0, 0.0, 0.0};

    bool operator==(const Grid3&) const = default;

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    }

    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
    }

    std::array<double, 3> world(double i, double j, double k) const {
        return {origin[0] + i * spacing[0], origin[1] + j * spacing[1],
                origin[2] + k * spacing[2]};
    }

    /// World center of the voxel lattice (midpoint of the voxel-center box).
    std::array<double, 3> center() const {
        return world(0.5 * (dims[0] - 1), 0.5 * (dims[1] - 1), 0.5 * (dims[2] - 1));
    }

    void validate() const;
};

enum class Unit { HU, Norm01, NormSigned, Unitless };

const char* unit_name(Unit u);
Unit unit_from_name(const std::string& name);

/// Neutral value used when sampling outside a volume's support: air for HU,
/// the low end of each normalized range otherwise.
double fill_value(Unit u);

struct Volume3 {
    Grid3 grid;
    std::vector<double> data;  // x-fastest, length = grid.voxel_count()
    Unit unit = Unit::Unitless;

    Volume3() = default;
    Volume3(const Grid3& g, Unit u, double value = 0.0)
        : grid(g), data(g.voxel_count(), value), unit(u) {}

    double& at(int i, int j, int k) { return data[grid.index(i, j, k)]; }
    double at(int i, int j, int k) const { return data[grid.index(i, j, k)]; }

    void validate() const;
};

/// Organ label order: eso4 is lungs=1, heart=2, spinal cord=3, esophagus=4;
/// eso1 is the reverse (esophagus=1 ... lungs=4). Background is 0 in both.
enum class LabelScheme { Eso1, Eso4 };

const char* scheme_name(LabelScheme s);
LabelScheme scheme_from_name(const std::string& name);

/// Anatomical name of a label under a scheme ("background", "lungs", ...).
const char* organ_name(LabelScheme s, std::uint8_t label);

inline constexpr std::uint8_t kMaxLabel = 4;

struct LabelVolume {
    Grid3 grid;
    std::vector<std::uint8_t> labels;  // x-fastest, values in {0..4}
    LabelScheme scheme = LabelScheme::Eso4;

    LabelVolume() = default;
    LabelVolume(const Grid3& g, LabelScheme s, std::uint8_t value = 0)
        : grid(g), labels(g.voxel_count(), value), scheme(s) {}

    std::uint8_t& at(int i, int j, int k) { return labels[grid.index(i, j, k)]; }
    std::uint8_t at(int i, int j, int k) const { return labels[grid.index(i, j, k)]; }

    void validate() const;
};

void require_same_grid(const Grid3& a, const Grid3& b, const char* what);

}  // namespace cbctforge
