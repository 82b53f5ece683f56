#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbctforge/volume.hpp"

namespace cbctforge {

/// Circular cone-beam acquisition. The source orbits the volume center in the
/// xy plane; the flat detector sits opposite, centered on the source-isocenter
/// line, with u along the in-plane tangent and v along +z.
struct ConeBeamGeometry {
    double sad = 1000.0;  // source-to-axis distance, mm
    double sdd = 1500.0;  // source-to-detector distance, mm
    std::array<int, 2> det_dims{256, 256};        // bins along (u, v)
    std::array<double, 2> det_spacing{2.0, 2.0};  // mm per bin along (u, v)
    int n_views = 360;
    std::vector<double> angles;      // radians; empty = uniform over [0, 2pi)
    std::optional<double> step_mm;   // ray sampling step; unset = half the
                                     // smallest voxel spacing of the volume

    void validate() const;
    std::vector<double> view_angles() const;
    double resolve_step(const Grid3& grid) const;
};

/// Unitless line integrals, view-major then v then u.
struct ProjectionStack {
    ConeBeamGeometry geometry;
    std::vector<double> data;

    std::size_t index(int view, int iv, int iu) const {
        return (static_cast<std::size_t>(view) * geometry.det_dims[1] + iv) *
                   geometry.det_dims[0] +
               iu;
    }
    double& at(int view, int iv, int iu) { return data[index(view, iv, iu)]; }
    double at(int view, int iv, int iu) const { return data[index(view, iv, iu)]; }

    void validate() const;
};

/// Ray-driven projection with fixed-step midpoint sampling; trilinear,
/// clamp-to-edge within the voxel extents. The returned stack carries the
/// geometry with angles and step resolved, so it repeats bit-identically.
ProjectionStack forward_project(const Volume3& v, const ConeBeamGeometry& g);

/// Adds i.i.d. Gaussian noise with standard deviation sigma * max(p.data).
ProjectionStack add_projection_noise(const ProjectionStack& p, double sigma, std::uint64_t seed);

/// `<name>.proj.json` (geometry header) + `<name>.proj.raw` (little-endian
/// float32, same ordering as `data`). `path` may be either file or the stem.
void write_projections(const ProjectionStack& p, const std::string& path);
ProjectionStack read_projections(const std::string& path);

}  // namespace cbctforge
