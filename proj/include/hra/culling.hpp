// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Three-tier visibility: component spheres against the frustum, back faces of
// closed components, then per-splat triangle and frustum queries. All tiers
// write into one visibility buffer.
//
#pragma once

#include "hra/camera.hpp"
#include "hra/rig.hpp"
#include "hra/splats.hpp"

#include <array>
#include <span>
#include <vector>

namespace hra {

struct Plane {
    Vec3d normal = Vec3d::UnitZ(); ///< unit, pointing inside
    double offset = 0.0;
    double distance(const Vec3d &p) const { return normal.dot(p) + offset; }
};

struct Frustum {
    std::array<Plane, 6> planes; ///< left, right, top, bottom, near, far
    double near = 0.0;
    double far  = 0.0;

    /// Side planes sit `guard_pixels` outside the outermost pixel centers.
    static Frustum from_camera(const Camera &camera, double guard_pixels = kGuardPixels);
    /// True only when the sphere is strictly outside some plane.
    bool sphere_outside(const Vec3d &center, double radius) const;

    /// Covers the 0.3 px^2 low-pass dilation at a 3 sigma cutoff.
    static constexpr double kGuardPixels = 2.0;
};

inline constexpr double kBackfaceEpsilon = 1e-6;

struct TierCounts {
    std::size_t total    = 0;
    std::size_t mesh     = 0; ///< splats whose component survived
    std::size_t triangle = 0; ///< ... and whose triangle survived (or label 0)
    std::size_t splat    = 0; ///< final survivors
};

struct VisibilityBuffer {
    std::vector<std::uint8_t> component;
    std::vector<std::uint8_t> triangle;
    std::vector<std::uint8_t> splat;
    TierCounts counts;
};

struct CullToggles {
    bool mesh     = true;
    bool triangle = true;
    bool splat    = true;
};

/// Inflation radius covering any splat's footprint: cutoff * largest rest
/// scale * largest triangle stretch.
inline double splat_cull_radius(float max_rest_scale, float max_stretch, float radius_cutoff) {
    return double(radius_cutoff) * double(max_rest_scale) * double(max_stretch);
}

/// Component bit set unless its sphere is strictly outside the frustum.
std::vector<std::uint8_t> cull_meshes(std::span<const BoundingSphere> spheres, const Frustum &frustum,
                                      bool enabled = true);

/// Triangle bit cleared iff its component is closed and n . (camera - centroid) <= -eps.
/// Triangles of culled components are cleared; degenerate triangles are cleared.
std::vector<std::uint8_t> cull_triangles(std::span<const std::uint8_t> component_bits,
                                         std::span<const std::uint8_t> component_closed,
                                         std::span<const std::uint16_t> triangle_component,
                                         std::span<const TriangleFrame> frames, const Vec3f &camera_position,
                                         bool enabled = true, unsigned threads = 1);

struct SplatCullInputs {
    const PositionView *positions = nullptr;
    std::span<const std::uint8_t> component_bits;
    std::span<const std::uint8_t> triangle_bits;
    std::span<const std::uint16_t> triangle_component;
    std::span<const TriangleFrame> frames;
    double inflate_radius = 0.0;
};

/// Ascending survivor indices; also fills `splat_bits` (one byte per splat) and tier counts.
std::vector<std::uint32_t> cull_splats(const SplatCullInputs &in, const Frustum &frustum, bool frustum_enabled,
                                       std::vector<std::uint8_t> &splat_bits, TierCounts &counts,
                                       unsigned threads = 1);

/// Margin added to component spheres so they enclose splat footprints, not just vertices.
double component_splat_margin(const PositionView &positions, std::span<const std::uint16_t> triangle_component,
                              std::size_t component, double inflate_radius);

struct CullInputs {
    const PositionView *positions = nullptr;
    const PosedGeometry *geometry = nullptr;
    std::span<const std::uint8_t> component_closed;
    std::span<const std::uint16_t> triangle_component;
    std::span<const double> component_margin; ///< added to each posed sphere radius
    double inflate_radius = 0.0;
    double guard_pixels   = Frustum::kGuardPixels;
};

/// Runs all three tiers for one camera.
VisibilityBuffer cull(const CullInputs &in, const Camera &camera, const CullToggles &toggles,
                      std::vector<std::uint32_t> &survivors, unsigned threads = 1);

} // namespace hra
