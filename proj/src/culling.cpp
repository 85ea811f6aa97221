// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/culling.hpp"
#include "hra/binding.hpp"
#include "hra/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace hra {

Frustum Frustum::from_camera(const Camera &camera, double guard) {
    camera.check();
    const double fx = camera.fx, fy = camera.fy, cx = camera.cx, cy = camera.cy;
    const double x0 = -guard, x1 = double(camera.width) - 1.0 + guard;
    const double y0 = -guard, y1 = double(camera.height) - 1.0 + guard;
    // View-space planes n . p + d >= 0 inside.
    const std::array<std::pair<Vec3d, double>, 6> view = {{
        {Vec3d(fx, 0.0, cx - x0), 0.0},
        {Vec3d(-fx, 0.0, x1 - cx), 0.0},
        {Vec3d(0.0, fy, cy - y0), 0.0},
        {Vec3d(0.0, -fy, y1 - cy), 0.0},
        {Vec3d(0.0, 0.0, 1.0), -double(camera.near)},
        {Vec3d(0.0, 0.0, -1.0), double(camera.far)},
    }};
    const Mat3d r = camera.rotation.cast<double>();
    const Vec3d t = camera.translation.cast<double>();
    Frustum f;
    f.near = camera.near;
    f.far  = camera.far;
    for (int i = 0; i < 6; ++i) {
        const double len = view[i].first.norm();
        const Vec3d n    = view[i].first / len;
        const double d   = view[i].second / len;
        f.planes[i].normal = r.transpose() * n;
        f.planes[i].offset = n.dot(t) + d;
    }
    return f;
}

bool Frustum::sphere_outside(const Vec3d &center, double radius) const {
    for (const auto &p : planes)
        if (p.distance(center) < -radius) return true;
    return false;
}

std::vector<std::uint8_t> cull_meshes(std::span<const BoundingSphere> spheres, const Frustum &frustum,
                                      bool enabled) {
    std::vector<std::uint8_t> bits(spheres.size(), 1);
    if (!enabled) return bits;
    for (std::size_t c = 0; c < spheres.size(); ++c)
        bits[c] = frustum.sphere_outside(spheres[c].center.cast<double>(), spheres[c].radius) ? 0 : 1;
    return bits;
}

std::vector<std::uint8_t> cull_triangles(std::span<const std::uint8_t> component_bits,
                                         std::span<const std::uint8_t> component_closed,
                                         std::span<const std::uint16_t> triangle_component,
                                         std::span<const TriangleFrame> frames, const Vec3f &camera_position,
                                         bool enabled, unsigned threads) {
    std::vector<std::uint8_t> bits(frames.size(), 0);
    const Vec3d cam = camera_position.cast<double>();
    parallel_for(threads, frames.size(), [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t t = b; t < e; ++t) {
            const auto c  = triangle_component[t];
            const auto &f = frames[t];
            if (!component_bits[c] || f.degenerate) continue;
            if (enabled && component_closed[c]) {
                const double facing = f.normal.cast<double>().dot(cam - f.centroid.cast<double>());
                if (facing <= -kBackfaceEpsilon) continue;
            }
            bits[t] = 1;
        }
    });
    return bits;
}

std::vector<std::uint32_t> cull_splats(const SplatCullInputs &in, const Frustum &frustum, bool frustum_enabled,
                                       std::vector<std::uint8_t> &splat_bits, TierCounts &counts,
                                       unsigned threads) {
    const auto &pos = *in.positions;
    const std::size_t n = pos.size();
    splat_bits.assign(n, 0);
    const unsigned blocks = std::min<unsigned>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    std::vector<std::vector<std::uint32_t>> lists(blocks);
    std::vector<TierCounts> partial(blocks);
    parallel_for(blocks, n, [&](std::size_t b, std::size_t e, unsigned block) {
        auto &out = lists[block];
        auto &cnt = partial[block];
        for (std::size_t i = b; i < e; ++i) {
            const auto t = pos.triangle[i];
            if (!in.component_bits[in.triangle_component[t]]) continue;
            ++cnt.mesh;
            const auto &f = in.frames[t];
            if (f.degenerate || (pos.label[i] && !in.triangle_bits[t])) continue;
            ++cnt.triangle;
            if (frustum_enabled) {
                const Vec3f mean = splat_mean(pos.u[i], pos.v[i], pos.w[i], f);
                if (frustum.sphere_outside(mean.cast<double>(), in.inflate_radius)) continue;
            }
            ++cnt.splat;
            splat_bits[i] = 1;
            out.push_back(static_cast<std::uint32_t>(i));
        }
    });
    counts = {};
    counts.total = n;
    std::vector<std::uint32_t> survivors;
    std::size_t total = 0;
    for (const auto &l : lists) total += l.size();
    survivors.reserve(total);
    for (unsigned b = 0; b < blocks; ++b) {
        survivors.insert(survivors.end(), lists[b].begin(), lists[b].end());
        counts.mesh += partial[b].mesh;
        counts.triangle += partial[b].triangle;
        counts.splat += partial[b].splat;
    }
    return survivors;
}

double component_splat_margin(const PositionView &positions, std::span<const std::uint16_t> triangle_component,
                              std::size_t component, double inflate_radius) {
    double max_w = 0.0;
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (triangle_component[positions.triangle[i]] == component)
            max_w = std::max(max_w, std::abs(double(positions.w[i])));
    return inflate_radius + max_w;
}

VisibilityBuffer cull(const CullInputs &in, const Camera &camera, const CullToggles &toggles,
                      std::vector<std::uint32_t> &survivors, unsigned threads) {
    const Frustum frustum = Frustum::from_camera(camera, in.guard_pixels);
    const auto &geo       = *in.geometry;
    std::vector<BoundingSphere> spheres = geo.component_spheres;
    for (std::size_t c = 0; c < spheres.size(); ++c)
        if (c < in.component_margin.size()) spheres[c].radius += float(in.component_margin[c]);

    VisibilityBuffer vb;
    vb.component = cull_meshes(spheres, frustum, toggles.mesh);
    vb.triangle  = cull_triangles(vb.component, in.component_closed, in.triangle_component, geo.triangle_frames,
                                  camera.position(), toggles.triangle, threads);
    SplatCullInputs si;
    si.positions          = in.positions;
    si.component_bits     = vb.component;
    si.triangle_bits      = vb.triangle;
    si.triangle_component = in.triangle_component;
    si.frames             = geo.triangle_frames;
    si.inflate_radius     = in.inflate_radius;
    survivors = cull_splats(si, frustum, toggles.splat, vb.splat, vb.counts, threads);
    return vb;
}

} // namespace hra
