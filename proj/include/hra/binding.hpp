// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Triangle-local splats to world space, SH shading and intensity modulation.
//
#pragma once

#include "hra/rig.hpp"
#include "hra/splats.hpp"

#include <span>

namespace hra {

struct WorldSplat {
    Vec3f mean;
    Mat3f basis; ///< covariance = basis * basis^T
    Vec3f color;
    float opacity;
};

/// u p0 + v p1 + (1 - u - v) p2 + w n.
inline Vec3f splat_mean(float u, float v, float w, const TriangleFrame &frame) {
    return frame.origin + u * frame.e1 + v * frame.e2 + w * frame.normal;
}

/// A * F_rest * R(r) * diag(s). Surface splats get a zero normal-axis scale and
/// only the twist of r about the local normal.
Mat3f splat_basis(const Quatf &rotation, const Vec3f &scale, bool surface2d, const TriangleFrame &frame);

struct MeanAndBasis {
    Vec3f mean;
    Mat3f basis;
};

/// Splat i of `splats` against its parent frame; offsets of surface splats are forced to zero.
MeanAndBasis splat_to_world(const SplatAttributes &splats, std::size_t i, const TriangleFrame &frame);

inline constexpr float kShC0 = 0.28209479177387814f;

/// Raw SH evaluation per channel (no DC offset), `dir` unit length.
Vec3f eval_sh(int degree, std::span<const float> sh, const Vec3f &dir);

/// max(SH(d) + 0.5, 0) * intensity.
Vec3f eval_color(int degree, std::span<const float> sh, const Vec3f &dir, float intensity);

inline float interpolate_intensity(float u, float v, float l0, float l1, float l2) {
    return u * l0 + v * l1 + (1.0f - u - v) * l2;
}

} // namespace hra
