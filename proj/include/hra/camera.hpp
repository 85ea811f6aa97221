// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "hra/common.hpp"

#include <cstdint>

namespace hra {

/// Pinhole camera, OpenCV convention: view x right, y down, z forward.
/// Pixel (i, j) samples image coordinate (i, j).
struct Camera {
    float fx = 1000.0f, fy = 1000.0f;
    float cx = 0.0f, cy = 0.0f;
    std::uint32_t width = 0, height = 0;
    Mat3f rotation    = Mat3f::Identity(); ///< world -> view
    Vec3f translation = Vec3f::Zero();
    float near = 0.05f;
    float far  = 100.0f;

    Vec3f to_view(const Vec3f &world) const { return rotation * world + translation; }
    Vec3f position() const { return -(rotation.transpose() * translation); }
    Vec3f forward() const { return rotation.row(2).transpose(); }
    Vec3f right() const { return rotation.row(0).transpose(); }

    /// Throws std::invalid_argument when intrinsics or the rigid transform are invalid.
    void check() const;

    /// Camera at `eye` looking at `target` with world up `up`.
    static Camera look_at(const Vec3f &eye, const Vec3f &target, const Vec3f &up, float fx, float fy,
                          std::uint32_t width, std::uint32_t height, float near = 0.05f, float far = 100.0f);
};

struct StereoCamera {
    Camera left;
    Camera right;

    /// Both eyes from a center camera, offset by +/- baseline/2 along its right axis.
    static StereoCamera from_center(const Camera &center, float baseline = 0.064f);
    /// Forward axes parallel within `tolerance` (the shared-sort precondition).
    bool parallel(float tolerance = 1e-6f) const;
};

enum class Framing : std::uint8_t {
    full_body  = 0, ///< whole standing avatar in view
    upper_body = 1, ///< roughly the lower half of the avatar below the image
};

/// Front view of the generated humanoid (which faces +z), sized for `width` x `height`.
Camera avatar_camera(std::uint32_t width, std::uint32_t height, Framing framing = Framing::full_body);

} // namespace hra
