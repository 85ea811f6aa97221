// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace hra {

void Camera::check() const {
    if (!(fx > 0.0f) || !(fy > 0.0f)) throw std::invalid_argument("camera: fx and fy must be positive");
    if (width == 0 || height == 0) throw std::invalid_argument("camera: image size must be positive");
    if (!(near > 0.0f) || !(far > near)) throw std::invalid_argument("camera: need 0 < near < far");
    if (!std::isfinite(cx) || !std::isfinite(cy) || !translation.allFinite())
        throw std::invalid_argument("camera: non-finite parameters");
    const Mat3f should_be_identity = rotation * rotation.transpose();
    if (!should_be_identity.isApprox(Mat3f::Identity(), 1e-4f) || rotation.determinant() < 0.0f)
        throw std::invalid_argument("camera: world_to_view is not a rigid transform");
}

Camera Camera::look_at(const Vec3f &eye, const Vec3f &target, const Vec3f &up, float fx, float fy,
                       std::uint32_t width, std::uint32_t height, float near, float far) {
    const Vec3f z = (target - eye).normalized();
    const Vec3f x = z.cross(up).normalized();
    const Vec3f y = z.cross(x);
    Camera c;
    c.fx = fx;
    c.fy = fy;
    c.cx = 0.5f * float(width) - 0.5f;
    c.cy = 0.5f * float(height) - 0.5f;
    c.width  = width;
    c.height = height;
    c.rotation.row(0) = x.transpose();
    c.rotation.row(1) = y.transpose();
    c.rotation.row(2) = z.transpose();
    c.translation     = -(c.rotation * eye);
    c.near            = near;
    c.far             = far;
    return c;
}

StereoCamera StereoCamera::from_center(const Camera &center, float baseline) {
    StereoCamera s{center, center};
    // view-space x is the right axis, so shifting the eye by +d along it subtracts d from x
    s.left.translation.x() += 0.5f * baseline;
    s.right.translation.x() -= 0.5f * baseline;
    return s;
}

bool StereoCamera::parallel(float tolerance) const {
    const bool same_intrinsics = left.fx == right.fx && left.fy == right.fy && left.cx == right.cx &&
                                 left.cy == right.cy && left.width == right.width && left.height == right.height;
    return same_intrinsics && (left.forward() - right.forward()).cwiseAbs().maxCoeff() <= tolerance;
}

Camera avatar_camera(std::uint32_t width, std::uint32_t height, Framing framing) {
    // Vertical span in meters at the target distance.
    const bool full   = framing == Framing::full_body;
    const float dist  = full ? 3.2f : 2.4f;
    const float cy    = full ? 0.93f : 1.36f;
    const float span  = full ? 2.05f : 1.0f;
    const float f     = float(height) * dist / span;
    return Camera::look_at({0.0f, cy, dist}, {0.0f, cy, 0.0f}, Vec3f::UnitY(), f, f, width, height);
}

} // namespace hra
