// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/binding.hpp"

#include <algorithm>

namespace hra {

Mat3f splat_basis(const Quatf &rotation, const Vec3f &scale, bool surface2d, const TriangleFrame &frame) {
    if (!surface2d) return frame.local_to_world * rotation.toRotationMatrix() * scale.asDiagonal();
    // Surface splats may only turn about the normal: keep the twist part of the
    // rotation so codec error cannot tilt the disc off the surface.
    Quatf twist(rotation.w(), 0.0f, 0.0f, rotation.z());
    const float n = twist.norm();
    twist = n > 1e-6f ? Quatf(twist.coeffs() / n) : Quatf::Identity();
    return frame.local_to_world * twist.toRotationMatrix() * Vec3f(scale.x(), scale.y(), 0.0f).asDiagonal();
}

MeanAndBasis splat_to_world(const SplatAttributes &splats, std::size_t i, const TriangleFrame &frame) {
    const bool flat = splats.surface2d[i] != 0;
    return {splat_mean(splats.u[i], splats.v[i], flat ? 0.0f : splats.w[i], frame),
            splat_basis(splats.rotation[i], splats.scale[i], flat, frame)};
}

Vec3f eval_sh(int degree, std::span<const float> sh, const Vec3f &dir) {
    auto coeff = [&](int k) { return Vec3f(sh[3 * k], sh[3 * k + 1], sh[3 * k + 2]); };
    Vec3f c = kShC0 * coeff(0);
    if (degree < 1) return c;
    const float x = dir.x(), y = dir.y(), z = dir.z();
    constexpr float C1 = 0.4886025119029199f;
    c += C1 * (-y * coeff(1) + z * coeff(2) - x * coeff(3));
    if (degree < 2) return c;
    const float xx = x * x, yy = y * y, zz = z * z, xy = x * y, yz = y * z, xz = x * z;
    c += 1.0925484305920792f * xy * coeff(4) - 1.0925484305920792f * yz * coeff(5) +
         0.31539156525252005f * (2.0f * zz - xx - yy) * coeff(6) - 1.0925484305920792f * xz * coeff(7) +
         0.5462742152960396f * (xx - yy) * coeff(8);
    if (degree < 3) return c;
    c += -0.5900435899266435f * y * (3.0f * xx - yy) * coeff(9) + 2.890611442640554f * xy * z * coeff(10) -
         0.4570457994644658f * y * (4.0f * zz - xx - yy) * coeff(11) +
         0.3731763325901154f * z * (2.0f * zz - 3.0f * xx - 3.0f * yy) * coeff(12) -
         0.4570457994644658f * x * (4.0f * zz - xx - yy) * coeff(13) +
         1.445305721320277f * z * (xx - yy) * coeff(14) - 0.5900435899266435f * x * (xx - 3.0f * yy) * coeff(15);
    return c;
}

Vec3f eval_color(int degree, std::span<const float> sh, const Vec3f &dir, float intensity) {
    const Vec3f c = eval_sh(degree, sh, dir).array() + 0.5f;
    return c.cwiseMax(0.0f) * intensity;
}

} // namespace hra
