// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/splats.hpp"

namespace hra {

void SplatAttributes::resize(std::size_t n) {
    triangle.resize(n);
    u.resize(n);
    v.resize(n);
    w.resize(n);
    rotation.resize(n, Quatf::Identity());
    scale.resize(n, Vec3f::Zero());
    opacity.resize(n);
    sh.resize(n * sh_stride());
    label.resize(n);
    surface2d.resize(n);
}

void SplatAttributes::reserve(std::size_t n) {
    triangle.reserve(n);
    u.reserve(n);
    v.reserve(n);
    w.reserve(n);
    rotation.reserve(n);
    scale.reserve(n);
    opacity.reserve(n);
    sh.reserve(n * sh_stride());
    label.reserve(n);
    surface2d.reserve(n);
}

void SplatAttributes::push_from(const SplatAttributes &other, std::size_t i) {
    triangle.push_back(other.triangle[i]);
    u.push_back(other.u[i]);
    v.push_back(other.v[i]);
    w.push_back(other.w[i]);
    rotation.push_back(other.rotation[i]);
    scale.push_back(other.scale[i]);
    opacity.push_back(other.opacity[i]);
    const auto src = other.sh_of(i);
    sh.insert(sh.end(), src.begin(), src.end());
    label.push_back(other.label[i]);
    surface2d.push_back(other.surface2d[i]);
}

SplatAttributes SplatAttributes::gather(std::span<const std::uint32_t> indices) const {
    SplatAttributes out;
    out.sh_degree = sh_degree;
    out.reserve(indices.size());
    for (auto i : indices) out.push_from(*this, i);
    return out;
}

PositionView position_slice(const SplatAttributes &splats) {
    PositionView p;
    p.triangle = splats.triangle;
    p.u        = splats.u;
    p.v        = splats.v;
    p.w        = splats.w;
    p.label    = splats.label;
    return p;
}

} // namespace hra
