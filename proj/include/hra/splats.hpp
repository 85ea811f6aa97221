// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include "hra/common.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hra {

/// Number of SH coefficients per color channel for a degree.
constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Triangle-bound splat attributes, structure-of-arrays.
///
/// Scales are stored in meters along the local triangle frame (tangent,
/// bitangent, normal). Surface splats carry a zero normal-axis scale and a
/// zero normal offset. SH coefficients are coefficient-major:
/// sh[i * stride + k * 3 + channel].
struct SplatAttributes {
    int sh_degree = 3;
    std::vector<std::uint32_t> triangle;
    std::vector<float> u;
    std::vector<float> v;
    std::vector<float> w;
    std::vector<Quatf> rotation;
    std::vector<Vec3f> scale;
    std::vector<float> opacity;
    std::vector<float> sh;
    std::vector<std::uint8_t> label;     ///< single-face-visible flag
    std::vector<std::uint8_t> surface2d; ///< constrained to the mesh surface

    std::size_t size() const { return triangle.size(); }
    std::size_t sh_stride() const { return 3 * static_cast<std::size_t>(sh_coeff_count(sh_degree)); }

    std::span<const float> sh_of(std::size_t i) const {
        return {sh.data() + i * sh_stride(), sh_stride()};
    }
    std::span<float> sh_of(std::size_t i) { return {sh.data() + i * sh_stride(), sh_stride()}; }

    void resize(std::size_t n);
    void reserve(std::size_t n);
    /// Appends splat i of `other` (same SH degree).
    void push_from(const SplatAttributes &other, std::size_t i);
    SplatAttributes gather(std::span<const std::uint32_t> indices) const;
};

/// Phase-one decode output: what culling needs and nothing more.
struct PositionView {
    std::vector<std::uint32_t> triangle;
    std::vector<float> u;
    std::vector<float> v;
    std::vector<float> w;
    std::vector<std::uint8_t> label;

    std::size_t size() const { return triangle.size(); }
};

PositionView position_slice(const SplatAttributes &splats);

} // namespace hra
