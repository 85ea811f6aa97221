// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Deterministic tile-based splat compositor.
//
#pragma once

#include "hra/camera.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hra {

struct Image {
    std::uint32_t width  = 0;
    std::uint32_t height = 0;
    std::vector<std::uint8_t> rgba;

    Image() = default;
    Image(std::uint32_t w, std::uint32_t h) : width(w), height(h), rgba(std::size_t(w) * h * 4, 0) {}

    const std::uint8_t *pixel(std::uint32_t x, std::uint32_t y) const {
        return rgba.data() + (std::size_t(y) * width + x) * 4;
    }
    bool operator==(const Image &) const = default;
};

inline constexpr float kLowPassDilation = 0.3f;
inline constexpr float kMaxAlpha        = 0.99f;
inline constexpr float kMinAlpha        = 1.0f / 255.0f;
inline constexpr float kMinTransmittance = 1.0f / 255.0f;

struct ProjectedSplat {
    Vec2f mean;
    float conic_a, conic_b, conic_c; ///< inverse 2D covariance (a b; b c)
    float radius;                    ///< pixels, cutoff * sigma_max
    float depth;                     ///< view-space z
    Vec3f color;
    float opacity;
};

/// 2D covariance = J W Sigma W^T J^T + 0.3 I. Empty when the mean is in front of the near plane.
std::optional<ProjectedSplat> project_splat(const Vec3f &mean, const Mat3f &basis, const Camera &camera,
                                            float radius_cutoff = 3.0f);

/// The 2D covariance before inversion, for tests.
Eigen::Matrix2f projected_covariance(const Vec3f &mean, const Mat3f &basis, const Camera &camera);

struct CompositeOptions {
    std::uint32_t tile_size = 16;
    unsigned threads        = 1;
};

/// Front-to-back alpha compositing of splats already in global depth order.
Image composite(std::span<const ProjectedSplat> sorted, std::uint32_t width, std::uint32_t height,
                const CompositeOptions &options = {});

/// Float accumulation to 8 bits, rounding half away from zero.
inline std::uint8_t to_unorm8(float x) {
    const float c = x < 0.0f ? 0.0f : (x > 1.0f ? 1.0f : x);
    return static_cast<std::uint8_t>(c * 255.0f + 0.5f);
}

/// Binary P6; alpha is dropped and reads back as 255.
std::vector<std::uint8_t> encode_ppm(const Image &image);
void write_ppm(const Image &image, const std::filesystem::path &path);
Image read_ppm(const std::filesystem::path &path);
void write_png(const Image &image, const std::filesystem::path &path);
Image read_png(const std::filesystem::path &path);

/// PSNR over RGB channels in dB; +inf for identical images.
double psnr(const Image &a, const Image &b);

struct PixelDiff {
    int max_abs                = 0;
    double fraction_within     = 1.0; ///< fraction of pixels whose max channel diff <= threshold
};
PixelDiff pixel_diff(const Image &a, const Image &b, int threshold);

} // namespace hra
