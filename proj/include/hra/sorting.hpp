// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hra {

/// round((z - z_min) / (z_max - z_min) * 65535), clamped. All zero when z_min >= z_max.
std::vector<std::uint16_t> quantize_depths(std::span<const float> depths, float z_min, float z_max);

/// Stable two-pass LSD radix sort (8-bit digits) of `indices` by `keys`, ascending.
/// Per-worker histograms are merged in worker order; output does not depend on `threads`.
std::vector<std::uint32_t> sort_survivors(std::span<const std::uint16_t> keys,
                                          std::span<const std::uint32_t> indices, unsigned threads = 1);

/// Reference order: stable comparison sort on float depth.
std::vector<std::uint32_t> sort_by_depth(std::span<const float> depths, std::span<const std::uint32_t> indices);

} // namespace hra
