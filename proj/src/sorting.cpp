// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/sorting.hpp"
#include "hra/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hra {

std::vector<std::uint16_t> quantize_depths(std::span<const float> depths, float z_min, float z_max) {
    std::vector<std::uint16_t> keys(depths.size(), 0);
    if (!(z_min < z_max)) return keys;
    const double lo = z_min, inv = 1.0 / (double(z_max) - double(z_min));
    for (std::size_t i = 0; i < depths.size(); ++i) {
        const double t = std::clamp((double(depths[i]) - lo) * inv, 0.0, 1.0);
        keys[i]        = static_cast<std::uint16_t>(std::lround(t * 65535.0));
    }
    return keys;
}

std::vector<std::uint32_t> sort_survivors(std::span<const std::uint16_t> keys,
                                          std::span<const std::uint32_t> indices, unsigned threads) {
    if (keys.size() != indices.size()) throw std::invalid_argument("sort_survivors: keys and indices differ in length");
    const std::size_t n = keys.size();
    std::vector<std::uint16_t> k0(keys.begin(), keys.end()), k1(n);
    std::vector<std::uint32_t> v0(indices.begin(), indices.end()), v1(n);
    const unsigned blocks = std::min<unsigned>(resolve_threads(threads), std::max<std::size_t>(n, 1));
    std::vector<std::array<std::size_t, 256>> hist(blocks);

    for (int shift = 0; shift < 16; shift += 8) {
        for (auto &h : hist) h.fill(0);
        parallel_for(blocks, n, [&](std::size_t b, std::size_t e, unsigned block) {
            auto &h = hist[block];
            for (std::size_t i = b; i < e; ++i) ++h[(k0[i] >> shift) & 0xff];
        });
        // Exclusive offsets: digit-major, then block order, which keeps the pass stable.
        std::size_t running = 0;
        for (int d = 0; d < 256; ++d)
            for (unsigned b = 0; b < blocks; ++b) {
                const std::size_t c = hist[b][d];
                hist[b][d]          = running;
                running += c;
            }
        parallel_for(blocks, n, [&](std::size_t b, std::size_t e, unsigned block) {
            auto &h = hist[block];
            for (std::size_t i = b; i < e; ++i) {
                const std::size_t at = h[(k0[i] >> shift) & 0xff]++;
                k1[at]               = k0[i];
                v1[at]               = v0[i];
            }
        });
        k0.swap(k1);
        v0.swap(v1);
    }
    return v0;
}

std::vector<std::uint32_t> sort_by_depth(std::span<const float> depths, std::span<const std::uint32_t> indices) {
    if (depths.size() != indices.size()) throw std::invalid_argument("sort_by_depth: length mismatch");
    std::vector<std::uint32_t> order(depths.size());
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return depths[a] < depths[b]; });
    std::vector<std::uint32_t> out(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) out[i] = indices[order[i]];
    return out;
}

} // namespace hra
