// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Seeded sampling with platform-independent output. std::mt19937_64 is fully
// specified; the standard distributions are not, so conversions live here.
//
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace hra::detail {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : mEngine(seed) {}

    /// [0, 1) with 53 random bits.
    double uniform() { return double(mEngine() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Box-Muller, one value per call.
    double normal() {
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    std::uint64_t next() { return mEngine(); }

private:
    std::mt19937_64 mEngine;
};

} // namespace hra::detail
