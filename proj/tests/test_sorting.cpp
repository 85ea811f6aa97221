// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/sorting.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

namespace hra {
namespace {

std::vector<std::uint32_t> iota(std::size_t n) {
    std::vector<std::uint32_t> v(n);
    std::iota(v.begin(), v.end(), 0u);
    return v;
}

/// Comparison-sort oracle on (key, original position).
std::vector<std::uint32_t> oracle(const std::vector<std::uint16_t> &keys, const std::vector<std::uint32_t> &idx) {
    std::vector<std::uint32_t> pos = iota(keys.size());
    std::sort(pos.begin(), pos.end(), [&](std::uint32_t a, std::uint32_t b) {
        return keys[a] != keys[b] ? keys[a] < keys[b] : a < b;
    });
    std::vector<std::uint32_t> out;
    for (auto p : pos) out.push_back(idx[p]);
    return out;
}

TEST(Quantize, EndpointsAndMidpoint) {
    const std::vector<float> z = {2.0f, 4.0f, 3.0f, 1.0f, 9.0f};
    const auto k = quantize_depths(z, 2.0f, 4.0f);
    EXPECT_EQ(k[0], 0);
    EXPECT_EQ(k[1], 65535);
    EXPECT_EQ(k[2], 32768);
    EXPECT_EQ(k[3], 0);     // clamped
    EXPECT_EQ(k[4], 65535); // clamped
    for (auto key : quantize_depths(z, 3.0f, 3.0f)) EXPECT_EQ(key, 0);
}

TEST(Quantize, OrderAgreesWithFloatOrderOutsideTies) {
    std::mt19937 rng(12);
    std::uniform_real_distribution<float> d(0.5f, 6.0f);
    std::vector<float> z(100000);
    for (auto &x : z) x = d(rng);
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    const auto keys     = quantize_depths(z, *mn, *mx);
    auto order          = iota(z.size());
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return z[a] < z[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) ASSERT_LE(keys[order[i - 1]], keys[order[i]]);
}

TEST(RadixSort, SortedAndEqualKeysAreIdentity) {
    std::vector<std::uint16_t> sorted_keys(1000);
    for (std::size_t i = 0; i < sorted_keys.size(); ++i) sorted_keys[i] = std::uint16_t(i * 37);
    const auto idx = iota(1000);
    EXPECT_EQ(sort_survivors(sorted_keys, idx), idx);
    const std::vector<std::uint16_t> equal(1000, 4242);
    EXPECT_EQ(sort_survivors(equal, idx, 4), idx);
    EXPECT_TRUE(sort_survivors({}, {}).empty());
}

TEST(RadixSort, MatchesComparisonOracleAtFullScale) {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> d(0, 65535);
        std::vector<std::uint16_t> keys(533695);
        for (auto &k : keys) k = std::uint16_t(d(rng));
        std::vector<std::uint32_t> idx = iota(keys.size());
        for (auto &i : idx) i = i * 3 + 1; // arbitrary payload
        EXPECT_EQ(sort_survivors(keys, idx), oracle(keys, idx));
    }
}

TEST(RadixSort, ThreadCountInvariantAndStable) {
    std::mt19937_64 rng(44);
    std::uniform_int_distribution<int> d(0, 300); // many ties
    std::vector<std::uint16_t> keys(50001);
    for (auto &k : keys) k = std::uint16_t(d(rng) * 200);
    const auto idx = iota(keys.size());
    const auto one = sort_survivors(keys, idx, 1);
    EXPECT_EQ(one, oracle(keys, idx));
    for (unsigned t : {2u, 3u, 8u}) EXPECT_EQ(sort_survivors(keys, idx, t), one) << t;
    // permutation validity
    auto check = one;
    std::sort(check.begin(), check.end());
    EXPECT_EQ(check, idx);
}

TEST(RadixSort, LengthMismatch) {
    const std::vector<std::uint16_t> k(3);
    const std::vector<std::uint32_t> i(2);
    EXPECT_THROW(sort_survivors(k, i), std::invalid_argument);
    const std::vector<float> z(3);
    EXPECT_THROW(sort_by_depth(z, i), std::invalid_argument);
}

TEST(FloatSort, StableOnEqualDepths) {
    const std::vector<float> z = {3.0f, 1.0f, 3.0f, 2.0f, 1.0f};
    const std::vector<std::uint32_t> idx = {10, 11, 12, 13, 14};
    EXPECT_EQ(sort_by_depth(z, idx), (std::vector<std::uint32_t>{11, 14, 13, 10, 12}));
}

} // namespace
} // namespace hra
