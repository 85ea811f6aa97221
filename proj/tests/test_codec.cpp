// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

namespace hra {
namespace {

const SplatAttributes &raw_small() { return std::get<SplatAttributes>(test::small_asset().splats); }

SplatAttributes single_splat(float u, float v, float w, bool surface) {
    SplatAttributes s;
    s.sh_degree = 3;
    s.resize(1);
    s.triangle[0]  = 0;
    s.u[0]         = u;
    s.v[0]         = v;
    s.w[0]         = surface ? 0.0f : w;
    s.rotation[0]  = Quatf::Identity();
    s.scale[0]     = Vec3f(0.01f, 0.02f, surface ? 0.0f : 0.005f);
    s.opacity[0]   = 0.5f;
    s.label[0]     = 1;
    s.surface2d[0] = surface ? 1 : 0;
    for (std::size_t k = 0; k < s.sh.size(); ++k) s.sh[k] = 0.01f * float(k);
    return s;
}

TEST(Codec, ErrorBoundsHoldOverSeeds) {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto asset = test::make_asset(6000, 900, seed);
        const auto &raw  = std::get<SplatAttributes>(asset.splats);
        for (auto profile : {CodecProfile::standard, CodecProfile::aggressive}) {
            const auto buf = compress_splats(raw, profile);
            EXPECT_EQ(test::check_codec_bounds(raw, buf), "") << "seed " << seed << " " << to_string(profile);
        }
    }
}

TEST(Codec, RatiosAreMonotoneAcrossProfiles) {
    const auto std_buf = compress_splats(raw_small(), CodecProfile::standard);
    const auto agg_buf = compress_splats(raw_small(), CodecProfile::aggressive);
    EXPECT_LE(agg_buf.ratio(), std_buf.ratio());
    EXPECT_LE(std_buf.ratio(), 0.30);
    EXPECT_LE(agg_buf.ratio(), 0.12);
}

TEST(Codec, RawBaselineIs236BytesPerSplatAtDegree3) {
    EXPECT_EQ(ChunkedSplatBuffer::raw_bytes(1, 3), 236u);
    EXPECT_EQ(ChunkedSplatBuffer::raw_bytes(10, 0), 10u * 56u);
}

TEST(Codec, CompressionIsAProjection) {
    for (auto profile : {CodecProfile::standard, CodecProfile::aggressive}) {
        const auto once  = compress_splats(raw_small(), profile);
        const auto twice = compress_splats(decompress_all(once), profile);
        EXPECT_EQ(once.payload, twice.payload) << to_string(profile);
        EXPECT_EQ(once.chunk_offsets, twice.chunk_offsets);
    }
}

TEST(Codec, PositionsEqualFullDecodeSlice) {
    const auto &buf = std::get<ChunkedSplatBuffer>(test::small_compressed_asset().splats);
    const auto pos  = decompress_positions(buf, 3);
    const auto full = decompress_all(buf, 2);
    ASSERT_EQ(pos.size(), full.size());
    EXPECT_EQ(pos.triangle, full.triangle);
    EXPECT_EQ(pos.u, full.u);
    EXPECT_EQ(pos.v, full.v);
    EXPECT_EQ(pos.w, full.w);
    EXPECT_EQ(pos.label, full.label);
}

TEST(Codec, BarycentricEndpointsAreExact) {
    for (auto [u, v] : {std::pair{0.0f, 0.0f}, std::pair{1.0f, 0.0f}, std::pair{0.0f, 1.0f}}) {
        const auto dec = decompress_all(compress_splats(single_splat(u, v, 0.0f, true)));
        EXPECT_EQ(dec.u[0], u);
        EXPECT_EQ(dec.v[0], v);
    }
}

TEST(Codec, ZeroExtentChunkDecodesToStoredMin) {
    auto s = single_splat(0.2f, 0.3f, 0.0031f, false);
    for (int k = 0; k < 9; ++k) s.push_from(s, 0);
    const auto buf = compress_splats(s);
    const auto r   = chunk_ranges(buf, 0);
    EXPECT_EQ(r.w_min, r.w_max);
    const auto pos = decompress_positions(buf);
    for (float w : pos.w) EXPECT_EQ(w, r.w_min);
    EXPECT_EQ(r.w_min, 0.0031f);
}

TEST(Codec, TriangleDeltasRoundTrip) {
    std::vector<std::uint8_t> stream;
    for (std::uint32_t d : {5u, 0u, 1u, 3u}) detail::put_varint(stream, d);
    EXPECT_EQ(stream, (std::vector<std::uint8_t>{5, 0, 1, 3}));

    auto s = single_splat(0.1f, 0.1f, 0.0f, true);
    for (int k = 0; k < 3; ++k) s.push_from(s, 0);
    s.triangle = {5, 5, 6, 9};
    const auto pos = decompress_positions(compress_splats(s));
    EXPECT_EQ(pos.triangle, (std::vector<std::uint32_t>{5, 5, 6, 9}));
}

TEST(Codec, VarintBoundaries) {
    for (std::uint32_t x : {0u, 127u, 128u, 16383u, 16384u, 0xffffffffu}) {
        std::vector<std::uint8_t> b;
        detail::put_varint(b, x);
        std::size_t pos = 0;
        EXPECT_EQ(detail::get_varint(b.data(), b.size(), pos), x);
        EXPECT_EQ(pos, b.size());
    }
    const std::vector<std::uint8_t> truncated{0x80, 0x80};
    std::size_t pos = 0;
    EXPECT_THROW(detail::get_varint(truncated.data(), truncated.size(), pos), FormatError);
}

TEST(Codec, RotationErrorBound) {
    EXPECT_LE(test::rotation_angle_deg(detail::decode_rotation(detail::encode_rotation(Quatf::Identity())),
                                       Quatf::Identity()),
              0.4);
    // Worst case over the grid: every non-largest component sits half a step off a code.
    std::mt19937_64 rng(99);
    std::normal_distribution<float> n;
    double worst = 0.0;
    for (int i = 0; i < 200000; ++i) {
        Quatf q(n(rng), n(rng), n(rng), n(rng));
        q.normalize();
        worst = std::max(worst, test::rotation_angle_deg(detail::decode_rotation(detail::encode_rotation(q)), q));
    }
    EXPECT_LE(worst, 0.4);
    // Sign of q does not matter.
    const Quatf q(-0.5f, 0.5f, -0.5f, 0.5f);
    EXPECT_LE(test::rotation_angle_deg(detail::decode_rotation(detail::encode_rotation(q)), q), 0.4);
}

TEST(Codec, SparseDecodeMatchesFullDecode) {
    const auto &buf  = std::get<ChunkedSplatBuffer>(test::small_compressed_asset().splats);
    const auto full  = decompress_all(buf);
    std::vector<std::uint32_t> idx;
    for (std::uint32_t i = 3; i < buf.count; i += 7) idx.push_back(i);
    const auto sparse = decompress_full(buf, idx, 4);
    ASSERT_EQ(sparse.size(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const auto i = idx[k];
        EXPECT_EQ(sparse.triangle[k], full.triangle[i]);
        EXPECT_EQ(sparse.rotation[k].coeffs(), full.rotation[i].coeffs());
        EXPECT_EQ(sparse.scale[k], full.scale[i]);
        EXPECT_EQ(sparse.opacity[k], full.opacity[i]);
        ASSERT_TRUE(std::equal(sparse.sh_of(k).begin(), sparse.sh_of(k).end(), full.sh_of(i).begin()));
    }
}

TEST(Codec, EmptyAndInvalidIndexSets) {
    const auto &buf = std::get<ChunkedSplatBuffer>(test::small_compressed_asset().splats);
    EXPECT_EQ(decompress_full(buf, {}).size(), 0u);
    const std::vector<std::uint32_t> out_of_range{buf.count};
    EXPECT_THROW(decompress_full(buf, out_of_range), std::out_of_range);
    const std::vector<std::uint32_t> unsorted{5, 3};
    EXPECT_THROW(decompress_full(buf, unsorted), std::invalid_argument);
}

TEST(Codec, UnsortedInputRecordsPermutation) {
    auto s = single_splat(0.1f, 0.2f, 0.0f, true);
    for (int k = 0; k < 5; ++k) s.push_from(s, 0);
    s.triangle = {9, 2, 7, 2, 0, 4};
    for (std::size_t i = 0; i < s.size(); ++i) s.opacity[i] = 0.1f * float(i + 1);
    const auto buf = compress_splats(s);
    EXPECT_EQ(buf.source_order, (std::vector<std::uint32_t>{4, 1, 3, 5, 2, 0}));
    EXPECT_EQ(test::check_codec_bounds(s, buf), "");
}

TEST(Codec, RejectsNonFinite) {
    auto s     = single_splat(0.1f, 0.2f, 0.0f, true);
    s.sh[4]    = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(compress_splats(s), ValidationError);
}

TEST(Codec, LowerShDegrees) {
    for (int degree = 0; degree <= 2; ++degree) {
        SyntheticSpec spec;
        spec.splat_count   = 3000;
        spec.vertex_budget = 800;
        spec.sh_degree     = degree;
        const auto asset   = generate_synthetic_asset(spec);
        const auto &raw    = std::get<SplatAttributes>(asset.splats);
        for (auto profile : {CodecProfile::standard, CodecProfile::aggressive})
            EXPECT_EQ(test::check_codec_bounds(raw, compress_splats(raw, profile)), "") << degree;
    }
}

TEST(Codec, MaxScaleFromHeadersCoversDecodedScales) {
    const auto &buf = std::get<ChunkedSplatBuffer>(test::small_compressed_asset().splats);
    const float from_headers = max_scale(buf);
    EXPECT_NEAR(from_headers, max_scale(decompress_all(buf)), 1e-6f);
    EXPECT_NEAR(from_headers, max_scale(raw_small()), 1e-4f * from_headers);
}

TEST(Codec, CheckBufferRejectsBrokenDirectory) {
    auto buf = std::get<ChunkedSplatBuffer>(test::small_compressed_asset().splats);
    EXPECT_NO_THROW(check_buffer(buf));
    auto broken = buf;
    broken.chunk_offsets.pop_back();
    EXPECT_THROW(check_buffer(broken), FormatError);
    broken = buf;
    std::swap(broken.chunk_offsets[1], broken.chunk_offsets[2]);
    EXPECT_THROW(check_buffer(broken), FormatError);
}

} // namespace
} // namespace hra
