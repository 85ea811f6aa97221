// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "support.hpp"

#include "hra/io.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace hra {
namespace {

using test::small_asset;

TEST(Generator, ExactSplatCountAtFullScale) {
    SyntheticSpec spec;
    spec.seed        = 7;
    spec.splat_count = 533695;
    const auto asset = generate_synthetic_asset(spec);
    EXPECT_EQ(asset.splat_count(), 533695u);
    EXPECT_TRUE(validate_asset(asset).ok());
}

TEST(Generator, SameSpecSameBytes) {
    const auto a = test::make_asset(5000, 800, 3);
    const auto b = test::make_asset(5000, 800, 3);
    EXPECT_EQ(save_asset_bytes(a), save_asset_bytes(b));
    const auto c = test::make_asset(5000, 800, 4);
    EXPECT_NE(save_asset_bytes(a), save_asset_bytes(c));
}

TEST(Generator, GarmentAddsComponentAndLabelsFollowClosedFlags) {
    const auto &asset = small_asset();
    ASSERT_GE(asset.components.size(), 2u);
    EXPECT_EQ(asset.components[0].kind, ComponentKind::body);
    EXPECT_TRUE(asset.components[0].closed);

    const MeshLayout layout(asset);
    const auto &s = std::get<SplatAttributes>(asset.splats);
    std::size_t garment_splats = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto c = layout.triangle_component[s.triangle[i]];
        EXPECT_EQ(s.label[i] == 1, asset.components[c].closed) << "splat " << i;
        if (asset.components[c].kind == ComponentKind::garment) {
            ++garment_splats;
            EXPECT_EQ(s.label[i], 0);
        }
        EXPECT_EQ(s.surface2d[i] == 1, asset.components[c].kind != ComponentKind::hair);
    }
    EXPECT_GT(garment_splats, 0u);
}

TEST(Generator, NoGarment) {
    const auto asset = test::make_asset(3000, 800, 5, false);
    for (const auto &c : asset.components) EXPECT_NE(c.kind, ComponentKind::garment);
    EXPECT_TRUE(validate_asset(asset).ok());
}

TEST(Generator, BoundingSpheresAreTight) {
    for (const auto &c : small_asset().components) {
        double far = 0.0;
        for (const auto &v : c.vertices_template)
            far = std::max(far, double((v - c.bounding_sphere_rest.center).norm()));
        EXPECT_LE(far, c.bounding_sphere_rest.radius * (1.0 + 1e-6));
        EXPECT_LE(c.bounding_sphere_rest.radius, far * 1.01);
    }
}

TEST(Generator, BarycentricsAreValid) {
    const auto &s = std::get<SplatAttributes>(small_asset().splats);
    for (std::size_t i = 0; i < s.size(); ++i) {
        ASSERT_GE(s.u[i], -1e-7f);
        ASSERT_GE(s.v[i], -1e-7f);
        ASSERT_GE(1.0f - s.u[i] - s.v[i], -1e-7f);
    }
}

TEST(Generator, RejectsTinyVertexBudget) {
    SyntheticSpec spec;
    spec.splat_count   = 100;
    spec.vertex_budget = 20;
    EXPECT_THROW(generate_synthetic_asset(spec), DimensionError);
}

TEST(Generator, RejectsZeroSplats) {
    SyntheticSpec spec;
    spec.splat_count = 0;
    EXPECT_THROW(generate_synthetic_asset(spec), DimensionError);
}

TEST(Generator, ExtraJointsAndShDegree) {
    SyntheticSpec spec;
    spec.splat_count   = 2000;
    spec.vertex_budget = 800;
    spec.joint_count   = 20;
    spec.sh_degree     = 1;
    const auto asset   = generate_synthetic_asset(spec);
    EXPECT_EQ(asset.skeleton.size(), 20u);
    EXPECT_EQ(asset.sh_degree(), 1);
    EXPECT_EQ(asset.deform_net.input_dim(), 6u * 20u + 3u);
    EXPECT_TRUE(validate_asset(asset).ok()) << validate_asset(asset).summary();
}

TEST(Validate, GeneratedAssetIsClean) {
    const auto report = validate_asset(small_asset());
    EXPECT_TRUE(report.ok()) << report.summary();
    EXPECT_TRUE(validate_asset(test::small_compressed_asset()).ok());
}

TEST(Validate, HairOffsetsAreExempt) {
    auto asset = small_asset();
    auto &s    = std::get<SplatAttributes>(asset.splats);
    const MeshLayout layout(asset);
    std::size_t hair = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (asset.components[layout.triangle_component[s.triangle[i]]].kind == ComponentKind::hair) {
            s.w[i] = 0.004f;
            ++hair;
        }
    ASSERT_GT(hair, 0u);
    EXPECT_TRUE(validate_asset(asset).ok());
}

TEST(Validate, BodySplatOffsetIsOneViolation) {
    auto asset = small_asset();
    auto &s    = std::get<SplatAttributes>(asset.splats);
    std::size_t target = 0;
    while (!s.surface2d[target]) ++target;
    s.w[target]       = 0.01f;
    const auto report = validate_asset(asset);
    ASSERT_EQ(report.violations.size(), 1u) << report.summary();
    EXPECT_EQ(report.violations[0].rule, "2d-constraint");
    EXPECT_EQ(report.violations[0].index, target);
}

TEST(Validate, ReportsEveryBrokenRecord) {
    auto asset = small_asset();
    auto &s    = std::get<SplatAttributes>(asset.splats);
    s.u[10]       = 0.7f;
    s.v[10]       = 0.5f;
    s.opacity[20] = 1.5f;
    s.rotation[30] = Quatf(1.0f, 0.1f, 0.0f, 0.0f);
    const auto report = validate_asset(asset);
    ASSERT_EQ(report.violations.size(), 3u) << report.summary();
    EXPECT_EQ(report.violations[0].rule, "barycentric");
    EXPECT_EQ(report.violations[0].index, 10u);
    EXPECT_EQ(report.violations[1].rule, "opacity");
    EXPECT_EQ(report.violations[2].rule, "rotation-norm");
}

TEST(Validate, SkeletonAndMeshRules) {
    {
        auto asset = small_asset();
        asset.skeleton.joints[3].parent = 5;
        EXPECT_FALSE(validate_asset(asset).ok());
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "skeleton-order");
    }
    {
        auto asset = small_asset();
        asset.skeleton.joints[2].parent = -1;
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "skeleton-root");
    }
    {
        auto asset = small_asset();
        asset.components[0].skin_weights[7][0].weight += 0.01f;
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "skin-weights");
    }
    {
        auto asset = small_asset();
        asset.components[1].triangles[4][1] = 1u << 30;
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "triangle-index");
    }
    {
        auto asset = small_asset();
        asset.components[0].bounding_sphere_rest.radius *= 0.5f;
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "bounding-sphere");
    }
    {
        auto asset = small_asset();
        asset.static_offsets.pop_back();
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "static-offsets");
    }
    {
        auto asset = small_asset();
        auto &s    = std::get<SplatAttributes>(asset.splats);
        s.triangle[5] = 1u << 30;
        EXPECT_EQ(validate_asset(asset).violations[0].rule, "triangle-range");
    }
}

TEST(Layout, GlobalTriangleIdsConcatenateComponents) {
    const auto &asset = small_asset();
    const MeshLayout layout(asset);
    std::size_t t = 0, v = 0;
    for (std::size_t c = 0; c < asset.components.size(); ++c) {
        const auto &comp = asset.components[c];
        EXPECT_EQ(layout.vertex_offset[c], v);
        EXPECT_EQ(layout.triangle_offset[c], t);
        for (const auto &tri : comp.triangles) {
            for (int k = 0; k < 3; ++k) EXPECT_EQ(layout.triangles[t][k], tri[k] + v);
            EXPECT_EQ(layout.triangle_component[t], c);
            ++t;
        }
        v += comp.vertices_template.size();
    }
    EXPECT_EQ(layout.triangle_count(), t);
    EXPECT_EQ(layout.vertex_count(), v);
}

} // namespace
} // namespace hra
