// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "support.hpp"

#include "hra/io.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace hra {
namespace {

using nlohmann::json;

TEST(Container, RawRoundTripIsByteExact) {
    const auto &asset = test::small_asset();
    const auto bytes  = save_asset_bytes(asset);
    const auto back   = load_asset_bytes(bytes);
    EXPECT_EQ(save_asset_bytes(back), bytes);
    EXPECT_EQ(back.splat_count(), asset.splat_count());
    EXPECT_EQ(back.seed, asset.seed);
    EXPECT_EQ(std::get<SplatAttributes>(back.splats).u, std::get<SplatAttributes>(asset.splats).u);
}

TEST(Container, CompressedRoundTripIsByteExact) {
    const auto &asset = test::small_compressed_asset();
    const auto bytes  = save_asset_bytes(asset);
    const auto back   = load_asset_bytes(bytes);
    EXPECT_EQ(save_asset_bytes(back), bytes);
    EXPECT_EQ(std::get<ChunkedSplatBuffer>(back.splats).payload, std::get<ChunkedSplatBuffer>(asset.splats).payload);
}

TEST(Container, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "hra_io_test.hra";
    save_asset(test::small_asset(), path);
    EXPECT_EQ(save_asset_bytes(load_asset(path)), save_asset_bytes(test::small_asset()));
    std::filesystem::remove(path);
    EXPECT_THROW(load_asset(path), IoError);
}

TEST(Container, InvalidBarycentricNamesTheSplat) {
    auto asset = test::small_asset();
    auto &raw  = std::get<SplatAttributes>(asset.splats);
    raw.u[5]   = 0.7f;
    raw.v[5]   = 0.5f;
    try {
        load_asset_bytes(save_asset_bytes(asset));
        FAIL() << "expected ValidationError";
    } catch (const ValidationError &e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("barycentric"), std::string::npos) << msg;
        EXPECT_NE(msg.find("splat 5"), std::string::npos) << msg;
    }
}

TEST(Container, MalformedBytes) {
    const auto bytes = save_asset_bytes(test::small_asset());
    for (std::size_t keep : {std::size_t(3), std::size_t(10), bytes.size() / 2, bytes.size() - 1}) {
        std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + std::ptrdiff_t(keep));
        EXPECT_THROW(load_asset_bytes(cut), FormatError) << keep;
    }
    auto bad_magic = bytes;
    bad_magic[0]   = 'X';
    EXPECT_THROW(load_asset_bytes(bad_magic), FormatError);
    auto bad_version = bytes;
    bad_version[4]   = 9;
    EXPECT_THROW(load_asset_bytes(bad_version), FormatError);
    auto trailing = bytes;
    trailing.push_back(0);
    EXPECT_THROW(load_asset_bytes(trailing), FormatError);
}

TEST(Json, CameraRoundTrip) {
    const auto cam  = avatar_camera(640, 360, Framing::upper_body);
    const auto back = camera_from_json(json::parse(to_json(cam).dump()));
    EXPECT_EQ(back.width, cam.width);
    EXPECT_FLOAT_EQ(back.fx, cam.fx);
    EXPECT_FLOAT_EQ(back.cy, cam.cy);
    EXPECT_TRUE(back.rotation.isApprox(cam.rotation));
    EXPECT_TRUE(back.translation.isApprox(cam.translation));
}

TEST(Json, CameraErrors) {
    auto j = to_json(avatar_camera(64, 64));
    j["world_to_view"].erase(0);
    EXPECT_THROW(camera_from_json(j), std::invalid_argument);
    auto k = to_json(avatar_camera(64, 64));
    k["fx"] = -1.0;
    EXPECT_THROW(camera_from_json(k), std::invalid_argument);
    EXPECT_THROW(camera_from_json(json::object()), json::exception);
}

TEST(Json, StereoForms) {
    const auto center = avatar_camera(320, 240);
    const auto s      = stereo_from_json({{"center", to_json(center)}, {"baseline", 0.064}});
    EXPECT_NEAR((s.left.position() - s.right.position()).norm(), 0.064f, 1e-6f);
    EXPECT_TRUE(s.parallel());
    const auto again = stereo_from_json(json::parse(to_json(s).dump()));
    EXPECT_TRUE(again.right.translation.isApprox(s.right.translation));
    EXPECT_THROW(stereo_from_json(json::object()), std::invalid_argument);
}

TEST(Json, PoseRoundTripAndErrors) {
    const auto &asset = test::small_asset();
    const auto seq    = arm_raise_sequence(asset.skeleton, 4);
    const auto back   = pose_sequence_from_json(json::parse(to_json(seq).dump()), asset.skeleton.size());
    ASSERT_EQ(back.frames.size(), 4u);
    for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t j = 0; j < asset.skeleton.size(); ++j)
            EXPECT_TRUE(back.frames[f].joint_rotations[j].isApprox(seq.frames[f].joint_rotations[j], 1e-6f));
    EXPECT_THROW(pose_sequence_from_json(to_json(seq), asset.skeleton.size() + 1), DimensionError);
    auto bad = to_json(seq);
    bad["frames"][1]["rotations"][2] = {0.0, 0.0, 0.0, 2.0};
    EXPECT_THROW(pose_sequence_from_json(bad, asset.skeleton.size()), ValidationError);
}

TEST(Json, ConfigNestedDottedAndErrors) {
    const auto c = config_from_json({{"cull", {{"mesh", false}}}, {"sort.mode", "float_reference"}, {"threads", 4}});
    EXPECT_FALSE(c.cull.mesh);
    EXPECT_TRUE(c.cull.triangle);
    EXPECT_EQ(c.sort_mode, SortMode::float_reference);
    EXPECT_EQ(c.threads, 4u);
    const auto back = config_from_json(to_json(c));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_THROW(config_from_json({{"cull.frustum", true}}), std::invalid_argument);
    EXPECT_THROW(config_from_json({{"sort", {{"mode", "bitonic"}}}}), std::invalid_argument);
    EXPECT_THROW(config_from_json({{"tile_size", 0}}), std::invalid_argument);
    EXPECT_THROW(config_from_json(json::array()), std::invalid_argument);
}

TEST(Json, AblationMatrixParses) {
    const auto j = read_json(std::filesystem::path(HRA_SOURCE_DIR) / "configs" / "ablation.json");
    for (const auto &entry : j.at("configs")) EXPECT_NO_THROW(config_from_json(entry)) << entry.dump();
    const auto off = config_from_json(j["configs"][0]);
    EXPECT_FALSE(off.cull.mesh || off.cull.triangle || off.cull.splat || off.codec_on_demand);
}

} // namespace
} // namespace hra
