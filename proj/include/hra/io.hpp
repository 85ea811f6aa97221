// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// File formats: the `.hra` container and the JSON side files (poses, cameras,
// render config, timings).
//
#pragma once

#include "hra/asset.hpp"
#include "hra/pipeline.hpp"

#include <json.hpp>

#include <filesystem>
#include <vector>

namespace hra {

inline constexpr std::uint32_t kContainerVersion = 1;

std::vector<std::uint8_t> save_asset_bytes(const AvatarAsset &asset);
void save_asset(const AvatarAsset &asset, const std::filesystem::path &path);

/// Parses and validates. Throws FormatError for malformed or unsupported
/// containers and ValidationError naming the first offending record.
AvatarAsset load_asset_bytes(const std::vector<std::uint8_t> &bytes);
AvatarAsset load_asset(const std::filesystem::path &path);

/// Reads a whole file; throws IoError.
std::vector<std::uint8_t> read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes);

nlohmann::json to_json(const Camera &camera);
Camera camera_from_json(const nlohmann::json &j);

/// Accepts {"left": cam, "right": cam} or {"center": cam, "baseline": meters}.
StereoCamera stereo_from_json(const nlohmann::json &j);
nlohmann::json to_json(const StereoCamera &stereo);

nlohmann::json to_json(const PoseSequence &sequence);
PoseSequence pose_sequence_from_json(const nlohmann::json &j, std::size_t joint_count);

/// Accepts nested ({"cull": {"mesh": false}}) or dotted ({"cull.mesh": false}) keys.
RenderConfig config_from_json(const nlohmann::json &j, RenderConfig base = {});
nlohmann::json to_json(const RenderConfig &config);

nlohmann::json to_json(const PassTimings &timings);
nlohmann::json to_json(const SequenceReport &report);

nlohmann::json read_json(const std::filesystem::path &path);

} // namespace hra
