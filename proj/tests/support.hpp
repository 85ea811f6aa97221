// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Shared fixtures and independent oracles for the unit and acceptance tests.
//
#pragma once

#include "hra/asset.hpp"
#include "hra/camera.hpp"
#include "hra/culling.hpp"
#include "hra/rig.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace hra::test {

/// Small raw-splat humanoid, generated once per process.
const AvatarAsset &small_asset();
/// Same humanoid with compressed splats.
const AvatarAsset &small_compressed_asset();

AvatarAsset make_asset(std::uint32_t splats, std::uint32_t vertices, std::uint64_t seed, bool garment = true);

/// Straightforward dense forward pass: concat(pose encoding, vertex) through every layer.
std::vector<double> reference_mlp(const MlpWeights &net, const std::vector<float> &pose_encoding,
                                  const Vec3f *vertex);

/// Brute-force visibility: every splat's inflated bound tested against the
/// guard-extended image pyramid in view space, plus the closed-component
/// back-face rule evaluated from posed vertices. Ascending splat ids.
struct OracleOptions {
    bool frustum  = true;
    bool backface = true;
};
std::vector<std::uint32_t> oracle_survivors(const AvatarAsset &asset, const PosedGeometry &geometry,
                                            const Camera &camera, double inflate_radius, double guard_pixels,
                                            OracleOptions options = {});

/// Checks every per-attribute round-trip bound of `buffer` against the raw
/// input it was compressed from. Returns an empty string, or the first failure.
std::string check_codec_bounds(const SplatAttributes &raw, const ChunkedSplatBuffer &buffer);

/// Angle in degrees between two rotations.
double rotation_angle_deg(const Quatf &a, const Quatf &b);

/// Camera whose image covers only the upper half of the standing avatar.
Camera half_view_camera(std::uint32_t width, std::uint32_t height);

/// nx x ny grid in the xy plane (1 cm spacing), two triangles per cell.
struct GridMesh {
    std::vector<Vec3f> vertices;
    std::vector<Triangle> triangles;
};
GridMesh make_grid(std::uint32_t nx, std::uint32_t ny);

/// I + lambda L assembled densely from the triangle list, independent of LaplacianSystem.
Eigen::MatrixXd dense_largesteps_matrix(std::size_t vertex_count, const std::vector<Triangle> &triangles,
                                        double lambda);

/// Posed avatar plus everything the culler consumes, for raw or compressed splats.
struct CullScene {
    const AvatarAsset *asset;
    Rig rig;
    PosedGeometry geo;
    PositionView pos;
    std::vector<std::uint8_t> closed;
    std::vector<double> margin;
    double inflate;

    CullScene(const AvatarAsset &asset, const Pose &pose);
    std::vector<std::uint32_t> run(const Camera &camera, CullToggles toggles, unsigned threads = 1,
                                   VisibilityBuffer *out = nullptr) const;
};

} // namespace hra::test
