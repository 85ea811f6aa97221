// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Avatar data model: skeleton, clothed mesh components, triangle-bound splats,
// the two pose-conditioned networks, and validation.
//
#pragma once

#include "hra/codec.hpp"
#include "hra/common.hpp"
#include "hra/splats.hpp"

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace hra {

struct Joint {
    std::string name;
    int parent = -1; ///< -1 for the root; otherwise < own index
    RigidTransform rest_local;
};

struct Skeleton {
    std::vector<Joint> joints;
    std::vector<Mat4f> inverse_bind; ///< one per joint, maps rest world space into joint space

    std::size_t size() const { return joints.size(); }
};

enum class ComponentKind : std::uint8_t { body = 0, garment = 1, hair = 2 };

const char *to_string(ComponentKind kind);

struct SkinInfluence {
    std::uint16_t joint = 0;
    float weight        = 0.0f;
};
using SkinWeights = std::array<SkinInfluence, 4>;

struct BoundingSphere {
    Vec3f center = Vec3f::Zero();
    float radius = 0.0f;
};

using Triangle = std::array<std::uint32_t, 3>;

struct MeshComponent {
    ComponentKind kind = ComponentKind::body;
    bool closed        = false; ///< watertight manifold
    std::vector<Vec3f> vertices_template;
    std::vector<Triangle> triangles; ///< indices local to this component
    std::vector<SkinWeights> skin_weights;
    BoundingSphere bounding_sphere_rest;
};

enum class Activation : std::uint8_t { relu = 0, tanh = 1 };
enum class NetInput : std::uint8_t { pose_and_canonical_vertex = 0, pose_only = 1 };
enum class NetOutput : std::uint8_t { largesteps_offset = 0, intensity = 1 };

struct DenseLayer {
    std::uint32_t in_dim  = 0;
    std::uint32_t out_dim = 0;
    std::vector<float> weight; ///< out_dim x in_dim, row-major
    std::vector<float> bias;   ///< out_dim
};

struct MlpWeights {
    std::vector<DenseLayer> layers;
    Activation activation = Activation::relu;
    NetInput input_spec   = NetInput::pose_and_canonical_vertex;
    NetOutput output_space = NetOutput::largesteps_offset;

    std::uint32_t input_dim() const { return layers.empty() ? 0 : layers.front().in_dim; }
    std::uint32_t output_dim() const { return layers.empty() ? 0 : layers.back().out_dim; }
};

using SplatStorage = std::variant<SplatAttributes, ChunkedSplatBuffer>;

struct AvatarAsset {
    std::uint32_t version = 1;
    std::uint64_t seed    = 0;
    Skeleton skeleton;
    std::vector<MeshComponent> components; ///< body first
    SplatStorage splats;
    std::vector<Vec3f> static_offsets; ///< already in Euclidean space, one per vertex
    MlpWeights deform_net;
    MlpWeights illum_net;
    float laplacian_lambda = 10.0f;

    std::size_t vertex_count() const;
    std::size_t triangle_count() const;
    std::size_t splat_count() const;
    int sh_degree() const;
    bool is_compressed() const { return std::holds_alternative<ChunkedSplatBuffer>(splats); }
};

/// Flat, global view of the clothed mesh: components concatenated in order.
struct MeshLayout {
    std::vector<std::uint32_t> vertex_offset;   ///< per component, plus total at the end
    std::vector<std::uint32_t> triangle_offset; ///< per component, plus total at the end
    std::vector<Triangle> triangles;            ///< global vertex ids
    std::vector<std::uint16_t> triangle_component;
    std::vector<Vec3f> template_vertices;       ///< V_T

    explicit MeshLayout(const AvatarAsset &asset);
    std::size_t vertex_count() const { return template_vertices.size(); }
    std::size_t triangle_count() const { return triangles.size(); }
};

struct Violation {
    std::string rule;   ///< short rule id, e.g. "barycentric", "2d-constraint"
    std::string record; ///< e.g. "splat", "joint", "component 1 vertex"
    std::size_t index = 0;
    std::string detail;
};

struct ValidationReport {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    std::string summary(std::size_t max_items = 20) const;
};

ValidationReport validate_asset(const AvatarAsset &asset);

/// Splat-only checks against an existing mesh layout.
void validate_splats(const SplatAttributes &splats, const AvatarAsset &asset, const MeshLayout &layout,
                     ValidationReport &report);

struct SyntheticSpec {
    std::uint32_t splat_count  = 533695;
    std::uint32_t vertex_budget = 20000;
    std::uint32_t joint_count  = 17;
    bool garment               = true;
    std::uint64_t seed         = 7;
    int sh_degree              = 3;
    float laplacian_lambda     = 10.0f;
};

/// Minimum joint count of the generated humanoid.
inline constexpr std::uint32_t kHumanoidJoints = 17;

/// Deterministic capsule humanoid with optional open garment and a hair patch.
AvatarAsset generate_synthetic_asset(const SyntheticSpec &spec);

/// Index of a named joint of the generated humanoid, or -1.
int find_joint(const Skeleton &skeleton, const std::string &name);

/// Raw splats of the asset (decompressing everything if the asset is compressed).
SplatAttributes materialize_splats(const AvatarAsset &asset);

} // namespace hra
