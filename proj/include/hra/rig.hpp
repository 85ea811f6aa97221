// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Posing: forward kinematics, the pose-conditioned deformation and
// illumination networks, the Laplacian (LargeSteps) to Euclidean mapping and
// linear blend skinning of the clothed mesh.
//
#pragma once

#include "hra/asset.hpp"

#include <memory>
#include <span>
#include <vector>

namespace hra {

struct Pose {
    std::vector<Quatf> joint_rotations; ///< local, relative to each joint's rest frame
    Vec3f root_translation = Vec3f::Zero();

    static Pose rest(std::size_t joint_count);
    std::size_t size() const { return joint_rotations.size(); }
};

/// 6D encoding (first two rotation-matrix columns) per joint. The root slot
/// always encodes identity: global orientation is not a deformation driver.
std::vector<float> encode_pose(const Pose &pose);

/// Global joint transforms, root first.
std::vector<Affine3f> evaluate_pose(const Skeleton &skeleton, const Pose &pose);

/// Per-vertex MLP evaluation with the pose-dependent part of the first layer
/// hoisted out of the vertex loop. Accumulates in double.
class MlpEvaluator {
public:
    MlpEvaluator(const MlpWeights &net, std::span<const float> pose_encoding);

    /// Writes output_dim values for one canonical vertex.
    void evaluate(const Vec3f &vertex, std::span<double> out) const;
    std::uint32_t output_dim() const { return mNet->output_dim(); }

private:
    const MlpWeights *mNet;
    std::vector<double> mFirstBase;
};

/// LargeSteps-space offsets u from the deformation network, one per vertex.
std::vector<Vec3f> predict_deformation(const MlpWeights &net, const Pose &pose,
                                       std::span<const Vec3f> canonical_vertices, unsigned threads = 1);

/// Per-vertex intensity: softplus, then clamped to [0, 4].
std::vector<float> predict_illumination(const MlpWeights &net, const Pose &pose,
                                        std::span<const Vec3f> canonical_vertices, unsigned threads = 1);

inline constexpr float kMaxIntensity = 4.0f;

struct SolverConfig {
    double tolerance   = 1e-6;
    int max_iterations = 500;
    /// Factorize (I + lambda L) densely when the vertex count is below this.
    std::size_t dense_below = 0;
};

struct SolveReport {
    int iterations = 0;       ///< max over axes
    double residual = 0.0;    ///< ||(I + lambda L) x - u||_inf / max(1, ||u||_inf), max over axes
};

/// (I + lambda L) with L the uniform (combinatorial) graph Laplacian of the mesh.
class LaplacianSystem {
public:
    LaplacianSystem(std::size_t vertex_count, std::span<const Triangle> triangles, double lambda,
                    SolverConfig config = {});
    ~LaplacianSystem();
    LaplacianSystem(LaplacianSystem &&) noexcept;
    LaplacianSystem &operator=(LaplacianSystem &&) noexcept;

    std::size_t size() const { return mDegree.size(); }
    double lambda() const { return mLambda; }
    const SolverConfig &config() const { return mConfig; }

    /// y = (I + lambda L) x for one axis.
    void apply(std::span<const double> x, std::span<double> y) const;
    /// y = L x.
    void apply_laplacian(std::span<const double> x, std::span<double> y) const;
    /// x^T L x, i.e. the sum over edges of squared differences.
    double dirichlet_energy(std::span<const Vec3f> x) const;

    std::span<const std::uint32_t> neighbors(std::size_t i) const {
        return {mAdj.data() + mRowStart[i], mRowStart[i + 1] - mRowStart[i]};
    }

    /// Solves each axis independently. `x` holds the warm start on entry.
    /// Throws SolverError when the iteration cap is hit.
    SolveReport solve(std::span<const Vec3f> u, std::span<Vec3f> x, unsigned threads = 1) const;

private:
    int solve_axis(std::span<const double> b, std::span<double> x, double &residual) const;

    std::vector<std::uint32_t> mRowStart;
    std::vector<std::uint32_t> mAdj;
    std::vector<double> mDegree;
    double mLambda;
    SolverConfig mConfig;
    struct Dense;
    std::unique_ptr<Dense> mDense;
};

/// Cold-start map from LargeSteps space to Euclidean space.
std::vector<Vec3f> largesteps_map(const LaplacianSystem &system, std::span<const Vec3f> u,
                                  SolveReport *report = nullptr);

/// Posed triangle with its rest counterpart and the rest-to-posed affine.
struct TriangleFrame {
    Vec3f origin;     ///< posed third vertex p2
    Vec3f e1, e2;     ///< posed p0 - p2, p1 - p2
    Vec3f normal;     ///< posed unit normal
    Vec3f rest_e1, rest_e2, rest_normal;
    Mat3f deformation;    ///< A = [e1 e2 n][E1 E2 N]^-1
    Mat3f local_to_world; ///< A * (rest tangent frame)
    Vec3f centroid;
    float stretch   = 1.0f; ///< largest singular value of A
    bool degenerate = false;
};

struct PosedGeometry {
    std::vector<Vec3f> vertices_world;
    std::vector<TriangleFrame> triangle_frames;
    std::vector<float> vertex_intensity;
    std::vector<BoundingSphere> component_spheres; ///< centroid, max distance + 1e-4
    float max_stretch = 1.0f;                      ///< over non-degenerate triangles
    SolveReport solve;
};

struct SkinOptions {
    bool enable_deform = true;
    bool enable_illum  = true;
    unsigned threads   = 1;
};

/// Rest-space data that does not change per frame, plus warm-start state for
/// the per-frame Laplacian solve.
class Rig {
public:
    explicit Rig(const AvatarAsset &asset, SolverConfig config = {});

    const MeshLayout &layout() const { return mLayout; }
    const LaplacianSystem &system() const { return mSystem; }
    /// V_T + static offsets: the rest geometry splats are bound to.
    const std::vector<Vec3f> &rest_vertices() const { return mRest; }

    /// Deformation offsets in Euclidean space (warm-started from the previous call).
    std::vector<Vec3f> deformation(const Pose &pose, unsigned threads, SolveReport *report);
    /// Skinning of arbitrary per-vertex offsets added to V_T + static offsets.
    std::vector<Vec3f> skin(const Pose &pose, std::span<const Vec3f> offsets, unsigned threads) const;
    /// Triangle frames and bounding spheres from posed vertices.
    void build_frames(PosedGeometry &geometry, unsigned threads) const;

    PosedGeometry pose(const Pose &pose, const SkinOptions &options);
    void reset_warm_start();

private:
    const AvatarAsset *mAsset;
    MeshLayout mLayout;
    std::vector<Vec3f> mRest;
    std::vector<Mat3f> mRestInverse; ///< [E1 E2 N]^-1
    std::vector<Mat3f> mRestFrame;   ///< [E1 E2 N]^-1 * rest tangent frame
    std::vector<SkinWeights> mSkin;
    LaplacianSystem mSystem;
    std::vector<Vec3f> mWarm;
};

/// One-shot V = LBS(V_T + dV_s + LS(dV_d(theta)), theta) with a cold solve.
PosedGeometry skin_vertices(const AvatarAsset &asset, const Pose &pose, const SkinOptions &options = {});

} // namespace hra
