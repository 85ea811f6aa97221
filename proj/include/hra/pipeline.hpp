// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Per-frame orchestration:
//   pose -> networks -> skinning -> phase-1 decode -> cull -> phase-2 decode
//   -> transform/shade -> quantize -> sort -> composite
// plus single-pass stereo and per-pass timing.
//
#pragma once

#include "hra/asset.hpp"
#include "hra/camera.hpp"
#include "hra/culling.hpp"
#include "hra/raster.hpp"
#include "hra/rig.hpp"

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace hra {

enum class SortMode : std::uint8_t { quantized = 0, float_reference = 1 };

struct RenderConfig {
    CullToggles cull;
    bool codec_on_demand = true; ///< off: decode every splat's attributes each frame
    SortMode sort_mode   = SortMode::quantized;
    bool stereo_shared_sort = true;
    bool deform_enabled  = true;
    bool illum_enabled   = true;
    std::uint32_t tile_size = 16;
    float radius_cutoff  = 3.0f;
    unsigned threads     = 1;

    /// Everything off: the unoptimized reference path.
    static RenderConfig all_off();
};

enum class Pass : std::size_t {
    deform_mlp = 0,
    skinning,
    decode_phase1,
    cull,
    decode_phase2,
    transform_shade,
    quantize,
    sort,
    raster,
    total,
};
inline constexpr std::size_t kPassCount = 10;
const char *to_string(Pass pass);

struct PassTimings {
    std::array<double, kPassCount> ms{}; ///< indexed by Pass
    TierCounts tiers;                    ///< mono, or the union for stereo
    std::size_t splat_count = 0;
    std::size_t decoded_full = 0; ///< splats whose full attributes were decoded this frame
    bool stereo = false;
    bool shared_sort_refused = false;

    double &operator[](Pass p) { return ms[static_cast<std::size_t>(p)]; }
    double operator[](Pass p) const { return ms[static_cast<std::size_t>(p)]; }
    double sum_of_parts() const;
};

/// Instrumentation: how many times each shared pass ran.
struct PassCounters {
    std::size_t deform_runs   = 0;
    std::size_t skinning_runs = 0;
    std::size_t phase1_runs   = 0;
    std::size_t phase2_runs   = 0;
    std::size_t phase2_splats = 0;
};

struct FrameResult {
    Image image;
    PassTimings timings;
    std::vector<std::uint32_t> survivors;
};

struct StereoResult {
    Image left;
    Image right;
    PassTimings timings;
    std::vector<std::uint32_t> survivors_left;
    std::vector<std::uint32_t> survivors_right;
    std::vector<std::uint32_t> survivors_union;
};

/// Holds per-asset precomputation and the warm-start state carried across frames.
class AvatarRenderer {
public:
    AvatarRenderer(std::shared_ptr<const AvatarAsset> asset, RenderConfig config = {});
    ~AvatarRenderer();

    FrameResult render(const Pose &pose, const Camera &camera);
    StereoResult render_stereo(const Pose &pose, const StereoCamera &stereo);

    const RenderConfig &config() const { return mConfig; }
    void set_config(const RenderConfig &config);
    const PassCounters &counters() const { return mCounters; }
    const AvatarAsset &asset() const { return *mAsset; }
    Rig &rig() { return *mRig; }
    /// Drops the solver warm start; the next frame solves from zero.
    void reset();

private:
    struct Shared;
    void run_shared(const Pose &pose, Shared &shared, PassTimings &timings);

    std::shared_ptr<const AvatarAsset> mAsset;
    RenderConfig mConfig;
    std::unique_ptr<Rig> mRig;
    std::vector<std::uint8_t> mComponentClosed;
    std::vector<double> mComponentMargin;
    float mMaxScale = 0.0f;
    PassCounters mCounters;
};

FrameResult render_frame(const AvatarAsset &asset, const Pose &pose, const Camera &camera,
                         const RenderConfig &config = {});
StereoResult render_stereo(const AvatarAsset &asset, const Pose &pose, const StereoCamera &stereo,
                           const RenderConfig &config = {});

struct PoseSequence {
    double fps = 30.0;
    std::vector<Pose> frames;
};

/// Raises both arms from the sides to overhead over `frames` frames.
PoseSequence arm_raise_sequence(const Skeleton &skeleton, std::size_t frames, double fps = 30.0);

struct PassStats {
    double mean = 0.0, p50 = 0.0, p99 = 0.0;
};

struct SequenceReport {
    std::vector<PassTimings> frames;
    std::size_t warmup_frames = 0;
    std::array<PassStats, kPassCount> aggregate{};
    std::vector<std::filesystem::path> images;
};

inline constexpr std::size_t kWarmupFrames = 10;

/// Aggregates mean/p50/p99 per pass, skipping min(kWarmupFrames, n - 1) frames.
void aggregate_timings(SequenceReport &report);

/// Renders every frame (mono, or stereo when `stereo` is set) into out_dir as PPM.
SequenceReport run_sequence(const AvatarAsset &asset, const PoseSequence &sequence, const Camera *camera,
                            const StereoCamera *stereo, const RenderConfig &config,
                            const std::filesystem::path &out_dir);

} // namespace hra
