// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/pipeline.hpp"
#include "hra/binding.hpp"
#include "hra/parallel.hpp"
#include "hra/sorting.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace hra {

RenderConfig RenderConfig::all_off() {
    RenderConfig c;
    c.cull               = {false, false, false};
    c.codec_on_demand    = false;
    c.sort_mode          = SortMode::float_reference;
    c.stereo_shared_sort = false;
    return c;
}

const char *to_string(Pass pass) {
    switch (pass) {
    case Pass::deform_mlp: return "deform_mlp";
    case Pass::skinning: return "skinning";
    case Pass::decode_phase1: return "decode_phase1";
    case Pass::cull: return "cull";
    case Pass::decode_phase2: return "decode_phase2";
    case Pass::transform_shade: return "transform_shade";
    case Pass::quantize: return "quantize";
    case Pass::sort: return "sort";
    case Pass::raster: return "raster";
    case Pass::total: return "total";
    }
    return "unknown";
}

double PassTimings::sum_of_parts() const {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < kPassCount; ++i) s += ms[i];
    return s;
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
    explicit Stopwatch(double &sink) : mSink(sink), mStart(Clock::now()) {}
    ~Stopwatch() { mSink += std::chrono::duration<double, std::milli>(Clock::now() - mStart).count(); }

private:
    double &mSink;
    Clock::time_point mStart;
};

// Runs `fn`, prefixing any exception message with the stage name.
template <class Fn>
auto stage(const char *name, Fn &&fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const SolverError &e) {
        throw SolverError(std::string(name) + ": " + e.what(), e.residual());
    } catch (const ValidationError &e) {
        throw ValidationError(std::string(name) + ": " + e.what());
    } catch (const FormatError &e) {
        throw FormatError(std::string(name) + ": " + e.what());
    } catch (const DimensionError &e) {
        throw DimensionError(std::string(name) + ": " + e.what());
    }
}

struct WorldSplats {
    std::vector<Vec3f> mean;
    std::vector<Mat3f> basis;
    std::vector<float> intensity;
};

} // namespace

struct AvatarRenderer::Shared {
    PosedGeometry geometry;
    PositionView positions;
};

AvatarRenderer::AvatarRenderer(std::shared_ptr<const AvatarAsset> asset, RenderConfig config)
    : mAsset(std::move(asset)), mConfig(config) {
    mRig = std::make_unique<Rig>(*mAsset);
    for (const auto &c : mAsset->components) mComponentClosed.push_back(c.closed ? 1 : 0);
    PositionView positions;
    if (const auto *raw = std::get_if<SplatAttributes>(&mAsset->splats)) {
        positions = position_slice(*raw);
        mMaxScale = max_scale(*raw);
    } else {
        const auto &buf = std::get<ChunkedSplatBuffer>(mAsset->splats);
        positions       = decompress_positions(buf, config.threads);
        // decoded scales go through a float exp; leave room for its rounding
        mMaxScale = max_scale(buf) * 1.0001f;
    }
    const auto &tc = mRig->layout().triangle_component;
    mComponentMargin.assign(mAsset->components.size(), 0.0);
    for (std::size_t i = 0; i < positions.size(); ++i) {
        auto &m = mComponentMargin[tc[positions.triangle[i]]];
        m       = std::max(m, std::abs(double(positions.w[i])));
    }
}

AvatarRenderer::~AvatarRenderer() = default;

void AvatarRenderer::set_config(const RenderConfig &config) { mConfig = config; }

void AvatarRenderer::reset() { mRig->reset_warm_start(); }

void AvatarRenderer::run_shared(const Pose &pose, Shared &shared, PassTimings &t) {
    const unsigned threads = mConfig.threads;
    const auto &layout     = mRig->layout();
    std::vector<Vec3f> offsets;
    {
        Stopwatch sw(t[Pass::deform_mlp]);
        stage("deform_mlp", [&] {
            if (mConfig.deform_enabled) offsets = mRig->deformation(pose, threads, &shared.geometry.solve);
            if (mConfig.illum_enabled)
                shared.geometry.vertex_intensity =
                    predict_illumination(mAsset->illum_net, pose, layout.template_vertices, threads);
            else
                shared.geometry.vertex_intensity.assign(layout.vertex_count(), 1.0f);
        });
        ++mCounters.deform_runs;
    }
    {
        Stopwatch sw(t[Pass::skinning]);
        stage("skinning", [&] {
            shared.geometry.vertices_world = mRig->skin(pose, offsets, threads);
            mRig->build_frames(shared.geometry, threads);
        });
        ++mCounters.skinning_runs;
    }
    {
        Stopwatch sw(t[Pass::decode_phase1]);
        stage("decode_phase1", [&] {
            if (const auto *raw = std::get_if<SplatAttributes>(&mAsset->splats))
                shared.positions = position_slice(*raw);
            else
                shared.positions = decompress_positions(std::get<ChunkedSplatBuffer>(mAsset->splats), threads);
        });
        ++mCounters.phase1_runs;
    }
    t.splat_count = shared.positions.size();
}

namespace {

struct EyeInputs {
    const Camera *camera;
    const SplatAttributes *full;          ///< element k belongs to splat ids[k]
    std::span<const std::uint32_t> ids;    ///< splat ids of `full`
    const WorldSplats *world;
};

// Decodes full attributes for `survivors` (or everything, then gathers).
SplatAttributes decode_full(const AvatarAsset &asset, std::span<const std::uint32_t> survivors, bool on_demand,
                            unsigned threads, std::size_t &decoded) {
    if (const auto *raw = std::get_if<SplatAttributes>(&asset.splats)) {
        decoded = on_demand ? survivors.size() : raw->size();
        return raw->gather(survivors);
    }
    const auto &buf = std::get<ChunkedSplatBuffer>(asset.splats);
    if (on_demand) {
        decoded = survivors.size();
        return decompress_full(buf, survivors, threads);
    }
    decoded = buf.count;
    return decompress_all(buf, threads).gather(survivors);
}

WorldSplats transform_splats(const SplatAttributes &full, std::span<const std::uint32_t> ids,
                             const PosedGeometry &geo, const MeshLayout &layout, unsigned threads) {
    WorldSplats w;
    w.mean.resize(ids.size());
    w.basis.resize(ids.size());
    w.intensity.resize(ids.size());
    parallel_for(threads, ids.size(), [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t k = b; k < e; ++k) {
            const auto t   = full.triangle[k];
            const auto &f  = geo.triangle_frames[t];
            const auto mb  = splat_to_world(full, k, f);
            const auto &tr = layout.triangles[t];
            w.mean[k]      = mb.mean;
            w.basis[k]     = mb.basis;
            w.intensity[k] = interpolate_intensity(full.u[k], full.v[k], geo.vertex_intensity[tr[0]],
                                                   geo.vertex_intensity[tr[1]], geo.vertex_intensity[tr[2]]);
        }
    });
    return w;
}

// Projects and shades the splats at positions `subset` of the world arrays.
// Rejected splats are dropped; `kept` receives the surviving positions.
std::vector<ProjectedSplat> project_eye(const EyeInputs &in, std::span<const std::uint32_t> subset,
                                        float cutoff, unsigned threads, std::vector<std::uint32_t> &kept) {
    const Camera &cam = *in.camera;
    const Vec3f eye   = cam.position();
    std::vector<ProjectedSplat> all(subset.size());
    std::vector<std::uint8_t> ok(subset.size(), 0);
    parallel_for(threads, subset.size(), [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t s = b; s < e; ++s) {
            const auto k = subset[s];
            auto p       = project_splat(in.world->mean[k], in.world->basis[k], cam, cutoff);
            if (!p) continue;
            const Vec3f dir = (in.world->mean[k] - eye).normalized();
            p->color   = eval_color(in.full->sh_degree, in.full->sh_of(k), dir, in.world->intensity[k]);
            p->opacity = in.full->opacity[k];
            all[s]     = *p;
            ok[s]      = 1;
        }
    });
    std::vector<ProjectedSplat> out;
    kept.clear();
    for (std::size_t s = 0; s < subset.size(); ++s)
        if (ok[s]) {
            out.push_back(all[s]);
            kept.push_back(subset[s]);
        }
    return out;
}

// Returns positions into `splats` in front-to-back order.
std::vector<std::uint32_t> order_splats(std::span<const ProjectedSplat> splats, SortMode mode, unsigned threads,
                                        PassTimings &t) {
    std::vector<std::uint32_t> idx(splats.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = std::uint32_t(i);
    std::vector<float> depth(splats.size());
    for (std::size_t i = 0; i < splats.size(); ++i) depth[i] = splats[i].depth;
    if (mode == SortMode::float_reference) {
        Stopwatch sw(t[Pass::sort]);
        return sort_by_depth(depth, idx);
    }
    std::vector<std::uint16_t> keys;
    {
        Stopwatch sw(t[Pass::quantize]);
        float lo = 0.0f, hi = 0.0f;
        if (!depth.empty()) {
            const auto [mn, mx] = std::minmax_element(depth.begin(), depth.end());
            lo                  = *mn;
            hi                  = *mx;
        }
        keys = quantize_depths(depth, lo, hi);
    }
    Stopwatch sw(t[Pass::sort]);
    return sort_survivors(keys, idx, threads);
}

Image raster_ordered(std::span<const ProjectedSplat> splats, std::span<const std::uint32_t> order,
                     const Camera &camera, const RenderConfig &config) {
    std::vector<ProjectedSplat> sorted(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = splats[order[i]];
    return composite(sorted, camera.width, camera.height, {config.tile_size, config.threads});
}

double guard_for(float cutoff) {
    return std::max(Frustum::kGuardPixels, double(cutoff) * std::sqrt(double(kLowPassDilation)) + 0.36);
}

} // namespace

FrameResult AvatarRenderer::render(const Pose &pose, const Camera &camera) {
    camera.check();
    FrameResult r;
    auto &t = r.timings;
    Stopwatch total(t[Pass::total]);
    Shared shared;
    run_shared(pose, shared, t);
    const auto &layout = mRig->layout();
    const double inflate = splat_cull_radius(mMaxScale, shared.geometry.max_stretch, mConfig.radius_cutoff);

    std::vector<double> margin(mComponentMargin.size());
    for (std::size_t c = 0; c < margin.size(); ++c) margin[c] = mComponentMargin[c] + inflate;
    {
        Stopwatch sw(t[Pass::cull]);
        CullInputs ci;
        ci.positions          = &shared.positions;
        ci.geometry           = &shared.geometry;
        ci.component_closed   = mComponentClosed;
        ci.triangle_component = layout.triangle_component;
        ci.component_margin   = margin;
        ci.inflate_radius     = inflate;
        ci.guard_pixels       = guard_for(mConfig.radius_cutoff);
        const auto vb = stage("cull", [&] { return cull(ci, camera, mConfig.cull, r.survivors, mConfig.threads); });
        t.tiers = vb.counts;
    }
    SplatAttributes full;
    {
        Stopwatch sw(t[Pass::decode_phase2]);
        full = stage("decode_phase2", [&] {
            return decode_full(*mAsset, r.survivors, mConfig.codec_on_demand, mConfig.threads, t.decoded_full);
        });
        ++mCounters.phase2_runs;
        mCounters.phase2_splats += t.decoded_full;
    }
    std::vector<ProjectedSplat> projected;
    {
        Stopwatch sw(t[Pass::transform_shade]);
        const auto world = transform_splats(full, r.survivors, shared.geometry, layout, mConfig.threads);
        std::vector<std::uint32_t> subset(r.survivors.size()), kept;
        for (std::size_t k = 0; k < subset.size(); ++k) subset[k] = std::uint32_t(k);
        projected = project_eye({&camera, &full, r.survivors, &world}, subset, mConfig.radius_cutoff,
                                mConfig.threads, kept);
    }
    const auto order = order_splats(projected, mConfig.sort_mode, mConfig.threads, t);
    {
        Stopwatch sw(t[Pass::raster]);
        r.image = raster_ordered(projected, order, camera, mConfig);
    }
    return r;
}

StereoResult AvatarRenderer::render_stereo(const Pose &pose, const StereoCamera &stereo) {
    stereo.left.check();
    stereo.right.check();
    StereoResult r;
    auto &t  = r.timings;
    t.stereo = true;
    Stopwatch total(t[Pass::total]);
    Shared shared;
    run_shared(pose, shared, t);
    const auto &layout   = mRig->layout();
    const double inflate = splat_cull_radius(mMaxScale, shared.geometry.max_stretch, mConfig.radius_cutoff);
    const bool shared_sort = mConfig.stereo_shared_sort && stereo.parallel();
    t.shared_sort_refused  = mConfig.stereo_shared_sort && !shared_sort;

    std::vector<double> margin(mComponentMargin.size());
    for (std::size_t c = 0; c < margin.size(); ++c) margin[c] = mComponentMargin[c] + inflate;
    {
        Stopwatch sw(t[Pass::cull]);
        CullInputs ci;
        ci.positions          = &shared.positions;
        ci.geometry           = &shared.geometry;
        ci.component_closed   = mComponentClosed;
        ci.triangle_component = layout.triangle_component;
        ci.component_margin   = margin;
        ci.inflate_radius     = inflate;
        ci.guard_pixels       = guard_for(mConfig.radius_cutoff);
        const auto vl = stage("cull", [&] { return cull(ci, stereo.left, mConfig.cull, r.survivors_left, mConfig.threads); });
        const auto vr = stage("cull", [&] { return cull(ci, stereo.right, mConfig.cull, r.survivors_right, mConfig.threads); });
        std::set_union(r.survivors_left.begin(), r.survivors_left.end(), r.survivors_right.begin(),
                       r.survivors_right.end(), std::back_inserter(r.survivors_union));
        // Union tier counts: a splat passes a tier if it passes for either eye.
        const auto &pos = shared.positions;
        TierCounts u;
        u.total = pos.size();
        for (std::size_t i = 0; i < pos.size(); ++i) {
            const auto tri = pos.triangle[i];
            const auto c   = layout.triangle_component[tri];
            const bool degenerate = shared.geometry.triangle_frames[tri].degenerate;
            auto tri_ok = [&](const VisibilityBuffer &v) {
                return v.component[c] && !degenerate && (!pos.label[i] || v.triangle[tri]);
            };
            u.mesh += (vl.component[c] || vr.component[c]) ? 1 : 0;
            u.triangle += (tri_ok(vl) || tri_ok(vr)) ? 1 : 0;
        }
        u.splat = r.survivors_union.size();
        t.tiers = u;
    }
    SplatAttributes full;
    {
        Stopwatch sw(t[Pass::decode_phase2]);
        full = stage("decode_phase2", [&] {
            return decode_full(*mAsset, r.survivors_union, mConfig.codec_on_demand, mConfig.threads, t.decoded_full);
        });
        ++mCounters.phase2_runs;
        mCounters.phase2_splats += t.decoded_full;
    }

    // Positions into the union arrays for each eye's survivors.
    auto positions_of = [&](const std::vector<std::uint32_t> &eye) {
        std::vector<std::uint32_t> out;
        out.reserve(eye.size());
        std::size_t j = 0;
        for (auto id : eye) {
            while (r.survivors_union[j] != id) ++j;
            out.push_back(std::uint32_t(j));
        }
        return out;
    };
    std::vector<ProjectedSplat> pl, pr;
    std::vector<std::uint32_t> kept_l, kept_r;
    std::vector<float> left_depth; // left-view depth per union position
    {
        Stopwatch sw(t[Pass::transform_shade]);
        const auto world = transform_splats(full, r.survivors_union, shared.geometry, layout, mConfig.threads);
        const EyeInputs left{&stereo.left, &full, r.survivors_union, &world};
        const EyeInputs right{&stereo.right, &full, r.survivors_union, &world};
        pl = project_eye(left, positions_of(r.survivors_left), mConfig.radius_cutoff, mConfig.threads, kept_l);
        pr = project_eye(right, positions_of(r.survivors_right), mConfig.radius_cutoff, mConfig.threads, kept_r);
        if (shared_sort) {
            left_depth.resize(world.mean.size());
            for (std::size_t k = 0; k < world.mean.size(); ++k) left_depth[k] = stereo.left.to_view(world.mean[k]).z();
        }
    }

    std::vector<std::uint32_t> order_l, order_r;
    if (shared_sort) {
        // One sort over the union by left-eye depth; each eye keeps its own members in that order.
        std::vector<ProjectedSplat> keyed(left_depth.size());
        for (std::size_t k = 0; k < keyed.size(); ++k) keyed[k].depth = left_depth[k];
        const auto order = order_splats(keyed, mConfig.sort_mode, mConfig.threads, t);
        auto filter = [&](const std::vector<std::uint32_t> &kept) {
            std::vector<std::int64_t> slot(left_depth.size(), -1);
            for (std::size_t i = 0; i < kept.size(); ++i) slot[kept[i]] = std::int64_t(i);
            std::vector<std::uint32_t> out;
            out.reserve(kept.size());
            for (auto k : order)
                if (slot[k] >= 0) out.push_back(std::uint32_t(slot[k]));
            return out;
        };
        Stopwatch sw(t[Pass::sort]);
        order_l = filter(kept_l);
        order_r = filter(kept_r);
    } else {
        order_l = order_splats(pl, mConfig.sort_mode, mConfig.threads, t);
        order_r = order_splats(pr, mConfig.sort_mode, mConfig.threads, t);
    }
    {
        Stopwatch sw(t[Pass::raster]);
        r.left  = raster_ordered(pl, order_l, stereo.left, mConfig);
        r.right = raster_ordered(pr, order_r, stereo.right, mConfig);
    }
    return r;
}

FrameResult render_frame(const AvatarAsset &asset, const Pose &pose, const Camera &camera,
                         const RenderConfig &config) {
    AvatarRenderer renderer(std::shared_ptr<const AvatarAsset>(&asset, [](const AvatarAsset *) {}), config);
    return renderer.render(pose, camera);
}

StereoResult render_stereo(const AvatarAsset &asset, const Pose &pose, const StereoCamera &stereo,
                           const RenderConfig &config) {
    AvatarRenderer renderer(std::shared_ptr<const AvatarAsset>(&asset, [](const AvatarAsset *) {}), config);
    return renderer.render_stereo(pose, stereo);
}

PoseSequence arm_raise_sequence(const Skeleton &skeleton, std::size_t frames, double fps) {
    const int ls = find_joint(skeleton, "l_shoulder"), rs = find_joint(skeleton, "r_shoulder");
    if (ls < 0 || rs < 0) throw DimensionError("arm raise needs l_shoulder and r_shoulder joints");
    PoseSequence seq;
    seq.fps = fps;
    constexpr double kDeg = std::numbers::pi / 180.0;
    for (std::size_t f = 0; f < frames; ++f) {
        const double s     = frames > 1 ? double(f) / double(frames - 1) : 0.0;
        const double angle = (-70.0 + 150.0 * s) * kDeg;
        Pose p             = Pose::rest(skeleton.size());
        // Arms point along +-x at rest; rotating about z lifts them.
        p.joint_rotations[ls] = Quatf(Eigen::AngleAxisf(float(angle), Vec3f::UnitZ())).normalized();
        p.joint_rotations[rs] = Quatf(Eigen::AngleAxisf(float(-angle), Vec3f::UnitZ())).normalized();
        seq.frames.push_back(std::move(p));
    }
    return seq;
}

void aggregate_timings(SequenceReport &report) {
    const std::size_t n = report.frames.size();
    report.warmup_frames = n ? std::min(kWarmupFrames, n - 1) : 0;
    for (std::size_t p = 0; p < kPassCount; ++p) {
        std::vector<double> v;
        for (std::size_t f = report.warmup_frames; f < n; ++f) v.push_back(report.frames[f].ms[p]);
        PassStats s;
        if (!v.empty()) {
            double sum = 0.0;
            for (double x : v) sum += x;
            s.mean = sum / double(v.size());
            std::sort(v.begin(), v.end());
            auto rank = [&](double q) {
                const auto k = std::size_t(std::ceil(q * double(v.size())));
                return v[std::min(v.size() - 1, k == 0 ? 0 : k - 1)];
            };
            s.p50 = rank(0.5);
            s.p99 = rank(0.99);
        }
        report.aggregate[p] = s;
    }
}

SequenceReport run_sequence(const AvatarAsset &asset, const PoseSequence &sequence, const Camera *camera,
                            const StereoCamera *stereo, const RenderConfig &config,
                            const std::filesystem::path &out_dir) {
    if (sequence.frames.empty()) throw std::invalid_argument("pose sequence is empty");
    if (!camera && !stereo) throw std::invalid_argument("run_sequence needs a camera or a stereo rig");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    AvatarRenderer renderer(std::shared_ptr<const AvatarAsset>(&asset, [](const AvatarAsset *) {}), config);
    SequenceReport report;
    char name[64];
    for (std::size_t f = 0; f < sequence.frames.size(); ++f) {
        auto write = [&](const Image &img, const char *suffix) {
            std::snprintf(name, sizeof name, "frame_%04zu%s.ppm", f, suffix);
            const auto path = out_dir / name;
            try {
                write_ppm(img, path);
            } catch (const std::exception &e) {
                throw IoError("frame " + std::to_string(f) + ": " + e.what());
            }
            report.images.push_back(path);
        };
        if (stereo) {
            auto r = renderer.render_stereo(sequence.frames[f], *stereo);
            write(r.left, "_left");
            write(r.right, "_right");
            report.frames.push_back(r.timings);
        } else {
            auto r = renderer.render(sequence.frames[f], *camera);
            write(r.image, "");
            report.frames.push_back(r.timings);
        }
    }
    aggregate_timings(report);
    return report;
}

} // namespace hra
