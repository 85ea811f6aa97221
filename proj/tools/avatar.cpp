// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// avatar: generate, validate, render and benchmark `.hra` assets.
//
// Exit codes: 0 ok, 1 validation or usage failure, 2 IO or malformed file, 3 internal error.
//
#include "hra/io.hpp"
#include "hra/pipeline.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kInternal = 3 };

struct GenArgs {
    hra::SyntheticSpec spec;
    std::string compress = "standard";
    std::string out;
};

int cmd_gen(const GenArgs &a) {
    auto asset = hra::generate_synthetic_asset(a.spec);
    if (a.compress != "none") {
        const auto profile = a.compress == "aggressive" ? hra::CodecProfile::aggressive : hra::CodecProfile::standard;
        const auto &raw    = std::get<hra::SplatAttributes>(asset.splats);
        auto buf           = hra::compress_splats(raw, profile);
        std::printf("compressed %zu splats (%s): %zu bytes, ratio %.4f\n", raw.size(), hra::to_string(profile),
                    buf.byte_size(), buf.ratio());
        asset.splats = std::move(buf);
    }
    hra::save_asset(asset, a.out);
    std::printf("wrote %s: %zu joints, %zu components, %zu vertices, %zu triangles, %zu splats\n", a.out.c_str(),
                asset.skeleton.size(), asset.components.size(), asset.vertex_count(), asset.triangle_count(),
                asset.splat_count());
    return kOk;
}

int cmd_validate(const std::string &path) {
    const auto bytes = hra::read_file(path);
    hra::AvatarAsset asset;
    try {
        asset = hra::load_asset_bytes(bytes);
    } catch (const hra::ValidationError &e) {
        std::printf("invalid: %s\n", e.what());
        return kValidation;
    }
    const auto report = hra::validate_asset(asset);
    std::printf("%s\n", report.summary().c_str());
    return report.ok() ? kOk : kValidation;
}

struct RenderArgs {
    std::string asset, poses, camera, stereo, config, out, timings;
    std::size_t arm_raise = 0;
    bool png              = false;
};

hra::PoseSequence load_poses(const std::string &path, std::size_t arm_raise, const hra::AvatarAsset &asset) {
    if (!path.empty()) return hra::pose_sequence_from_json(hra::read_json(path), asset.skeleton.size());
    return hra::arm_raise_sequence(asset.skeleton, arm_raise ? arm_raise : 60);
}

int cmd_render(const RenderArgs &a) {
    const auto asset  = hra::load_asset(a.asset);
    const auto seq    = load_poses(a.poses, a.arm_raise, asset);
    const auto config = a.config.empty() ? hra::RenderConfig{} : hra::config_from_json(hra::read_json(a.config));
    std::optional<hra::Camera> camera;
    std::optional<hra::StereoCamera> stereo;
    if (!a.stereo.empty()) stereo = hra::stereo_from_json(hra::read_json(a.stereo));
    if (!a.camera.empty()) camera = hra::camera_from_json(hra::read_json(a.camera));
    if (!camera && !stereo) camera = hra::avatar_camera(2048, 945);

    const auto report = hra::run_sequence(asset, seq, stereo ? nullptr : &*camera, stereo ? &*stereo : nullptr,
                                          config, a.out);
    if (a.png)
        for (const auto &p : report.images) {
            auto png = p;
            hra::write_png(hra::read_ppm(p), png.replace_extension(".png"));
        }
    if (!a.timings.empty()) {
        json j      = hra::to_json(report);
        j["config"] = hra::to_json(config);
        const auto s = j.dump(2);
        hra::write_file(a.timings, std::vector<std::uint8_t>(s.begin(), s.end()));
    }
    const auto &total = report.aggregate[std::size_t(hra::Pass::total)];
    std::printf("rendered %zu frames to %s (total ms: mean %.2f p50 %.2f p99 %.2f)\n", report.frames.size(),
                a.out.c_str(), total.mean, total.p50, total.p99);
    return kOk;
}

struct BenchArgs {
    std::string asset, matrix, camera, stereo, json_out;
    std::size_t frames = 120;
};

int cmd_bench(const BenchArgs &a) {
    const auto asset = hra::load_asset(a.asset);
    const json m     = hra::read_json(a.matrix);
    const auto &entries = m.at("configs");
    if (!entries.is_array() || entries.empty()) throw std::invalid_argument("matrix: 'configs' must be a non-empty array");

    std::optional<hra::Camera> camera;
    std::optional<hra::StereoCamera> stereo;
    if (!a.stereo.empty()) stereo = hra::stereo_from_json(hra::read_json(a.stereo));
    else if (m.contains("stereo")) stereo = hra::stereo_from_json(m["stereo"]);
    if (!a.camera.empty()) camera = hra::camera_from_json(hra::read_json(a.camera));
    else if (m.contains("camera")) camera = hra::camera_from_json(m["camera"]);
    if (!camera && !stereo) camera = hra::avatar_camera(2048, 945, hra::Framing::upper_body);

    const auto seq = hra::arm_raise_sequence(asset.skeleton, a.frames);
    json rows      = json::array();
    double baseline_ms = 0.0;
    std::printf("%-24s %10s %10s %10s %12s %12s %8s\n", "config", "mean_ms", "p50_ms", "p99_ms", "survivors",
                "decoded", "speedup");
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto config = hra::config_from_json(entries[i]);
        const std::string name = entries[i].value("name", "config" + std::to_string(i));
        hra::AvatarRenderer renderer(std::shared_ptr<const hra::AvatarAsset>(&asset, [](const hra::AvatarAsset *) {}),
                                     config);
        hra::SequenceReport report;
        std::uint64_t survivors = 0, decoded = 0;
        for (const auto &pose : seq.frames) {
            const auto t = stereo ? renderer.render_stereo(pose, *stereo).timings : renderer.render(pose, *camera).timings;
            survivors += t.tiers.splat;
            decoded += t.decoded_full;
            report.frames.push_back(t);
        }
        hra::aggregate_timings(report);
        const auto &total = report.aggregate[std::size_t(hra::Pass::total)];
        if (i == 0) baseline_ms = total.mean;
        const double speedup = total.mean > 0.0 ? baseline_ms / total.mean : 0.0;
        std::printf("%-24s %10.2f %10.2f %10.2f %12llu %12llu %7.2fx\n", name.c_str(), total.mean, total.p50,
                    total.p99, static_cast<unsigned long long>(survivors), static_cast<unsigned long long>(decoded),
                    speedup);
        json row = {{"name", name},
                    {"config", hra::to_json(config)},
                    {"survivors_total", survivors},
                    {"decoded_total", decoded},
                    {"speedup_vs_first", speedup},
                    {"timings", hra::to_json(report)}};
        rows.push_back(row);
    }
    if (!a.json_out.empty()) {
        const auto s = json({{"frames", a.frames}, {"rows", rows}}).dump(2);
        hra::write_file(a.json_out, std::vector<std::uint8_t>(s.begin(), s.end()));
    }
    return kOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"hravatar: clothed-mesh splat avatar runtime"};
    app.require_subcommand(1);

    GenArgs gen;
    auto *g = app.add_subcommand("gen", "generate a synthetic avatar");
    g->add_option("--splats", gen.spec.splat_count, "splat count")->capture_default_str();
    g->add_option("--seed", gen.spec.seed, "generator seed")->capture_default_str();
    g->add_option("--vertices", gen.spec.vertex_budget, "mesh vertex budget")->capture_default_str();
    g->add_option("--joints", gen.spec.joint_count, "joint count (>= 17)")->capture_default_str();
    g->add_option("--sh-degree", gen.spec.sh_degree, "SH degree 0..3")->capture_default_str();
    g->add_option("--lambda", gen.spec.laplacian_lambda, "LargeSteps lambda")->capture_default_str();
    g->add_flag("--garment,!--no-garment", gen.spec.garment, "add the open torso garment");
    g->add_option("--compress", gen.compress, "splat storage")
        ->check(CLI::IsMember({"none", "standard", "aggressive"}))
        ->capture_default_str();
    g->add_option("--out", gen.out, "output .hra")->required();

    std::string validate_path;
    auto *v = app.add_subcommand("validate", "check every asset invariant");
    v->add_option("--asset", validate_path, "input .hra")->required();

    RenderArgs render;
    auto *r = app.add_subcommand("render", "render a pose sequence");
    r->add_option("--asset", render.asset, "input .hra")->required();
    r->add_option("--poses", render.poses, "pose sequence JSON");
    r->add_option("--arm-raise", render.arm_raise, "built-in arm-raise sequence with this many frames");
    r->add_option("--camera", render.camera, "camera JSON");
    r->add_option("--stereo", render.stereo, "stereo camera JSON");
    r->add_option("--config", render.config, "render config JSON");
    r->add_option("--out", render.out, "output directory")->required();
    r->add_option("--timings", render.timings, "timings JSON output");
    r->add_flag("--png", render.png, "also write PNG copies of every frame");

    BenchArgs bench;
    auto *b = app.add_subcommand("bench", "run an on/off optimization matrix");
    b->add_option("--asset", bench.asset, "input .hra")->required();
    b->add_option("--frames", bench.frames, "frames per configuration")->capture_default_str();
    b->add_option("--matrix", bench.matrix, "ablation matrix JSON")->required();
    b->add_option("--camera", bench.camera, "camera JSON");
    b->add_option("--stereo", bench.stereo, "stereo camera JSON");
    b->add_option("--json", bench.json_out, "write results as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (*g) return cmd_gen(gen);
        if (*v) return cmd_validate(validate_path);
        if (*r) return cmd_render(render);
        if (*b) return cmd_bench(bench);
    } catch (const hra::IoError &e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIo;
    } catch (const hra::FormatError &e) {
        std::fprintf(stderr, "malformed file: %s\n", e.what());
        return kIo;
    } catch (const std::ios_base::failure &e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kIo;
    } catch (const hra::ValidationError &e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kValidation;
    } catch (const hra::DimensionError &e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kValidation;
    } catch (const nlohmann::json::exception &e) {
        std::fprintf(stderr, "invalid JSON input: %s\n", e.what());
        return kValidation;
    } catch (const std::invalid_argument &e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return kValidation;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return kInternal;
    }
    return kInternal;
}
