// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// `.hra` layout (all little-endian, see docs/hra_format.md):
//   "HRMA" u32 version, then sections: tag[4] u64 length body[length]
//   SKEL, MESH x components, OFFS, SPLT | SPLC, NETD, NETI, META
//
#include "hra/io.hpp"

#include "bytes.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace hra {

using nlohmann::json;
using detail::ByteReader;
using detail::ByteWriter;

namespace {

constexpr char kMagic[4] = {'H', 'R', 'M', 'A'};

std::size_t begin_section(ByteWriter &w, const char (&tag)[5]) {
    w.bytes(tag, 4);
    const std::size_t at = w.size();
    w.u64(0);
    return at;
}

void end_section(ByteWriter &w, std::size_t at) { w.patch_u64(at, w.size() - at - 8); }

void put_vec3(ByteWriter &w, const Vec3f &v) {
    w.f32(v.x());
    w.f32(v.y());
    w.f32(v.z());
}

Vec3f get_vec3(ByteReader &r) {
    const float x = r.f32(), y = r.f32(), z = r.f32();
    return {x, y, z};
}

void put_quat(ByteWriter &w, const Quatf &q) {
    w.f32(q.x());
    w.f32(q.y());
    w.f32(q.z());
    w.f32(q.w());
}

Quatf get_quat(ByteReader &r) {
    const float x = r.f32(), y = r.f32(), z = r.f32(), ww = r.f32();
    return Quatf(ww, x, y, z);
}

// Guards allocations: `count` elements of `size` bytes must still be available.
void need_elems(const ByteReader &r, std::uint64_t count, std::size_t size) {
    if (count > r.remaining() / size) r.need(r.remaining() + 1);
}

void write_net(ByteWriter &w, const MlpWeights &net) {
    w.u8(static_cast<std::uint8_t>(net.activation));
    w.u8(static_cast<std::uint8_t>(net.input_spec));
    w.u8(static_cast<std::uint8_t>(net.output_space));
    w.u8(0);
    w.u32(static_cast<std::uint32_t>(net.layers.size()));
    for (const auto &l : net.layers) {
        w.u32(l.in_dim);
        w.u32(l.out_dim);
        for (float x : l.weight) w.f32(x);
        for (float x : l.bias) w.f32(x);
    }
}

MlpWeights read_net(ByteReader &r) {
    MlpWeights net;
    const auto act = r.u8(), in = r.u8(), out = r.u8();
    r.u8();
    if (act > 1 || in > 1 || out > 1) throw FormatError("malformed container: unknown network enum value");
    net.activation   = static_cast<Activation>(act);
    net.input_spec   = static_cast<NetInput>(in);
    net.output_space = static_cast<NetOutput>(out);
    const auto layers = r.u32();
    need_elems(r, layers, 8);
    for (std::uint32_t i = 0; i < layers; ++i) {
        DenseLayer l;
        l.in_dim  = r.u32();
        l.out_dim = r.u32();
        const std::uint64_t nw = std::uint64_t(l.in_dim) * l.out_dim;
        need_elems(r, nw + l.out_dim, 4);
        l.weight.resize(nw);
        for (auto &x : l.weight) x = r.f32();
        l.bias.resize(l.out_dim);
        for (auto &x : l.bias) x = r.f32();
        net.layers.push_back(std::move(l));
    }
    return net;
}

void write_raw_splats(ByteWriter &w, const SplatAttributes &s) {
    const auto n = static_cast<std::uint32_t>(s.size());
    w.u32(n);
    w.u8(static_cast<std::uint8_t>(s.sh_degree));
    w.u8(0);
    w.u16(0);
    for (auto t : s.triangle) w.u32(t);
    for (float x : s.u) w.f32(x);
    for (float x : s.v) w.f32(x);
    for (float x : s.w) w.f32(x);
    for (const auto &q : s.rotation) put_quat(w, q);
    for (const auto &sc : s.scale) put_vec3(w, sc);
    for (float x : s.opacity) w.f32(x);
    for (float x : s.sh) w.f32(x);
    w.bytes(s.label.data(), s.label.size());
    w.bytes(s.surface2d.data(), s.surface2d.size());
}

SplatAttributes read_raw_splats(ByteReader &r) {
    SplatAttributes s;
    const auto n = r.u32();
    s.sh_degree  = r.u8();
    r.u8();
    r.u16();
    if (s.sh_degree > 3) throw FormatError("malformed container: SH degree " + std::to_string(s.sh_degree));
    need_elems(r, n, 4 * (3 + 4 + 3 + 1 + 1) + 2);
    s.resize(n);
    for (auto &t : s.triangle) t = r.u32();
    for (auto &x : s.u) x = r.f32();
    for (auto &x : s.v) x = r.f32();
    for (auto &x : s.w) x = r.f32();
    for (auto &q : s.rotation) q = get_quat(r);
    for (auto &sc : s.scale) sc = get_vec3(r);
    for (auto &x : s.opacity) x = r.f32();
    need_elems(r, s.sh.size(), 4);
    for (auto &x : s.sh) x = r.f32();
    r.bytes(s.label.data(), n);
    r.bytes(s.surface2d.data(), n);
    return s;
}

} // namespace

std::vector<std::uint8_t> save_asset_bytes(const AvatarAsset &asset) {
    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.bytes(kMagic, 4);
    w.u32(kContainerVersion);

    auto at = begin_section(w, "SKEL");
    const auto &skel = asset.skeleton;
    w.u32(static_cast<std::uint32_t>(skel.size()));
    for (const auto &j : skel.joints) {
        w.u16(static_cast<std::uint16_t>(j.name.size()));
        w.bytes(j.name.data(), j.name.size());
        w.i32(j.parent);
        put_quat(w, j.rest_local.rotation);
        put_vec3(w, j.rest_local.translation);
    }
    for (const auto &m : skel.inverse_bind)
        for (int row = 0; row < 4; ++row)
            for (int col = 0; col < 4; ++col) w.f32(m(row, col));
    end_section(w, at);

    for (const auto &c : asset.components) {
        at = begin_section(w, "MESH");
        w.u8(static_cast<std::uint8_t>(c.kind));
        w.u8(c.closed ? 1 : 0);
        w.u16(0);
        w.u32(static_cast<std::uint32_t>(c.vertices_template.size()));
        w.u32(static_cast<std::uint32_t>(c.triangles.size()));
        for (const auto &v : c.vertices_template) put_vec3(w, v);
        for (const auto &t : c.triangles)
            for (auto i : t) w.u32(i);
        for (const auto &sw : c.skin_weights)
            for (const auto &inf : sw) {
                w.u16(inf.joint);
                w.f32(inf.weight);
            }
        put_vec3(w, c.bounding_sphere_rest.center);
        w.f32(c.bounding_sphere_rest.radius);
        end_section(w, at);
    }

    at = begin_section(w, "OFFS");
    w.u32(static_cast<std::uint32_t>(asset.static_offsets.size()));
    for (const auto &o : asset.static_offsets) put_vec3(w, o);
    end_section(w, at);

    if (const auto *raw = std::get_if<SplatAttributes>(&asset.splats)) {
        at = begin_section(w, "SPLT");
        write_raw_splats(w, *raw);
    } else {
        const auto &buf = std::get<ChunkedSplatBuffer>(asset.splats);
        at              = begin_section(w, "SPLC");
        w.u8(static_cast<std::uint8_t>(buf.profile));
        w.u8(static_cast<std::uint8_t>(buf.sh_degree));
        w.u16(0);
        w.u32(buf.count);
        w.u32(static_cast<std::uint32_t>(buf.chunk_count()));
        w.u32(static_cast<std::uint32_t>(buf.payload.size()));
        for (auto o : buf.chunk_offsets) w.u32(o);
        w.bytes(buf.payload.data(), buf.payload.size());
    }
    end_section(w, at);

    at = begin_section(w, "NETD");
    write_net(w, asset.deform_net);
    end_section(w, at);
    at = begin_section(w, "NETI");
    write_net(w, asset.illum_net);
    end_section(w, at);

    at = begin_section(w, "META");
    w.f32(asset.laplacian_lambda);
    w.u64(asset.seed);
    w.u8(static_cast<std::uint8_t>(asset.sh_degree()));
    w.u8(0);
    w.u16(0);
    end_section(w, at);
    return out;
}

AvatarAsset load_asset_bytes(const std::vector<std::uint8_t> &bytes) {
    ByteReader r(bytes.data(), bytes.size(), "header");
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("malformed container: bad magic");
    const auto version = r.u32();
    if (version != kContainerVersion) throw FormatError("unsupported container version " + std::to_string(version));

    AvatarAsset asset;
    asset.version = version;
    enum Stage { skel, mesh, offs, splats, netd, neti, meta, done } stage = skel;
    int meta_degree = -1;
    while (!r.done()) {
        char tag_bytes[4];
        r.bytes(tag_bytes, 4);
        const std::string tag(tag_bytes, 4);
        const std::uint64_t len = r.u64();
        if (len > r.remaining()) throw FormatError("malformed container: truncated " + tag + " section");
        ByteReader s(r.take(std::size_t(len)), std::size_t(len), tag + " section");

        if (tag == "SKEL" && stage == skel) {
            const auto n = s.u32();
            need_elems(s, n, 2 + 4 + 28 + 64);
            for (std::uint32_t i = 0; i < n; ++i) {
                Joint j;
                const auto name_len = s.u16();
                j.name.resize(name_len);
                s.bytes(j.name.data(), name_len);
                j.parent                 = s.i32();
                j.rest_local.rotation    = get_quat(s);
                j.rest_local.translation = get_vec3(s);
                asset.skeleton.joints.push_back(std::move(j));
            }
            for (std::uint32_t i = 0; i < n; ++i) {
                Mat4f m;
                for (int row = 0; row < 4; ++row)
                    for (int col = 0; col < 4; ++col) m(row, col) = s.f32();
                asset.skeleton.inverse_bind.push_back(m);
            }
            stage = mesh;
        } else if (tag == "MESH" && stage == mesh) {
            MeshComponent c;
            const auto kind = s.u8();
            if (kind > 2) throw FormatError("malformed container: unknown component kind");
            c.kind   = static_cast<ComponentKind>(kind);
            c.closed = s.u8() != 0;
            s.u16();
            const auto nv = s.u32(), nt = s.u32();
            need_elems(s, std::uint64_t(nv) * (12 + 24) + std::uint64_t(nt) * 12, 1);
            c.vertices_template.resize(nv);
            for (auto &v : c.vertices_template) v = get_vec3(s);
            c.triangles.resize(nt);
            for (auto &t : c.triangles)
                for (auto &i : t) i = s.u32();
            c.skin_weights.resize(nv);
            for (auto &sw : c.skin_weights)
                for (auto &inf : sw) {
                    inf.joint  = s.u16();
                    inf.weight = s.f32();
                }
            c.bounding_sphere_rest.center = get_vec3(s);
            c.bounding_sphere_rest.radius = s.f32();
            asset.components.push_back(std::move(c));
        } else if (tag == "OFFS" && (stage == mesh || stage == offs)) {
            const auto n = s.u32();
            need_elems(s, n, 12);
            asset.static_offsets.resize(n);
            for (auto &o : asset.static_offsets) o = get_vec3(s);
            stage = splats;
        } else if (tag == "SPLT" && stage == splats) {
            asset.splats = read_raw_splats(s);
            stage        = netd;
        } else if (tag == "SPLC" && stage == splats) {
            ChunkedSplatBuffer buf;
            const auto profile = s.u8();
            if (profile > 1) throw FormatError("malformed container: unknown codec profile");
            buf.profile   = static_cast<CodecProfile>(profile);
            buf.sh_degree = s.u8();
            s.u16();
            buf.count              = s.u32();
            const auto chunks      = s.u32();
            const auto payload_len = s.u32();
            need_elems(s, std::uint64_t(chunks) * 4 + payload_len, 1);
            buf.chunk_offsets.resize(chunks);
            for (auto &o : buf.chunk_offsets) o = s.u32();
            buf.payload.resize(payload_len);
            s.bytes(buf.payload.data(), payload_len);
            check_buffer(buf);
            asset.splats = std::move(buf);
            stage        = netd;
        } else if (tag == "NETD" && stage == netd) {
            asset.deform_net = read_net(s);
            stage            = neti;
        } else if (tag == "NETI" && stage == neti) {
            asset.illum_net = read_net(s);
            stage           = meta;
        } else if (tag == "META" && stage == meta) {
            asset.laplacian_lambda = s.f32();
            asset.seed             = s.u64();
            meta_degree            = s.u8();
            s.u8();
            s.u16();
            stage = done;
        } else {
            throw FormatError("malformed container: unexpected section '" + tag + "'");
        }
        if (!s.done()) throw FormatError("malformed container: trailing bytes in " + tag + " section");
    }
    if (stage != done) throw FormatError("malformed container: missing sections");
    if (meta_degree != asset.sh_degree()) throw FormatError("malformed container: SH degree mismatch in META");

    const auto report = validate_asset(asset);
    if (!report.ok()) {
        const auto &v = report.violations.front();
        throw ValidationError("invariant violation [" + v.rule + "] at " + v.record + " " + std::to_string(v.index) +
                              (v.detail.empty() ? "" : ": " + v.detail));
    }
    return asset;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (f.bad()) throw IoError("read failed: " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path &path, const std::vector<std::uint8_t> &bytes) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

void save_asset(const AvatarAsset &asset, const std::filesystem::path &path) {
    write_file(path, save_asset_bytes(asset));
}

AvatarAsset load_asset(const std::filesystem::path &path) { return load_asset_bytes(read_file(path)); }

// --- JSON --------------------------------------------------------------------

json to_json(const Camera &c) {
    json m = json::array();
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) m.push_back(c.rotation(row, col));
        m.push_back(c.translation[row]);
    }
    for (float x : {0.0f, 0.0f, 0.0f, 1.0f}) m.push_back(x);
    return {{"fx", c.fx},       {"fy", c.fy},         {"cx", c.cx},
            {"cy", c.cy},       {"width", c.width},   {"height", c.height},
            {"world_to_view", m}, {"near", c.near},   {"far", c.far}};
}

Camera camera_from_json(const json &j) {
    Camera c;
    c.fx     = j.at("fx").get<float>();
    c.fy     = j.at("fy").get<float>();
    c.cx     = j.at("cx").get<float>();
    c.cy     = j.at("cy").get<float>();
    c.width  = j.at("width").get<std::uint32_t>();
    c.height = j.at("height").get<std::uint32_t>();
    c.near   = j.value("near", c.near);
    c.far    = j.value("far", c.far);
    const auto &m = j.at("world_to_view");
    if (!m.is_array() || m.size() != 16) throw std::invalid_argument("camera: world_to_view needs 16 numbers");
    for (int row = 0; row < 3; ++row) {
        for (int col = 0; col < 3; ++col) c.rotation(row, col) = m[row * 4 + col].get<float>();
        c.translation[row] = m[row * 4 + 3].get<float>();
    }
    if (std::abs(m[12].get<double>()) + std::abs(m[13].get<double>()) + std::abs(m[14].get<double>()) > 1e-6 ||
        std::abs(m[15].get<double>() - 1.0) > 1e-6)
        throw std::invalid_argument("camera: world_to_view last row must be 0 0 0 1");
    c.check();
    return c;
}

StereoCamera stereo_from_json(const json &j) {
    if (j.contains("left") && j.contains("right"))
        return {camera_from_json(j.at("left")), camera_from_json(j.at("right"))};
    if (j.contains("center")) return StereoCamera::from_center(camera_from_json(j.at("center")), j.value("baseline", 0.064f));
    throw std::invalid_argument("stereo: expected {left, right} or {center, baseline}");
}

json to_json(const StereoCamera &s) { return {{"left", to_json(s.left)}, {"right", to_json(s.right)}}; }

json to_json(const PoseSequence &seq) {
    json frames = json::array();
    for (const auto &p : seq.frames) {
        json rot = json::array();
        for (const auto &q : p.joint_rotations) rot.push_back({q.x(), q.y(), q.z(), q.w()});
        frames.push_back({{"root_t", {p.root_translation.x(), p.root_translation.y(), p.root_translation.z()}},
                          {"rotations", rot}});
    }
    return {{"fps", seq.fps}, {"frames", frames}};
}

PoseSequence pose_sequence_from_json(const json &j, std::size_t joint_count) {
    PoseSequence seq;
    seq.fps = j.value("fps", 30.0);
    const auto &frames = j.at("frames");
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto &fr = frames[f];
        Pose p;
        if (fr.contains("root_t")) {
            const auto &t = fr.at("root_t");
            p.root_translation = Vec3f(t.at(0).get<float>(), t.at(1).get<float>(), t.at(2).get<float>());
        }
        const auto &rot = fr.at("rotations");
        if (rot.size() != joint_count)
            throw DimensionError("pose frame " + std::to_string(f) + " has " + std::to_string(rot.size()) +
                                 " rotations, skeleton has " + std::to_string(joint_count));
        for (std::size_t k = 0; k < rot.size(); ++k) {
            const auto &q = rot[k];
            Eigen::Vector4d v(q.at(0).get<double>(), q.at(1).get<double>(), q.at(2).get<double>(),
                              q.at(3).get<double>());
            // Text round-trips lose a few ulps; anything further off is a data error.
            if (std::abs(v.norm() - 1.0) > 1e-3)
                throw ValidationError("pose frame " + std::to_string(f) + " joint " + std::to_string(k) +
                                      ": rotation is not a unit quaternion");
            v.normalize();
            p.joint_rotations.emplace_back(float(v[3]), float(v[0]), float(v[1]), float(v[2]));
        }
        seq.frames.push_back(std::move(p));
    }
    return seq;
}

namespace {

void flatten(const json &j, const std::string &prefix, std::map<std::string, json> &out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it->is_object())
            flatten(*it, key, out);
        else
            out[key] = *it;
    }
}

} // namespace

RenderConfig config_from_json(const json &j, RenderConfig c) {
    if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
    std::map<std::string, json> flat;
    flatten(j, "", flat);
    for (const auto &[key, v] : flat) {
        if (key == "cull.mesh") c.cull.mesh = v.get<bool>();
        else if (key == "cull.triangle") c.cull.triangle = v.get<bool>();
        else if (key == "cull.splat") c.cull.splat = v.get<bool>();
        else if (key == "codec.on_demand") c.codec_on_demand = v.get<bool>();
        else if (key == "sort.mode") {
            const auto m = v.get<std::string>();
            if (m == "quantized") c.sort_mode = SortMode::quantized;
            else if (m == "float_reference") c.sort_mode = SortMode::float_reference;
            else throw std::invalid_argument("config: unknown sort.mode '" + m + "'");
        } else if (key == "stereo.shared_sort") c.stereo_shared_sort = v.get<bool>();
        else if (key == "deform.enabled") c.deform_enabled = v.get<bool>();
        else if (key == "illum.enabled") c.illum_enabled = v.get<bool>();
        else if (key == "tile_size") c.tile_size = v.get<std::uint32_t>();
        else if (key == "radius_cutoff") c.radius_cutoff = v.get<float>();
        else if (key == "threads") c.threads = v.get<unsigned>();
        else if (key == "name") continue; // label used by ablation matrices
        else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (c.tile_size == 0) throw std::invalid_argument("config: tile_size must be positive");
    if (!(c.radius_cutoff > 0.0f)) throw std::invalid_argument("config: radius_cutoff must be positive");
    return c;
}

json to_json(const RenderConfig &c) {
    return {{"cull", {{"mesh", c.cull.mesh}, {"triangle", c.cull.triangle}, {"splat", c.cull.splat}}},
            {"codec", {{"on_demand", c.codec_on_demand}}},
            {"sort", {{"mode", c.sort_mode == SortMode::quantized ? "quantized" : "float_reference"}}},
            {"stereo", {{"shared_sort", c.stereo_shared_sort}}},
            {"deform", {{"enabled", c.deform_enabled}}},
            {"illum", {{"enabled", c.illum_enabled}}},
            {"tile_size", c.tile_size},
            {"radius_cutoff", c.radius_cutoff},
            {"threads", c.threads}};
}

json to_json(const PassTimings &t) {
    json passes = json::object();
    for (std::size_t p = 0; p < kPassCount; ++p) passes[to_string(static_cast<Pass>(p))] = t.ms[p];
    return {{"passes_ms", passes},
            {"tiers",
             {{"total", t.tiers.total}, {"mesh", t.tiers.mesh}, {"triangle", t.tiers.triangle}, {"splat", t.tiers.splat}}},
            {"splat_count", t.splat_count},
            {"decoded_full", t.decoded_full},
            {"stereo", t.stereo},
            {"shared_sort_refused", t.shared_sort_refused}};
}

json to_json(const SequenceReport &report) {
    json agg = json::object();
    for (std::size_t p = 0; p < kPassCount; ++p) {
        const auto &s = report.aggregate[p];
        agg[to_string(static_cast<Pass>(p))] = {{"mean", s.mean}, {"p50", s.p50}, {"p99", s.p99}};
    }
    json frames = json::array();
    for (const auto &f : report.frames) frames.push_back(to_json(f));
    return {{"format", "hravatar-timings"},
            {"version", 1},
            {"frame_count", report.frames.size()},
            {"warmup_frames", report.warmup_frames},
            {"aggregate_ms", agg},
            {"frames", frames}};
}

json read_json(const std::filesystem::path &path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error &e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
}

} // namespace hra
