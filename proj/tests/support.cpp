// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "support.hpp"

#include "hra/binding.hpp"
#include "hra/codec.hpp"

#include <cmath>
#include <cstdio>
#include <set>

namespace hra::test {

AvatarAsset make_asset(std::uint32_t splats, std::uint32_t vertices, std::uint64_t seed, bool garment) {
    SyntheticSpec spec;
    spec.splat_count   = splats;
    spec.vertex_budget = vertices;
    spec.seed          = seed;
    spec.garment       = garment;
    return generate_synthetic_asset(spec);
}

const AvatarAsset &small_asset() {
    static const AvatarAsset asset = make_asset(20000, 1500, 11);
    return asset;
}

const AvatarAsset &small_compressed_asset() {
    static const AvatarAsset asset = [] {
        AvatarAsset a = small_asset();
        a.splats      = compress_splats(std::get<SplatAttributes>(a.splats));
        return a;
    }();
    return asset;
}

std::vector<double> reference_mlp(const MlpWeights &net, const std::vector<float> &pose_encoding,
                                  const Vec3f *vertex) {
    std::vector<double> x(pose_encoding.begin(), pose_encoding.end());
    if (vertex)
        for (int k = 0; k < 3; ++k) x.push_back((*vertex)[k]);
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto &layer = net.layers[l];
        Eigen::MatrixXd w(layer.out_dim, layer.in_dim);
        for (std::uint32_t o = 0; o < layer.out_dim; ++o)
            for (std::uint32_t i = 0; i < layer.in_dim; ++i) w(o, i) = layer.weight[std::size_t(o) * layer.in_dim + i];
        Eigen::VectorXd in = Eigen::Map<Eigen::VectorXd>(x.data(), Eigen::Index(x.size()));
        Eigen::VectorXd y  = w * in;
        for (std::uint32_t o = 0; o < layer.out_dim; ++o) y[o] += layer.bias[o];
        if (l + 1 < net.layers.size())
            for (Eigen::Index o = 0; o < y.size(); ++o)
                y[o] = net.activation == Activation::relu ? std::max(0.0, y[o]) : std::tanh(y[o]);
        x.assign(y.data(), y.data() + y.size());
    }
    return x;
}

std::vector<std::uint32_t> oracle_survivors(const AvatarAsset &asset, const PosedGeometry &geometry,
                                            const Camera &camera, double inflate_radius, double guard_pixels,
                                            OracleOptions options) {
    const MeshLayout layout(asset);
    const auto splats = materialize_splats(asset);
    const Vec3d eye   = camera.position().cast<double>();
    const Mat3d rot   = camera.rotation.cast<double>();
    const Vec3d trans = camera.translation.cast<double>();
    const double lo_x = -guard_pixels, hi_x = double(camera.width) - 1.0 + guard_pixels;
    const double lo_y = -guard_pixels, hi_y = double(camera.height) - 1.0 + guard_pixels;

    // Signed distance to the side plane a * x + b * z = 0 (x along one image axis).
    auto side = [](double a, double b, double x, double z) { return (a * x + b * z) / std::hypot(a, b); };

    std::vector<std::uint32_t> out;
    for (std::size_t i = 0; i < splats.size(); ++i) {
        const auto t      = splats.triangle[i];
        const auto &frame = geometry.triangle_frames[t];
        if (frame.degenerate) continue;
        if (options.backface && splats.label[i]) {
            const auto comp = layout.triangle_component[t];
            if (asset.components[comp].closed) {
                const auto &tri = layout.triangles[t];
                const Vec3d p0  = geometry.vertices_world[tri[0]].cast<double>();
                const Vec3d p1  = geometry.vertices_world[tri[1]].cast<double>();
                const Vec3d p2  = geometry.vertices_world[tri[2]].cast<double>();
                const Vec3d centroid = (p0 + p1 + p2) / 3.0;
                const Vec3d n   = (p0 - p2).cross(p1 - p2).normalized();
                if (n.dot(eye - centroid) <= -1e-6) continue;
            }
        }
        if (options.frustum) {
            const Vec3f mean = splat_mean(splats.u[i], splats.v[i], splats.surface2d[i] ? 0.0f : splats.w[i], frame);
            const Vec3d p    = rot * mean.cast<double>() + trans;
            const double r   = inflate_radius;
            const double d[6] = {
                // fx x / z + cx >= lo_x, and so on for the other three edges
                side(camera.fx, camera.cx - lo_x, p.x(), p.z()),
                side(-camera.fx, hi_x - camera.cx, p.x(), p.z()),
                side(camera.fy, camera.cy - lo_y, p.y(), p.z()),
                side(-camera.fy, hi_y - camera.cy, p.y(), p.z()),
                p.z() - camera.near,
                camera.far - p.z(),
            };
            bool outside = false;
            for (double di : d) outside = outside || di < -r;
            if (outside) continue;
        }
        out.push_back(std::uint32_t(i));
    }
    return out;
}

double rotation_angle_deg(const Quatf &a, const Quatf &b) {
    const Eigen::Quaterniond qa = a.cast<double>().normalized(), qb = b.cast<double>().normalized();
    const double d = std::min(1.0, std::abs(qa.dot(qb)));
    return 2.0 * std::acos(d) * 180.0 / 3.14159265358979323846;
}

std::string check_codec_bounds(const SplatAttributes &raw, const ChunkedSplatBuffer &buffer) {
    const auto dec = decompress_all(buffer);
    const auto pos = decompress_positions(buffer);
    if (dec.size() != raw.size()) return "size mismatch";
    const bool standard = buffer.profile == CodecProfile::standard;
    const int degree    = raw.sh_degree;
    char msg[256];
    auto fail = [&](const char *what, std::size_t i, double err, double bound) {
        std::snprintf(msg, sizeof msg, "%s at stored splat %zu: error %.9g > bound %.9g", what, i, err, bound);
        return std::string(msg);
    };
    // Float rounding of the dequantized value, on top of the quantization step.
    auto slack = [](double magnitude) { return 4.0 * 1.2e-7 * std::max(1.0, magnitude); };
    for (std::size_t i = 0; i < dec.size(); ++i) {
        const std::size_t src = buffer.source_order.empty() ? i : buffer.source_order[i];
        if (i > 0 && dec.triangle[i] < dec.triangle[i - 1]) return fail("triangle order", i, 0, 0);
        if (dec.triangle[i] != raw.triangle[src]) return fail("triangle id", i, 1, 0);
        if (pos.triangle[i] != dec.triangle[i] || pos.u[i] != dec.u[i] || pos.v[i] != dec.v[i] ||
            pos.w[i] != dec.w[i] || pos.label[i] != dec.label[i])
            return fail("phase consistency", i, 1, 0);
        if (dec.label[i] != raw.label[src] || dec.surface2d[i] != raw.surface2d[src]) return fail("flags", i, 1, 0);
        if (dec.u[i] < 0.0f || dec.v[i] < 0.0f || dec.u[i] + dec.v[i] > 1.0f) return fail("barycentric", i, 1, 0);

        const auto r = chunk_ranges(buffer, i / kChunkSize);
        const double q16 = 1.0 / 65535.0;
        if (std::abs(double(dec.u[i]) - raw.u[src]) > q16) return fail("u", i, std::abs(dec.u[i] - raw.u[src]), q16);
        if (std::abs(double(dec.v[i]) - raw.v[src]) > q16) return fail("v", i, std::abs(dec.v[i] - raw.v[src]), q16);
        if (raw.surface2d[src]) {
            if (dec.w[i] != 0.0f || dec.scale[i].z() != 0.0f) return fail("surface offset", i, 1, 0);
        } else {
            const double bound = (double(r.w_max) - r.w_min) * q16 + slack(std::abs(r.w_max) + std::abs(r.w_min));
            const double err   = std::abs(double(dec.w[i]) - raw.w[src]);
            if (err > bound) return fail("w", i, err, bound);
            if (dec.w[i] < r.w_min || dec.w[i] > r.w_max) return fail("w range", i, dec.w[i], r.w_max);
        }

        const double angle = rotation_angle_deg(dec.rotation[i], raw.rotation[src]);
        if (angle > 0.4) return fail("rotation", i, angle, 0.4);
        if (std::abs(double(dec.opacity[i]) - raw.opacity[src]) > 1.0 / 255.0)
            return fail("opacity", i, std::abs(dec.opacity[i] - raw.opacity[src]), 1.0 / 255.0);

        const double scale_levels = standard ? 65535.0 : 255.0;
        const int axes            = raw.surface2d[src] ? 2 : 3;
        for (int a = 0; a < axes; ++a) {
            const double lr = std::log(double(raw.scale[src][a])), ld = std::log(double(dec.scale[i][a]));
            const double extent = double(r.log_scale_max[a]) - r.log_scale_min[a];
            const double bound  = extent / scale_levels + slack(std::abs(lr));
            if (std::abs(lr - ld) > bound) return fail("log scale", i, std::abs(lr - ld), bound);
            if (ld < r.log_scale_min[a] - slack(std::abs(lr)) || ld > r.log_scale_max[a] + slack(std::abs(lr)))
                return fail("log scale range", i, ld, r.log_scale_max[a]);
        }

        const auto sr = raw.sh_of(src);
        const auto sd = dec.sh_of(i);
        for (int c = 0; c < 3; ++c) {
            const double levels = standard ? 65535.0 : (c == 1 ? 1023.0 : 2047.0);
            const double bound  = (double(r.dc_max[c]) - r.dc_min[c]) / levels + slack(std::abs(sr[c]));
            const double err    = std::abs(double(sd[c]) - sr[c]);
            if (err > bound) return fail("sh dc", i, err, bound);
            if (sd[c] < r.dc_min[c] || sd[c] > r.dc_max[c]) return fail("sh dc range", i, sd[c], r.dc_max[c]);
        }
        for (int b = 1; b <= degree; ++b) {
            const bool kept = standard || b == 1;
            for (int k = b * b; k < (b + 1) * (b + 1); ++k)
                for (int c = 0; c < 3; ++c) {
                    const std::size_t j = std::size_t(k) * 3 + c;
                    if (!kept) {
                        if (sd[j] != 0.0f) return fail("dropped sh band", i, sd[j], 0);
                        continue;
                    }
                    const double levels = standard ? 255.0 : 63.0;
                    const double extent = double(r.band_max[b - 1]) - r.band_min[b - 1];
                    const double bound  = extent / levels + slack(std::abs(sr[j]));
                    const double err    = std::abs(double(sd[j]) - sr[j]);
                    if (err > bound) return fail("sh band", i, err, bound);
                }
        }
    }
    return {};
}

Camera half_view_camera(std::uint32_t width, std::uint32_t height) {
    return avatar_camera(width, height, Framing::upper_body);
}

GridMesh make_grid(std::uint32_t nx, std::uint32_t ny) {
    GridMesh g;
    for (std::uint32_t j = 0; j < ny; ++j)
        for (std::uint32_t i = 0; i < nx; ++i) g.vertices.emplace_back(0.01f * float(i), 0.01f * float(j), 0.0f);
    for (std::uint32_t j = 0; j + 1 < ny; ++j)
        for (std::uint32_t i = 0; i + 1 < nx; ++i) {
            const std::uint32_t a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
            g.triangles.push_back({a, b, d});
            g.triangles.push_back({a, d, c});
        }
    return g;
}

Eigen::MatrixXd dense_largesteps_matrix(std::size_t n, const std::vector<Triangle> &triangles, double lambda) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Identity(Eigen::Index(n), Eigen::Index(n));
    std::vector<std::set<std::uint32_t>> adj(n);
    for (const auto &t : triangles)
        for (int k = 0; k < 3; ++k) {
            adj[t[k]].insert(t[(k + 1) % 3]);
            adj[t[(k + 1) % 3]].insert(t[k]);
        }
    for (std::size_t i = 0; i < n; ++i) {
        a(Eigen::Index(i), Eigen::Index(i)) += lambda * double(adj[i].size());
        for (auto j : adj[i]) a(Eigen::Index(i), Eigen::Index(j)) -= lambda;
    }
    return a;
}

CullScene::CullScene(const AvatarAsset &a, const Pose &pose) : asset(&a), rig(a) {
    geo = rig.pose(pose, {});
    float scale = 0.0f;
    if (const auto *raw = std::get_if<SplatAttributes>(&a.splats)) {
        pos   = position_slice(*raw);
        scale = max_scale(*raw);
    } else {
        const auto &buf = std::get<ChunkedSplatBuffer>(a.splats);
        pos             = decompress_positions(buf);
        scale           = max_scale(buf);
    }
    for (const auto &c : a.components) closed.push_back(c.closed);
    inflate = splat_cull_radius(scale, geo.max_stretch, 3.0f);
    for (std::size_t c = 0; c < a.components.size(); ++c)
        margin.push_back(component_splat_margin(pos, rig.layout().triangle_component, c, inflate));
}

std::vector<std::uint32_t> CullScene::run(const Camera &cam, CullToggles toggles, unsigned threads,
                                          VisibilityBuffer *out) const {
    CullInputs in;
    in.positions          = &pos;
    in.geometry           = &geo;
    in.component_closed   = closed;
    in.triangle_component = rig.layout().triangle_component;
    in.component_margin   = margin;
    in.inflate_radius     = inflate;
    std::vector<std::uint32_t> survivors;
    auto vb = cull(in, cam, toggles, survivors, threads);
    if (out) *out = std::move(vb);
    return survivors;
}

} // namespace hra::test
