// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic capsule humanoid. Everything is drawn from one seeded stream so
// the same spec always produces byte-identical assets.
//
#include "hra/asset.hpp"
#include "hra/binding.hpp"

#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hra {
namespace {

constexpr double kPi = std::numbers::pi;

struct JointDef {
    const char *name;
    int parent;
    Vec3f position; // rest, world space
};

const JointDef kJoints[kHumanoidJoints] = {
    {"pelvis", -1, {0.0f, 0.95f, 0.0f}},       {"spine", 0, {0.0f, 1.10f, 0.0f}},
    {"chest", 1, {0.0f, 1.30f, 0.0f}},         {"neck", 2, {0.0f, 1.52f, 0.0f}},
    {"head", 3, {0.0f, 1.62f, 0.0f}},          {"l_shoulder", 2, {0.20f, 1.45f, 0.0f}},
    {"l_elbow", 5, {0.48f, 1.45f, 0.0f}},      {"l_wrist", 6, {0.73f, 1.45f, 0.0f}},
    {"r_shoulder", 2, {-0.20f, 1.45f, 0.0f}},  {"r_elbow", 8, {-0.48f, 1.45f, 0.0f}},
    {"r_wrist", 9, {-0.73f, 1.45f, 0.0f}},     {"l_hip", 0, {0.10f, 0.90f, 0.0f}},
    {"l_knee", 11, {0.10f, 0.48f, 0.0f}},      {"l_ankle", 12, {0.10f, 0.08f, 0.0f}},
    {"r_hip", 0, {-0.10f, 0.90f, 0.0f}},       {"r_knee", 14, {-0.10f, 0.48f, 0.0f}},
    {"r_ankle", 15, {-0.10f, 0.08f, 0.0f}},
};

struct CapsuleDef {
    int owner;
    Vec3f a, b;
    float radius;
    int continuation; // joint blended in near b, or -1
    bool blend_parent;
    Vec3f color;
};

const Vec3f kSkin{0.86f, 0.67f, 0.54f};
const Vec3f kPants{0.17f, 0.20f, 0.30f};
const Vec3f kShoe{0.12f, 0.10f, 0.09f};
const Vec3f kShirt{0.78f, 0.22f, 0.20f};
const Vec3f kShirtStripe{0.92f, 0.86f, 0.78f};
const Vec3f kHair{0.22f, 0.14f, 0.08f};

const CapsuleDef kCapsules[kHumanoidJoints] = {
    {0, {0.0f, 0.88f, 0.0f}, {0.0f, 1.04f, 0.0f}, 0.150f, 1, false, kPants},
    {1, {0.0f, 1.10f, 0.0f}, {0.0f, 1.24f, 0.0f}, 0.145f, 2, true, kSkin},
    {2, {0.0f, 1.30f, 0.0f}, {0.0f, 1.42f, 0.0f}, 0.155f, 3, true, kSkin},
    {3, {0.0f, 1.50f, 0.0f}, {0.0f, 1.60f, 0.0f}, 0.055f, 4, true, kSkin},
    {4, {0.0f, 1.68f, 0.0f}, {0.0f, 1.76f, 0.0f}, 0.100f, -1, true, kSkin},
    {5, {0.20f, 1.45f, 0.0f}, {0.46f, 1.45f, 0.0f}, 0.055f, 6, true, kSkin},
    {6, {0.49f, 1.45f, 0.0f}, {0.71f, 1.45f, 0.0f}, 0.045f, 7, true, kSkin},
    {7, {0.75f, 1.45f, 0.0f}, {0.86f, 1.45f, 0.0f}, 0.035f, -1, true, kSkin},
    {8, {-0.20f, 1.45f, 0.0f}, {-0.46f, 1.45f, 0.0f}, 0.055f, 9, true, kSkin},
    {9, {-0.49f, 1.45f, 0.0f}, {-0.71f, 1.45f, 0.0f}, 0.045f, 10, true, kSkin},
    {10, {-0.75f, 1.45f, 0.0f}, {-0.86f, 1.45f, 0.0f}, 0.035f, -1, true, kSkin},
    {11, {0.10f, 0.86f, 0.0f}, {0.10f, 0.51f, 0.0f}, 0.075f, 12, true, kPants},
    {12, {0.10f, 0.46f, 0.0f}, {0.10f, 0.12f, 0.0f}, 0.055f, 13, true, kPants},
    {13, {0.10f, 0.05f, 0.0f}, {0.10f, 0.05f, 0.13f}, 0.045f, -1, true, kShoe},
    {14, {-0.10f, 0.86f, 0.0f}, {-0.10f, 0.51f, 0.0f}, 0.075f, 15, true, kPants},
    {15, {-0.10f, 0.46f, 0.0f}, {-0.10f, 0.12f, 0.0f}, 0.055f, 16, true, kPants},
    {16, {-0.10f, 0.05f, 0.0f}, {-0.10f, 0.05f, 0.13f}, 0.045f, -1, true, kShoe},
};

// Open cylinder around the torso.
constexpr float kGarmentRadius = 0.185f;
constexpr float kGarmentBottom = 0.86f;
constexpr float kGarmentTop    = 1.44f;
// Spherical cap over the head.
const Vec3f kHairCenter{0.0f, 1.76f, 0.0f};
constexpr float kHairRadius = 0.112f;
constexpr double kHairMaxPolar = 105.0 * kPi / 180.0;

struct Builder {
    MeshComponent mesh;
    std::vector<Vec3f> triangle_color;

    std::uint32_t add_vertex(const Vec3f &p, const SkinWeights &w) {
        mesh.vertices_template.push_back(p);
        mesh.skin_weights.push_back(w);
        return static_cast<std::uint32_t>(mesh.vertices_template.size() - 1);
    }
    void add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, const Vec3f &color) {
        mesh.triangles.push_back({a, b, c});
        triangle_color.push_back(color);
    }
    // Stitches ring `lo` to ring `hi`, both with m vertices, `hi` further along +axis.
    void stitch(std::uint32_t lo, std::uint32_t hi, int m, const Vec3f &color) {
        for (int j = 0; j < m; ++j) {
            const std::uint32_t j1 = std::uint32_t((j + 1) % m);
            add_triangle(lo + j, lo + j1, hi + j1, color);
            add_triangle(lo + j, hi + j1, hi + j, color);
        }
    }
};

SkinWeights single(std::uint16_t joint) {
    SkinWeights w{};
    w[0] = {joint, 1.0f};
    return w;
}

void orthonormal(const Vec3f &d, Vec3f &p, Vec3f &q) {
    const Vec3f helper = std::abs(d.y()) < 0.9f ? Vec3f::UnitY() : Vec3f::UnitX();
    p = helper.cross(d).normalized();
    q = d.cross(p); // p x q = d
}

struct CapsuleRes {
    int m, k, c;
    std::size_t vertices() const { return 2 + std::size_t(m) * (2 * k + c); }
};

CapsuleRes capsule_res(const CapsuleDef &cap, double h) {
    const double len = (cap.b - cap.a).norm();
    CapsuleRes r;
    r.m = std::max(6, int(std::lround(2.0 * kPi * cap.radius / h)));
    r.k = std::max(2, int(std::lround(0.5 * kPi * cap.radius / h)));
    r.c = std::max(0, int(std::lround(len / h)) - 1);
    return r;
}

int garment_rings(double h) { return std::max(2, int(std::lround((kGarmentTop - kGarmentBottom) / h)) + 1); }
int garment_segments(double h) { return std::max(6, int(std::lround(2.0 * kPi * kGarmentRadius / h))); }
int hair_rings(double h) { return std::max(2, int(std::lround(kHairMaxPolar * kHairRadius / h))); }
int hair_segments(double h) { return std::max(6, int(std::lround(2.0 * kPi * kHairRadius / h))); }

std::size_t total_vertices(double h, bool garment) {
    std::size_t n = 0;
    for (const auto &cap : kCapsules) n += capsule_res(cap, h).vertices();
    if (garment) n += std::size_t(garment_rings(h)) * garment_segments(h);
    n += 1 + std::size_t(hair_rings(h)) * hair_segments(h);
    return n;
}

double surface_area(bool garment) {
    double a = 0.0;
    for (const auto &cap : kCapsules) {
        const double len = (cap.b - cap.a).norm();
        a += 2.0 * kPi * cap.radius * len + 4.0 * kPi * cap.radius * cap.radius;
    }
    if (garment) a += 2.0 * kPi * kGarmentRadius * (kGarmentTop - kGarmentBottom);
    a += 2.0 * kPi * kHairRadius * kHairRadius * (1.0 - std::cos(kHairMaxPolar));
    return a;
}

void build_capsule(Builder &b, const CapsuleDef &cap, const CapsuleRes &res) {
    const Vec3f axis = cap.b - cap.a;
    const float len  = axis.norm();
    const Vec3f d    = axis / len;
    Vec3f p, q;
    orthonormal(d, p, q);
    const int parent = kJoints[cap.owner].parent;

    auto weights = [&](const Vec3f &x) {
        const float s  = (x - cap.a).dot(d) / len;
        const float wc = cap.continuation >= 0 ? std::clamp((s - 0.75f) / 0.5f, 0.0f, 0.5f) : 0.0f;
        const float wp = cap.blend_parent && parent >= 0 ? std::clamp((0.25f - s) / 0.5f, 0.0f, 0.5f) : 0.0f;
        SkinWeights w{};
        w[0] = {std::uint16_t(cap.owner), 1.0f - wc - wp};
        w[1] = {std::uint16_t(cap.continuation >= 0 ? cap.continuation : 0), wc};
        w[2] = {std::uint16_t(parent >= 0 ? parent : 0), wp};
        return w;
    };

    // Ring centres as (offset along axis from a, ring radius), south to north.
    std::vector<std::pair<float, float>> rings;
    for (int i = 1; i <= res.k; ++i) {
        const double t = -0.5 * kPi + i * 0.5 * kPi / res.k;
        rings.emplace_back(float(cap.radius * std::sin(t)), float(cap.radius * std::cos(t)));
    }
    for (int j = 1; j <= res.c; ++j) rings.emplace_back(len * float(j) / float(res.c + 1), cap.radius);
    for (int i = 0; i < res.k; ++i) {
        const double t = i * 0.5 * kPi / res.k;
        rings.emplace_back(float(len + cap.radius * std::sin(t)), float(cap.radius * std::cos(t)));
    }

    const Vec3f south_p = cap.a - cap.radius * d;
    const Vec3f north_p = cap.b + cap.radius * d;
    const auto south    = b.add_vertex(south_p, weights(south_p));
    std::vector<std::uint32_t> starts;
    for (const auto &[off, rho] : rings) {
        starts.push_back(static_cast<std::uint32_t>(b.mesh.vertices_template.size()));
        for (int j = 0; j < res.m; ++j) {
            const double phi = 2.0 * kPi * j / res.m;
            const Vec3f x    = cap.a + off * d + rho * (float(std::cos(phi)) * p + float(std::sin(phi)) * q);
            b.add_vertex(x, weights(x));
        }
    }
    const auto north = b.add_vertex(north_p, weights(north_p));

    const int m = res.m;
    for (int j = 0; j < m; ++j) b.add_triangle(south, starts.front() + (j + 1) % m, starts.front() + j, cap.color);
    for (std::size_t r = 0; r + 1 < starts.size(); ++r) b.stitch(starts[r], starts[r + 1], m, cap.color);
    for (int j = 0; j < m; ++j) b.add_triangle(north, starts.back() + j, starts.back() + (j + 1) % m, cap.color);
}

// Linear blend pelvis -> spine -> chest by height.
SkinWeights torso_weights(float y) {
    const float h0 = kJoints[0].position.y(), h1 = kJoints[1].position.y(), h2 = kJoints[2].position.y();
    if (y <= h0) return single(0);
    if (y >= h2) return single(2);
    SkinWeights w{};
    if (y < h1) {
        const float t = (y - h0) / (h1 - h0);
        w[0] = {0, 1.0f - t};
        w[1] = {1, t};
    } else {
        const float t = (y - h1) / (h2 - h1);
        w[0] = {1, 1.0f - t};
        w[1] = {2, t};
    }
    return w;
}

void build_garment(Builder &b, double h) {
    const int rings = garment_rings(h), m = garment_segments(h);
    std::vector<std::uint32_t> starts;
    for (int r = 0; r < rings; ++r) {
        const float y = kGarmentBottom + (kGarmentTop - kGarmentBottom) * float(r) / float(rings - 1);
        starts.push_back(static_cast<std::uint32_t>(b.mesh.vertices_template.size()));
        for (int j = 0; j < m; ++j) {
            const double phi = 2.0 * kPi * j / m;
            // phi runs counter-clockwise seen from +y, so stitching faces outward
            const Vec3f x{float(kGarmentRadius * std::sin(phi)), y, float(kGarmentRadius * std::cos(phi))};
            b.add_vertex(x, torso_weights(y));
        }
    }
    for (int r = 0; r + 1 < rings; ++r) {
        const float y     = kGarmentBottom + (kGarmentTop - kGarmentBottom) * (float(r) + 0.5f) / float(rings - 1);
        const bool stripe = int(std::floor((y - kGarmentBottom) / 0.06f)) % 3 == 2;
        b.stitch(starts[r], starts[r + 1], m, stripe ? kShirtStripe : kShirt);
    }
}

void build_hair(Builder &b, double h, std::uint16_t head) {
    const int rings = hair_rings(h), m = hair_segments(h);
    const auto top  = b.add_vertex(kHairCenter + kHairRadius * Vec3f::UnitY(), single(head));
    std::vector<std::uint32_t> starts;
    for (int r = 1; r <= rings; ++r) {
        const double theta = kHairMaxPolar * r / rings;
        starts.push_back(static_cast<std::uint32_t>(b.mesh.vertices_template.size()));
        for (int j = 0; j < m; ++j) {
            const double phi = 2.0 * kPi * j / m;
            const Vec3f x    = kHairCenter + kHairRadius * Vec3f(float(std::sin(theta) * std::sin(phi)),
                                                                 float(std::cos(theta)),
                                                                 float(std::sin(theta) * std::cos(phi)));
            b.add_vertex(x, single(head));
        }
    }
    // rings descend from the pole, so the lower ring is the later one
    for (int j = 0; j < m; ++j) b.add_triangle(top, starts.front() + j, starts.front() + (j + 1) % m, kHair);
    for (std::size_t r = 0; r + 1 < starts.size(); ++r) b.stitch(starts[r + 1], starts[r], m, kHair);
}

BoundingSphere bounding_sphere(const std::vector<Vec3f> &verts) {
    Vec3d c = Vec3d::Zero();
    for (const auto &v : verts) c += v.cast<double>();
    c /= double(verts.size());
    double r = 0.0;
    for (const auto &v : verts) r = std::max(r, (v.cast<double>() - c).norm());
    return {c.cast<float>(), float(r * (1.0 + 1e-6))};
}

MlpWeights make_net(detail::Rng &rng, std::vector<std::uint32_t> dims, float last_scale, float last_bias,
                    NetOutput out) {
    MlpWeights net;
    net.activation   = Activation::relu;
    net.input_spec   = NetInput::pose_and_canonical_vertex;
    net.output_space = out;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.in_dim  = dims[l];
        layer.out_dim = dims[l + 1];
        const bool last = l + 2 == dims.size();
        const double scale = last ? last_scale / std::sqrt(double(dims[l])) : std::sqrt(2.0 / dims[l]);
        layer.weight.resize(std::size_t(layer.in_dim) * layer.out_dim);
        for (auto &x : layer.weight) x = float(rng.normal() * scale);
        layer.bias.assign(layer.out_dim, last ? last_bias : 0.0f);
        net.layers.push_back(std::move(layer));
    }
    return net;
}

Quatf random_rotation(detail::Rng &rng) {
    Eigen::Vector4d v;
    do {
        v = {rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    } while (v.norm() < 1e-6);
    v.normalize();
    return Quatf(float(v[0]), float(v[1]), float(v[2]), float(v[3])).normalized();
}

} // namespace

AvatarAsset generate_synthetic_asset(const SyntheticSpec &spec) {
    if (spec.joint_count < kHumanoidJoints)
        throw DimensionError("synthetic humanoid needs at least " + std::to_string(kHumanoidJoints) + " joints");
    if (spec.sh_degree < 0 || spec.sh_degree > 3) throw DimensionError("sh_degree must be in 0..3");
    if (spec.splat_count == 0) throw DimensionError("splat_count must be positive");

    detail::Rng rng(spec.seed);
    AvatarAsset asset;
    asset.seed             = spec.seed;
    asset.laplacian_lambda = spec.laplacian_lambda;

    // Skeleton: rest rotations are identity, so rest globals are pure translations.
    std::vector<Vec3f> rest_world;
    for (const auto &def : kJoints) {
        Joint j;
        j.name                   = def.name;
        j.parent                 = def.parent;
        j.rest_local.translation = def.parent < 0 ? def.position : Vec3f(def.position - kJoints[def.parent].position);
        asset.skeleton.joints.push_back(j);
        rest_world.push_back(def.position);
    }
    for (std::uint32_t extra = kHumanoidJoints; extra < spec.joint_count; ++extra) {
        Joint j;
        j.name                   = "extra_" + std::to_string(extra - kHumanoidJoints);
        j.parent                 = extra == kHumanoidJoints ? 4 : int(extra - 1);
        j.rest_local.translation = Vec3f(0.0f, 0.02f, 0.0f);
        rest_world.push_back(rest_world[j.parent] + j.rest_local.translation);
        asset.skeleton.joints.push_back(j);
    }
    for (const auto &p : rest_world) {
        Mat4f inv             = Mat4f::Identity();
        inv.block<3, 1>(0, 3) = -p;
        asset.skeleton.inverse_bind.push_back(inv);
    }

    // Mesh resolution from the vertex budget.
    double h = std::sqrt(surface_area(spec.garment) / double(spec.vertex_budget));
    if (total_vertices(1e9, spec.garment) > spec.vertex_budget)
        throw DimensionError("vertex_budget " + std::to_string(spec.vertex_budget) +
                             " is too small for the capsule humanoid");
    while (total_vertices(h, spec.garment) > spec.vertex_budget) h *= 1.02;

    std::vector<std::vector<Vec3f>> colors;
    {
        Builder body;
        body.mesh.kind   = ComponentKind::body;
        body.mesh.closed = true;
        for (const auto &cap : kCapsules) build_capsule(body, cap, capsule_res(cap, h));
        asset.components.push_back(std::move(body.mesh));
        colors.push_back(std::move(body.triangle_color));
    }
    if (spec.garment) {
        Builder g;
        g.mesh.kind   = ComponentKind::garment;
        g.mesh.closed = false;
        build_garment(g, h);
        asset.components.push_back(std::move(g.mesh));
        colors.push_back(std::move(g.triangle_color));
    }
    {
        Builder hair;
        hair.mesh.kind   = ComponentKind::hair;
        hair.mesh.closed = false;
        build_hair(hair, h, 4);
        asset.components.push_back(std::move(hair.mesh));
        colors.push_back(std::move(hair.triangle_color));
    }
    for (auto &c : asset.components) c.bounding_sphere_rest = bounding_sphere(c.vertices_template);

    const MeshLayout layout(asset);
    const std::size_t nv = layout.vertex_count();
    const std::size_t nt = layout.triangle_count();

    // Small smooth static offsets.
    asset.static_offsets.resize(nv);
    const double ph[3] = {rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi), rng.uniform(0, 2 * kPi)};
    for (std::size_t i = 0; i < nv; ++i) {
        const Vec3d x = layout.template_vertices[i].cast<double>();
        asset.static_offsets[i] = Vec3f(float(0.0015 * std::sin(9.0 * x.y() + ph[0])),
                                        float(0.0015 * std::sin(11.0 * x.x() + ph[1])),
                                        float(0.0015 * std::sin(13.0 * x.z() + ph[2])));
    }

    // Splat placement: triangles drawn by area, then filled in triangle order.
    std::vector<double> cumulative(nt);
    double area = 0.0;
    for (std::size_t t = 0; t < nt; ++t) {
        const auto &tri = layout.triangles[t];
        const Vec3d a   = layout.template_vertices[tri[0]].cast<double>();
        const Vec3d b   = layout.template_vertices[tri[1]].cast<double>();
        const Vec3d c   = layout.template_vertices[tri[2]].cast<double>();
        area += 0.5 * (b - a).cross(c - a).norm();
        cumulative[t] = area;
    }
    std::vector<std::uint32_t> per_triangle(nt, 0);
    for (std::uint32_t i = 0; i < spec.splat_count; ++i) {
        const double r = rng.uniform() * area;
        const auto it  = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        ++per_triangle[std::min<std::size_t>(std::size_t(it - cumulative.begin()), nt - 1)];
    }

    const double hs = std::sqrt(area / spec.splat_count);
    SplatAttributes s;
    s.sh_degree = spec.sh_degree;
    s.resize(spec.splat_count);
    const std::size_t coeffs = sh_coeff_count(spec.sh_degree);
    std::size_t i            = 0;
    for (std::uint32_t t = 0; t < nt; ++t) {
        const std::uint16_t comp = layout.triangle_component[t];
        const auto &mc           = asset.components[comp];
        const Vec3f base         = colors[comp][t - layout.triangle_offset[comp]];
        const bool flat          = mc.kind != ComponentKind::hair;
        for (std::uint32_t k = 0; k < per_triangle[t]; ++k, ++i) {
            double r1 = rng.uniform(), r2 = rng.uniform();
            if (r1 + r2 > 1.0) {
                r1 = 1.0 - r1;
                r2 = 1.0 - r2;
            }
            s.triangle[i]  = t;
            s.u[i]         = float(r1);
            s.v[i]         = float(r2);
            s.label[i]     = mc.closed ? 1 : 0;
            s.surface2d[i] = flat ? 1 : 0;
            if (flat) {
                const double angle = rng.uniform(0.0, kPi);
                s.w[i]             = 0.0f;
                s.rotation[i]      = Quatf(float(std::cos(angle / 2)), 0.0f, 0.0f, float(std::sin(angle / 2)));
                s.scale[i]         = Vec3f(float(hs * rng.uniform(0.9, 1.5)), float(hs * rng.uniform(0.9, 1.5)), 0.0f);
                s.opacity[i]       = float(rng.uniform(0.85, 1.0));
            } else {
                s.w[i]        = float(rng.uniform(-0.002, 0.006));
                s.rotation[i] = random_rotation(rng);
                s.scale[i]    = Vec3f(float(hs * rng.uniform(1.2, 2.0)), float(hs * rng.uniform(0.4, 0.8)),
                                      float(hs * rng.uniform(0.4, 0.8)));
                s.opacity[i]  = float(rng.uniform(0.5, 0.95));
            }
            auto sh            = s.sh_of(i);
            const float jitter = float(rng.uniform(-0.04, 0.04));
            for (int c = 0; c < 3; ++c) {
                const float col = std::clamp(base[c] + jitter + float(rng.uniform(-0.015, 0.015)), 0.0f, 1.0f);
                sh[c]           = (col - 0.5f) / kShC0;
            }
            for (std::size_t k2 = 1; k2 < coeffs; ++k2)
                for (int c = 0; c < 3; ++c) sh[k2 * 3 + c] = float(rng.normal() * 0.04);
        }
    }
    asset.splats = std::move(s);

    const std::uint32_t in = 6 * spec.joint_count + 3;
    asset.deform_net = make_net(rng, {in, 64, 64, 3}, 0.004f, 0.0f, NetOutput::largesteps_offset);
    asset.illum_net  = make_net(rng, {in, 32, 32, 1}, 0.15f, 0.5413f, NetOutput::intensity);
    return asset;
}

} // namespace hra
