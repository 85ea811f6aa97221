// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/asset.hpp"

#include <cmath>
#include <sstream>

namespace hra {

const char *to_string(ComponentKind kind) {
    switch (kind) {
    case ComponentKind::body: return "body";
    case ComponentKind::garment: return "garment";
    case ComponentKind::hair: return "hair";
    }
    return "unknown";
}

std::size_t AvatarAsset::vertex_count() const {
    std::size_t n = 0;
    for (const auto &c : components) n += c.vertices_template.size();
    return n;
}

std::size_t AvatarAsset::triangle_count() const {
    std::size_t n = 0;
    for (const auto &c : components) n += c.triangles.size();
    return n;
}

std::size_t AvatarAsset::splat_count() const {
    return std::visit(
        [](const auto &s) -> std::size_t {
            if constexpr (std::is_same_v<std::decay_t<decltype(s)>, SplatAttributes>)
                return s.size();
            else
                return s.count;
        },
        splats);
}

int AvatarAsset::sh_degree() const {
    return std::visit([](const auto &s) { return s.sh_degree; }, splats);
}

MeshLayout::MeshLayout(const AvatarAsset &asset) {
    std::uint32_t v = 0, t = 0;
    for (std::size_t c = 0; c < asset.components.size(); ++c) {
        const auto &comp = asset.components[c];
        vertex_offset.push_back(v);
        triangle_offset.push_back(t);
        for (const auto &tri : comp.triangles) {
            triangles.push_back({tri[0] + v, tri[1] + v, tri[2] + v});
            triangle_component.push_back(static_cast<std::uint16_t>(c));
        }
        template_vertices.insert(template_vertices.end(), comp.vertices_template.begin(),
                                 comp.vertices_template.end());
        v += static_cast<std::uint32_t>(comp.vertices_template.size());
        t += static_cast<std::uint32_t>(comp.triangles.size());
    }
    vertex_offset.push_back(v);
    triangle_offset.push_back(t);
}

std::string ValidationReport::summary(std::size_t max_items) const {
    std::ostringstream os;
    if (violations.empty()) return "valid";
    os << violations.size() << " violation(s)";
    for (std::size_t i = 0; i < violations.size() && i < max_items; ++i) {
        const auto &v = violations[i];
        os << "\n  [" << v.rule << "] " << v.record << " " << v.index;
        if (!v.detail.empty()) os << ": " << v.detail;
    }
    if (violations.size() > max_items) os << "\n  ...";
    return os.str();
}

namespace {

void add(ValidationReport &r, std::string rule, std::string record, std::size_t index, std::string detail = {}) {
    r.violations.push_back({std::move(rule), std::move(record), index, std::move(detail)});
}

double quat_norm(const Quatf &q) {
    return std::sqrt(double(q.x()) * q.x() + double(q.y()) * q.y() + double(q.z()) * q.z() + double(q.w()) * q.w());
}

void validate_net(const MlpWeights &net, const char *name, std::size_t joints, NetOutput expected,
                  ValidationReport &r) {
    if (net.layers.empty()) {
        add(r, "net-dims", name, 0, "no layers");
        return;
    }
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto &layer = net.layers[l];
        if (layer.weight.size() != std::size_t(layer.in_dim) * layer.out_dim || layer.bias.size() != layer.out_dim)
            add(r, "net-dims", name, l, "weight/bias size does not match layer dims");
        if (l > 0 && net.layers[l - 1].out_dim != layer.in_dim)
            add(r, "net-dims", name, l, "layer input does not chain from previous output");
        for (float x : layer.weight)
            if (!std::isfinite(x)) {
                add(r, "net-finite", name, l);
                break;
            }
    }
    if (net.output_space != expected) add(r, "net-output", name, 0, "unexpected output space");
    const std::uint32_t want_out = net.output_space == NetOutput::intensity ? 1 : 3;
    if (net.output_dim() != want_out) add(r, "net-dims", name, net.layers.size() - 1, "final out_dim mismatch");
    const std::size_t want_in = 6 * joints + (net.input_spec == NetInput::pose_and_canonical_vertex ? 3 : 0);
    if (net.input_dim() != want_in) add(r, "net-dims", name, 0, "input dim does not match pose encoding");
}

} // namespace

void validate_splats(const SplatAttributes &s, const AvatarAsset &asset, const MeshLayout &layout,
                     ValidationReport &r) {
    const std::size_t n = s.size();
    if (s.sh_degree < 0 || s.sh_degree > 3) add(r, "sh-degree", "splats", 0);
    if (s.u.size() != n || s.v.size() != n || s.w.size() != n || s.rotation.size() != n || s.scale.size() != n ||
        s.opacity.size() != n || s.sh.size() != n * s.sh_stride() || s.label.size() != n || s.surface2d.size() != n) {
        add(r, "splat-arrays", "splats", 0, "attribute array lengths differ");
        return;
    }
    constexpr double kBary = 1e-7;
    for (std::size_t i = 0; i < n; ++i) {
        if (s.triangle[i] >= layout.triangle_count()) {
            add(r, "triangle-range", "splat", i);
            continue;
        }
        const double u = s.u[i], v = s.v[i];
        if (!(u >= -kBary && v >= -kBary && 1.0 - u - v >= -kBary))
            add(r, "barycentric", "splat", i, "u=" + std::to_string(u) + " v=" + std::to_string(v));
        if (!(s.opacity[i] >= 0.0f && s.opacity[i] <= 1.0f)) add(r, "opacity", "splat", i);
        if (std::abs(quat_norm(s.rotation[i]) - 1.0) > 1e-6) add(r, "rotation-norm", "splat", i);
        if (s.label[i] > 1) add(r, "label", "splat", i);
        const auto kind = asset.components[layout.triangle_component[s.triangle[i]]].kind;
        const bool want_2d = kind != ComponentKind::hair;
        if (bool(s.surface2d[i]) != want_2d) add(r, "surface2d-flag", "splat", i);
        if (s.surface2d[i] && (s.w[i] != 0.0f || s.scale[i].z() != 0.0f))
            add(r, "2d-constraint", "splat", i, "surface splat with normal offset or normal scale");
        const int axes = s.surface2d[i] ? 2 : 3;
        for (int a = 0; a < axes; ++a)
            if (!(s.scale[i][a] > 0.0f) || !std::isfinite(s.scale[i][a])) {
                add(r, "scale", "splat", i);
                break;
            }
        if (!std::isfinite(s.w[i])) add(r, "finite", "splat", i);
        for (float x : s.sh_of(i))
            if (!std::isfinite(x)) {
                add(r, "finite", "splat", i, "sh");
                break;
            }
    }
}

ValidationReport validate_asset(const AvatarAsset &asset) {
    ValidationReport r;
    const auto &skel  = asset.skeleton;
    std::size_t roots = 0;
    for (std::size_t j = 0; j < skel.size(); ++j) {
        const auto &joint = skel.joints[j];
        if (joint.parent < 0)
            ++roots;
        else if (std::size_t(joint.parent) >= j)
            add(r, "skeleton-order", "joint", j, "parent index must precede the joint");
        if (std::abs(quat_norm(joint.rest_local.rotation) - 1.0) > 1e-6) add(r, "rotation-norm", "joint", j);
    }
    if (skel.size() == 0 || roots != 1 || skel.joints[0].parent >= 0)
        add(r, "skeleton-root", "skeleton", 0, "exactly one root, at index 0");
    if (skel.inverse_bind.size() != skel.size()) add(r, "inverse-bind", "skeleton", 0, "one matrix per joint");

    if (asset.components.empty() || asset.components.front().kind != ComponentKind::body)
        add(r, "component-order", "component", 0, "body component must come first");
    if (asset.components.size() > 0xffff) add(r, "component-count", "component", 0);

    for (std::size_t c = 0; c < asset.components.size(); ++c) {
        const auto &comp   = asset.components[c];
        const auto verts   = comp.vertices_template.size();
        const std::string where = "component " + std::to_string(c);
        if (comp.skin_weights.size() != verts) {
            add(r, "skin-weights", where, 0, "one weight set per vertex");
        } else {
            for (std::size_t v = 0; v < verts; ++v) {
                double sum = 0.0;
                bool bad   = false;
                for (const auto &inf : comp.skin_weights[v]) {
                    sum += inf.weight;
                    if (inf.weight < 0.0f || !std::isfinite(inf.weight) || (inf.weight > 0.0f && inf.joint >= skel.size()))
                        bad = true;
                }
                if (bad || std::abs(sum - 1.0) > 1e-6) {
                    add(r, "skin-weights", where + " vertex", v);
                    break;
                }
            }
        }
        for (std::size_t t = 0; t < comp.triangles.size(); ++t)
            for (auto idx : comp.triangles[t])
                if (idx >= verts) {
                    add(r, "triangle-index", where + " triangle", t);
                    break;
                }
        const auto &bs = comp.bounding_sphere_rest;
        for (std::size_t v = 0; v < verts; ++v) {
            const double d = (comp.vertices_template[v] - bs.center).cast<double>().norm();
            if (d > double(bs.radius) * (1.0 + 1e-5) + 1e-6) {
                add(r, "bounding-sphere", where + " vertex", v);
                break;
            }
        }
    }

    if (asset.static_offsets.size() != asset.vertex_count())
        add(r, "static-offsets", "asset", 0, "one offset per vertex");
    if (!(asset.laplacian_lambda >= 0.0f) || !std::isfinite(asset.laplacian_lambda))
        add(r, "lambda", "asset", 0, "laplacian lambda must be finite and >= 0");

    validate_net(asset.deform_net, "deform_net", skel.size(), NetOutput::largesteps_offset, r);
    validate_net(asset.illum_net, "illum_net", skel.size(), NetOutput::intensity, r);

    if (!r.ok()) return r; // splat checks need a sound mesh
    const MeshLayout layout(asset);
    if (const auto *raw = std::get_if<SplatAttributes>(&asset.splats)) {
        validate_splats(*raw, asset, layout, r);
    } else {
        const auto &buf = std::get<ChunkedSplatBuffer>(asset.splats);
        try {
            check_buffer(buf);
            validate_splats(decompress_all(buf), asset, layout, r);
        } catch (const FormatError &e) {
            add(r, "splat-buffer", "splats", 0, e.what());
        }
    }
    return r;
}

int find_joint(const Skeleton &skeleton, const std::string &name) {
    for (std::size_t j = 0; j < skeleton.size(); ++j)
        if (skeleton.joints[j].name == name) return int(j);
    return -1;
}

SplatAttributes materialize_splats(const AvatarAsset &asset) {
    if (const auto *raw = std::get_if<SplatAttributes>(&asset.splats)) return *raw;
    return decompress_all(std::get<ChunkedSplatBuffer>(asset.splats));
}

} // namespace hra
