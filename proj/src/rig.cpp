// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/rig.hpp"
#include "hra/parallel.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>

namespace hra {

Pose Pose::rest(std::size_t joint_count) {
    Pose p;
    p.joint_rotations.assign(joint_count, Quatf::Identity());
    return p;
}

namespace {

void check_pose(const Pose &pose) {
    for (std::size_t j = 0; j < pose.size(); ++j) {
        const auto &q = pose.joint_rotations[j];
        const double n =
            std::sqrt(double(q.x()) * q.x() + double(q.y()) * q.y() + double(q.z()) * q.z() + double(q.w()) * q.w());
        if (std::abs(n - 1.0) > 1e-6)
            throw ValidationError("pose rotation of joint " + std::to_string(j) + " is not unit length");
    }
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

} // namespace

std::vector<float> encode_pose(const Pose &pose) {
    std::vector<float> enc(6 * pose.size());
    for (std::size_t j = 0; j < pose.size(); ++j) {
        const Mat3f r = j == 0 ? Mat3f::Identity() : pose.joint_rotations[j].toRotationMatrix();
        for (int c = 0; c < 2; ++c)
            for (int row = 0; row < 3; ++row) enc[6 * j + 3 * c + row] = r(row, c);
    }
    return enc;
}

std::vector<Affine3f> evaluate_pose(const Skeleton &skeleton, const Pose &pose) {
    if (pose.size() != skeleton.size())
        throw DimensionError("pose has " + std::to_string(pose.size()) + " joints, skeleton has " +
                             std::to_string(skeleton.size()));
    check_pose(pose);
    std::vector<Affine3f> global(skeleton.size());
    for (std::size_t j = 0; j < skeleton.size(); ++j) {
        const auto &joint = skeleton.joints[j];
        Affine3f rot      = Affine3f::Identity();
        rot.linear()      = pose.joint_rotations[j].toRotationMatrix();
        if (joint.parent < 0) {
            Affine3f t      = Affine3f::Identity();
            t.translation() = pose.root_translation;
            global[j]       = t * rot * joint.rest_local.affine();
        } else {
            global[j] = global[joint.parent] * joint.rest_local.affine() * rot;
        }
    }
    return global;
}

MlpEvaluator::MlpEvaluator(const MlpWeights &net, std::span<const float> pose_encoding) : mNet(&net) {
    if (net.layers.empty()) throw DimensionError("network has no layers");
    const std::size_t extra = net.input_spec == NetInput::pose_and_canonical_vertex ? 3 : 0;
    const auto &first       = net.layers.front();
    if (first.in_dim != pose_encoding.size() + extra)
        throw DimensionError("network input " + std::to_string(first.in_dim) + " does not match pose encoding " +
                             std::to_string(pose_encoding.size()) + " + " + std::to_string(extra));
    for (std::size_t l = 1; l < net.layers.size(); ++l)
        if (net.layers[l].in_dim != net.layers[l - 1].out_dim) throw DimensionError("network layers do not chain");
    mFirstBase.resize(first.out_dim);
    for (std::uint32_t o = 0; o < first.out_dim; ++o) {
        double acc      = first.bias[o];
        const float *row = first.weight.data() + std::size_t(o) * first.in_dim;
        for (std::size_t k = 0; k < pose_encoding.size(); ++k) acc += double(row[k]) * pose_encoding[k];
        mFirstBase[o] = acc;
    }
}

void MlpEvaluator::evaluate(const Vec3f &vertex, std::span<double> out) const {
    const auto &net   = *mNet;
    const auto &first = net.layers.front();
    const bool with_vertex = net.input_spec == NetInput::pose_and_canonical_vertex;
    const std::size_t pose_dim = first.in_dim - (with_vertex ? 3 : 0);

    auto activate = [&](double x) { return net.activation == Activation::relu ? std::max(x, 0.0) : std::tanh(x); };

    std::vector<double> cur(first.out_dim), next;
    for (std::uint32_t o = 0; o < first.out_dim; ++o) {
        double acc = mFirstBase[o];
        if (with_vertex) {
            const float *row = first.weight.data() + std::size_t(o) * first.in_dim + pose_dim;
            acc += double(row[0]) * vertex.x() + double(row[1]) * vertex.y() + double(row[2]) * vertex.z();
        }
        cur[o] = acc;
    }
    for (std::size_t l = 1; l < net.layers.size(); ++l) {
        for (auto &x : cur) x = activate(x);
        const auto &layer = net.layers[l];
        next.assign(layer.out_dim, 0.0);
        for (std::uint32_t o = 0; o < layer.out_dim; ++o) {
            double acc       = layer.bias[o];
            const float *row = layer.weight.data() + std::size_t(o) * layer.in_dim;
            for (std::uint32_t k = 0; k < layer.in_dim; ++k) acc += double(row[k]) * cur[k];
            next[o] = acc;
        }
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

std::vector<Vec3f> predict_deformation(const MlpWeights &net, const Pose &pose,
                                       std::span<const Vec3f> canonical_vertices, unsigned threads) {
    if (net.input_spec != NetInput::pose_and_canonical_vertex || net.output_dim() != 3)
        throw DimensionError("deformation network must take (pose, vertex) and output 3 values");
    const auto enc = encode_pose(pose);
    const MlpEvaluator eval(net, enc);
    std::vector<Vec3f> out(canonical_vertices.size());
    parallel_for(threads, out.size(), [&](std::size_t b, std::size_t e, unsigned) {
        double y[3];
        for (std::size_t i = b; i < e; ++i) {
            eval.evaluate(canonical_vertices[i], y);
            out[i] = Vec3f(float(y[0]), float(y[1]), float(y[2]));
        }
    });
    return out;
}

std::vector<float> predict_illumination(const MlpWeights &net, const Pose &pose,
                                        std::span<const Vec3f> canonical_vertices, unsigned threads) {
    if (net.output_space != NetOutput::intensity || net.output_dim() != 1)
        throw DimensionError("illumination network must output one intensity value");
    const auto enc = encode_pose(pose);
    const MlpEvaluator eval(net, enc);
    std::vector<float> out(canonical_vertices.size());
    parallel_for(threads, out.size(), [&](std::size_t b, std::size_t e, unsigned) {
        double y[1];
        for (std::size_t i = b; i < e; ++i) {
            eval.evaluate(canonical_vertices[i], y);
            out[i] = float(std::clamp(softplus(y[0]), 0.0, double(kMaxIntensity)));
        }
    });
    return out;
}

// ---------------------------------------------------------------------------

struct LaplacianSystem::Dense {
    Eigen::LLT<Eigen::MatrixXd> llt;
};

LaplacianSystem::LaplacianSystem(std::size_t vertex_count, std::span<const Triangle> triangles, double lambda,
                                 SolverConfig config)
    : mLambda(lambda), mConfig(config) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ValidationError("laplacian lambda must be finite and >= 0");
    std::vector<std::vector<std::uint32_t>> adj(vertex_count);
    for (const auto &t : triangles)
        for (int k = 0; k < 3; ++k) {
            const auto a = t[k], b = t[(k + 1) % 3];
            if (a >= vertex_count || b >= vertex_count) throw ValidationError("triangle index out of range");
            if (a == b) continue;
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
    mRowStart.assign(vertex_count + 1, 0);
    mDegree.resize(vertex_count);
    for (std::size_t i = 0; i < vertex_count; ++i) {
        auto &row = adj[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        mRowStart[i + 1] = mRowStart[i] + std::uint32_t(row.size());
        mDegree[i]       = double(row.size());
        mAdj.insert(mAdj.end(), row.begin(), row.end());
    }
    if (vertex_count > 0 && vertex_count < config.dense_below) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(vertex_count, vertex_count);
        for (std::size_t i = 0; i < vertex_count; ++i) {
            m(i, i) += lambda * mDegree[i];
            for (auto j : neighbors(i)) m(i, j) -= lambda;
        }
        mDense = std::make_unique<Dense>();
        mDense->llt.compute(m);
    }
}

LaplacianSystem::~LaplacianSystem()                                  = default;
LaplacianSystem::LaplacianSystem(LaplacianSystem &&) noexcept            = default;
LaplacianSystem &LaplacianSystem::operator=(LaplacianSystem &&) noexcept = default;

void LaplacianSystem::apply_laplacian(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < size(); ++i) {
        double s = mDegree[i] * x[i];
        for (auto j : neighbors(i)) s -= x[j];
        y[i] = s;
    }
}

void LaplacianSystem::apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t i = 0; i < size(); ++i) {
        double s = mDegree[i] * x[i];
        for (auto j : neighbors(i)) s -= x[j];
        y[i] = x[i] + mLambda * s;
    }
}

double LaplacianSystem::dirichlet_energy(std::span<const Vec3f> x) const {
    double e = 0.0;
    for (std::size_t i = 0; i < size(); ++i)
        for (auto j : neighbors(i))
            if (j > i) e += (x[i].cast<double>() - x[j].cast<double>()).squaredNorm();
    return e;
}

namespace {

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace

int LaplacianSystem::solve_axis(std::span<const double> b, std::span<double> x, double &residual) const {
    const std::size_t n = size();
    const double scale  = std::max(1.0, inf_norm(b));
    const double target = mConfig.tolerance * scale;
    std::vector<double> r(n), z(n), p(n), q(n);

    auto true_residual = [&] {
        apply(x, q);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
        return inf_norm(r);
    };

    if (mDense) {
        Eigen::Map<const Eigen::VectorXd> bv(b.data(), Eigen::Index(n));
        Eigen::Map<Eigen::VectorXd> xv(x.data(), Eigen::Index(n));
        xv = mDense->llt.solve(bv);
        residual = true_residual() / scale;
        return 1;
    }

    double rn = true_residual();
    int it    = 0;
    // Recheck the true residual whenever the recurrence claims convergence.
    while (rn > target && it < mConfig.max_iterations) {
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / (1.0 + mLambda * mDegree[i]);
        p = z;
        double rz = dot(r, z);
        while (it < mConfig.max_iterations) {
            apply(p, q);
            const double pq = dot(p, q);
            if (!(pq > 0.0)) break;
            const double alpha = rz / pq;
            for (std::size_t i = 0; i < n; ++i) {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            ++it;
            if (inf_norm(r) <= target) break;
            for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / (1.0 + mLambda * mDegree[i]);
            const double rz_new = dot(r, z);
            const double beta   = rz_new / rz;
            rz                  = rz_new;
            for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
        }
        const double prev = rn;
        rn                = true_residual();
        if (rn >= prev && rn > target) break; // stagnated
    }
    residual = rn / scale;
    if (rn > target)
        throw SolverError("laplacian solve did not converge: relative residual " + std::to_string(residual) +
                              " after " + std::to_string(it) + " iterations",
                          residual);
    return it;
}

SolveReport LaplacianSystem::solve(std::span<const Vec3f> u, std::span<Vec3f> x, unsigned threads) const {
    const std::size_t n = size();
    if (u.size() != n || x.size() != n) throw DimensionError("solve: vector length does not match system size");
    std::array<std::vector<double>, 3> bs, xs;
    for (int a = 0; a < 3; ++a) {
        bs[a].resize(n);
        xs[a].resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            bs[a][i] = u[i][a];
            xs[a][i] = x[i][a];
        }
    }
    std::array<int, 3> iters{};
    std::array<double, 3> res{};
    parallel_for(std::min(resolve_threads(threads), 3u), 3, [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t a = b; a < e; ++a) iters[a] = solve_axis(bs[a], xs[a], res[a]);
    });
    for (std::size_t i = 0; i < n; ++i) x[i] = Vec3f(float(xs[0][i]), float(xs[1][i]), float(xs[2][i]));
    SolveReport rep;
    rep.iterations = *std::max_element(iters.begin(), iters.end());
    rep.residual   = *std::max_element(res.begin(), res.end());
    return rep;
}

std::vector<Vec3f> largesteps_map(const LaplacianSystem &system, std::span<const Vec3f> u, SolveReport *report) {
    std::vector<Vec3f> x(u.size(), Vec3f::Zero());
    const auto rep = system.solve(u, x);
    if (report) *report = rep;
    return x;
}

// ---------------------------------------------------------------------------

Rig::Rig(const AvatarAsset &asset, SolverConfig config)
    : mAsset(&asset), mLayout(asset),
      mSystem(mLayout.vertex_count(), mLayout.triangles, asset.laplacian_lambda, config) {
    const std::size_t nv = mLayout.vertex_count();
    if (asset.static_offsets.size() != nv) throw DimensionError("static offsets do not match vertex count");
    mRest.resize(nv);
    for (std::size_t i = 0; i < nv; ++i) mRest[i] = mLayout.template_vertices[i] + asset.static_offsets[i];
    for (const auto &c : asset.components) mSkin.insert(mSkin.end(), c.skin_weights.begin(), c.skin_weights.end());

    const std::size_t nt = mLayout.triangle_count();
    mRestInverse.resize(nt);
    mRestFrame.resize(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        const auto &tri = mLayout.triangles[t];
        const Vec3f e1  = mRest[tri[0]] - mRest[tri[2]];
        const Vec3f e2  = mRest[tri[1]] - mRest[tri[2]];
        const Vec3f c   = e1.cross(e2);
        const float len = e1.norm();
        if (c.norm() <= 1e-12f || len <= 0.0f) {
            mRestInverse[t].setZero();
            mRestFrame[t].setZero();
            continue;
        }
        const Vec3f n = c.normalized();
        Mat3f m;
        m << e1, e2, n;
        mRestInverse[t] = m.inverse();
        Mat3f f;
        const Vec3f t1 = e1 / len;
        f << t1, n.cross(t1), n;
        mRestFrame[t] = mRestInverse[t] * f;
    }
    mWarm.assign(nv, Vec3f::Zero());
}

void Rig::reset_warm_start() { std::fill(mWarm.begin(), mWarm.end(), Vec3f::Zero()); }

std::vector<Vec3f> Rig::deformation(const Pose &pose, unsigned threads, SolveReport *report) {
    const auto u = predict_deformation(mAsset->deform_net, pose, mLayout.template_vertices, threads);
    std::vector<Vec3f> x = mWarm;
    const auto rep       = mSystem.solve(u, x, threads);
    mWarm                = x;
    if (report) *report = rep;
    return x;
}

std::vector<Vec3f> Rig::skin(const Pose &pose, std::span<const Vec3f> offsets, unsigned threads) const {
    const auto global = evaluate_pose(mAsset->skeleton, pose);
    const auto &inv   = mAsset->skeleton.inverse_bind;
    std::vector<Mat3f> lin(global.size());
    std::vector<Vec3f> tr(global.size());
    for (std::size_t j = 0; j < global.size(); ++j) {
        const Mat4f m = global[j].matrix() * inv[j];
        lin[j]        = m.block<3, 3>(0, 0);
        tr[j]         = m.block<3, 1>(0, 3);
    }
    std::vector<Vec3f> out(mRest.size());
    parallel_for(threads, out.size(), [&](std::size_t b, std::size_t e, unsigned) {
        for (std::size_t i = b; i < e; ++i) {
            const Vec3f p = offsets.empty() ? mRest[i] : Vec3f(mRest[i] + offsets[i]);
            Vec3f acc     = Vec3f::Zero();
            for (const auto &inf : mSkin[i])
                if (inf.weight != 0.0f) acc += inf.weight * (lin[inf.joint] * p + tr[inf.joint]);
            out[i] = acc;
        }
    });
    return out;
}

void Rig::build_frames(PosedGeometry &g, unsigned threads) const {
    const std::size_t nt = mLayout.triangle_count();
    g.triangle_frames.resize(nt);
    const unsigned blocks = std::min<unsigned>(resolve_threads(threads), std::max<std::size_t>(nt, 1));
    std::vector<float> block_max(blocks, 0.0f);
    parallel_for(blocks, nt, [&](std::size_t b, std::size_t e, unsigned block) {
        float local_max = 0.0f;
        for (std::size_t t = b; t < e; ++t) {
            const auto &tri = mLayout.triangles[t];
            const Vec3f &p0 = g.vertices_world[tri[0]], &p1 = g.vertices_world[tri[1]],
                        &p2 = g.vertices_world[tri[2]];
            TriangleFrame &f = g.triangle_frames[t];
            f.origin         = p2;
            f.e1             = p0 - p2;
            f.e2             = p1 - p2;
            f.centroid       = (p0 + p1 + p2) / 3.0f;
            const Vec3f c    = f.e1.cross(f.e2);
            const Vec3f &r0 = mRest[tri[0]], &r1 = mRest[tri[1]], &r2 = mRest[tri[2]];
            f.rest_e1     = r0 - r2;
            f.rest_e2     = r1 - r2;
            f.rest_normal = f.rest_e1.cross(f.rest_e2).normalized();
            const float cn = c.norm();
            f.degenerate   = cn <= 1e-12f || mRestInverse[t].isZero(0.0f);
            if (f.degenerate) {
                f.normal = Vec3f::Zero();
                f.deformation.setZero();
                f.local_to_world.setZero();
                f.stretch = 0.0f;
                continue;
            }
            f.normal = c / cn;
            Mat3f m;
            m << f.e1, f.e2, f.normal;
            f.deformation    = m * mRestInverse[t];
            f.local_to_world = m * mRestFrame[t];
            // Closed-form eigenvalues lose ~1e-5 in float; stretch feeds the cull bound.
            const Eigen::Matrix3d a   = f.deformation.cast<double>();
            const Eigen::Matrix3d ata = a.transpose() * a;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
            es.computeDirect(ata, Eigen::EigenvaluesOnly);
            f.stretch = float(std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0)));
            local_max = std::max(local_max, f.stretch);
        }
        block_max[block] = local_max;
    });
    g.max_stretch = nt ? *std::max_element(block_max.begin(), block_max.end()) : 1.0f;

    g.component_spheres.resize(mAsset->components.size());
    for (std::size_t c = 0; c < g.component_spheres.size(); ++c) {
        const std::size_t b = mLayout.vertex_offset[c], e = mLayout.vertex_offset[c + 1];
        Vec3d center = Vec3d::Zero();
        for (std::size_t i = b; i < e; ++i) center += g.vertices_world[i].cast<double>();
        if (e > b) center /= double(e - b);
        double r = 0.0;
        for (std::size_t i = b; i < e; ++i) r = std::max(r, (g.vertices_world[i].cast<double>() - center).norm());
        g.component_spheres[c] = {center.cast<float>(), float(r + 1e-4)};
    }
}

PosedGeometry Rig::pose(const Pose &pose, const SkinOptions &options) {
    PosedGeometry g;
    std::vector<Vec3f> offsets;
    if (options.enable_deform) offsets = deformation(pose, options.threads, &g.solve);
    g.vertices_world = skin(pose, offsets, options.threads);
    if (options.enable_illum)
        g.vertex_intensity = predict_illumination(mAsset->illum_net, pose, mLayout.template_vertices, options.threads);
    else
        g.vertex_intensity.assign(mLayout.vertex_count(), 1.0f);
    build_frames(g, options.threads);
    return g;
}

PosedGeometry skin_vertices(const AvatarAsset &asset, const Pose &pose, const SkinOptions &options) {
    Rig rig(asset);
    return rig.pose(pose, options);
}

} // namespace hra
