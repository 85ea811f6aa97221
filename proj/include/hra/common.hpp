// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hra {

using Vec2f = Eigen::Vector2f;
using Vec3f = Eigen::Vector3f;
using Vec3d = Eigen::Vector3d;
using Mat3f = Eigen::Matrix3f;
using Mat3d = Eigen::Matrix3d;
using Mat4f = Eigen::Matrix4f;
using Quatf = Eigen::Quaternionf;
using Affine3f = Eigen::Affine3f;

/// Malformed or unsupported container bytes.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A data invariant does not hold. The message names the first offending record.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// File system or stream failure.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs have incompatible shapes (joint counts, network dimensions, ...).
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative solve did not reach its residual target.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string &what, double residual)
        : std::runtime_error(what), mResidual(residual) {}
    double residual() const { return mResidual; }

private:
    double mResidual;
};

/// Rotation + translation. Applied as x -> R x + t.
struct RigidTransform {
    Quatf rotation    = Quatf::Identity();
    Vec3f translation = Vec3f::Zero();

    Affine3f affine() const {
        Affine3f a = Affine3f::Identity();
        a.linear() = rotation.toRotationMatrix();
        a.translation() = translation;
        return a;
    }
};

} // namespace hra
