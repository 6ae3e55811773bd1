// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rgs/core_math.hpp"

#include <array>
#include <cstddef>
#include <vector>

namespace rgs {

inline constexpr int kMaxShDegree = 3;
inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr double kShC1 = 0.4886025119029199;

inline constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Per-primitive SH coefficients, one row per basis function and one column
/// per color channel. Bounded storage so primitives stay allocation-free.
using ShCoeffs = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::ColMajor, 16, 3>;
using ShBasis = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, 16, 1>;

/// Real SH basis in the ordering and sign convention used by the reference
/// 3DGS implementation. `dir` must be unit length.
ShBasis sh_eval_basis(const Vec3d& dir, int degree);

/// Same as sh_eval_basis without the unit-length check; used in hot loops.
ShBasis sh_basis_unchecked(const Vec3d& dir, int degree);

/// dL/d(dir) given dL/d(basis), treating the components of dir as
/// independent (the caller differentiates through any normalization).
Vec3d sh_basis_vjp(const Vec3d& dir, int degree, const ShBasis& g_basis);

struct GaussianPrimitive {
    Vec3d position = Vec3d::Zero();
    Vec3d log_scale = Vec3d::Zero();
    Vec4d rotation = Vec4d(1, 0, 0, 0);  // (w, x, y, z), normalized on use
    double opacity_logit = 0.0;
    ShCoeffs sh = ShCoeffs::Zero(1, 3);
};

struct Scene {
    int sh_degree = 3;
    std::vector<GaussianPrimitive> primitives;

    std::size_t size() const { return primitives.size(); }
    bool empty() const { return primitives.empty(); }
};

inline Mat3d rotation_of(const GaussianPrimitive& p) {
    return quat_to_rotation<double>(p.rotation.normalized());
}

Mat3d covariance_of(const GaussianPrimitive& p);

inline double opacity_of(const GaussianPrimitive& p) { return sigmoid(p.opacity_logit); }

/// Linear part of the color decoder: 0.5 + sum_l b_l(dir) f_l, unclamped.
Vec3d decode_color_linear(const ShCoeffs& sh, const ShBasis& basis);

/// RGB color seen along unit `dir`, clamped below at zero.
Vec3d decode_color(const GaussianPrimitive& p, const Vec3d& dir);

GaussianPrimitive make_primitive(int sh_degree);

/// Throws std::invalid_argument if the scene violates its invariants.
void validate_scene(const Scene& scene);

} // namespace rgs
