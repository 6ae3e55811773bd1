// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/scene.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rgs {

namespace {

constexpr double kC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                           -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                           0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                           -0.5900435899266435};

void check_degree(int degree) {
    if (degree < 0 || degree > kMaxShDegree) {
        throw std::invalid_argument("sh degree must be in [0, 3], got " + std::to_string(degree));
    }
}

} // namespace

ShBasis sh_basis_unchecked(const Vec3d& dir, int degree) {
    ShBasis b(sh_coeff_count(degree));
    b[0] = kShC0;
    if (degree < 1) return b;
    const double x = dir.x(), y = dir.y(), z = dir.z();
    b[1] = -kShC1 * y;
    b[2] = kShC1 * z;
    b[3] = -kShC1 * x;
    if (degree < 2) return b;
    const double xx = x * x, yy = y * y, zz = z * z;
    b[4] = kC2[0] * x * y;
    b[5] = kC2[1] * y * z;
    b[6] = kC2[2] * (2.0 * zz - xx - yy);
    b[7] = kC2[3] * x * z;
    b[8] = kC2[4] * (xx - yy);
    if (degree < 3) return b;
    b[9] = kC3[0] * y * (3.0 * xx - yy);
    b[10] = kC3[1] * x * y * z;
    b[11] = kC3[2] * y * (4.0 * zz - xx - yy);
    b[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    b[13] = kC3[4] * x * (4.0 * zz - xx - yy);
    b[14] = kC3[5] * z * (xx - yy);
    b[15] = kC3[6] * x * (xx - 3.0 * yy);
    return b;
}

ShBasis sh_eval_basis(const Vec3d& dir, int degree) {
    check_degree(degree);
    if (std::abs(dir.norm() - 1.0) > 1e-6) {
        throw std::invalid_argument("sh_eval_basis: direction is not unit length");
    }
    return sh_basis_unchecked(dir, degree);
}

Vec3d sh_basis_vjp(const Vec3d& dir, int degree, const ShBasis& g) {
    Vec3d d = Vec3d::Zero();
    if (degree < 1) return d;
    const double x = dir.x(), y = dir.y(), z = dir.z();
    d += g[1] * Vec3d(0, -kShC1, 0);
    d += g[2] * Vec3d(0, 0, kShC1);
    d += g[3] * Vec3d(-kShC1, 0, 0);
    if (degree < 2) return d;
    const double xx = x * x, yy = y * y, zz = z * z;
    d += g[4] * kC2[0] * Vec3d(y, x, 0);
    d += g[5] * kC2[1] * Vec3d(0, z, y);
    d += g[6] * kC2[2] * Vec3d(-2.0 * x, -2.0 * y, 4.0 * z);
    d += g[7] * kC2[3] * Vec3d(z, 0, x);
    d += g[8] * kC2[4] * Vec3d(2.0 * x, -2.0 * y, 0);
    if (degree < 3) return d;
    d += g[9] * kC3[0] * Vec3d(6.0 * x * y, 3.0 * xx - 3.0 * yy, 0);
    d += g[10] * kC3[1] * Vec3d(y * z, x * z, x * y);
    d += g[11] * kC3[2] * Vec3d(-2.0 * x * y, 4.0 * zz - xx - 3.0 * yy, 8.0 * y * z);
    d += g[12] * kC3[3] * Vec3d(-6.0 * x * z, -6.0 * y * z, 6.0 * zz - 3.0 * xx - 3.0 * yy);
    d += g[13] * kC3[4] * Vec3d(4.0 * zz - 3.0 * xx - yy, -2.0 * x * y, 8.0 * x * z);
    d += g[14] * kC3[5] * Vec3d(2.0 * x * z, -2.0 * y * z, xx - yy);
    d += g[15] * kC3[6] * Vec3d(3.0 * xx - 3.0 * yy, -6.0 * x * y, 0);
    return d;
}

Mat3d covariance_of(const GaussianPrimitive& p) {
    const Mat3d R = rotation_of(p);
    const Vec3d scale2 = (2.0 * p.log_scale).array().exp();
    return R * scale2.asDiagonal() * R.transpose();
}

Vec3d decode_color_linear(const ShCoeffs& sh, const ShBasis& basis) {
    return Vec3d::Constant(0.5) + sh.transpose() * basis;
}

Vec3d decode_color(const GaussianPrimitive& p, const Vec3d& dir) {
    const int degree = static_cast<int>(std::lround(std::sqrt(double(p.sh.rows())))) - 1;
    const ShBasis basis = sh_eval_basis(dir, degree);
    return decode_color_linear(p.sh, basis).cwiseMax(0.0);
}

GaussianPrimitive make_primitive(int sh_degree) {
    check_degree(sh_degree);
    GaussianPrimitive p;
    p.sh = ShCoeffs::Zero(sh_coeff_count(sh_degree), 3);
    return p;
}

void validate_scene(const Scene& scene) {
    check_degree(scene.sh_degree);
    const int rows = sh_coeff_count(scene.sh_degree);
    for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
        const auto& p = scene.primitives[i];
        if (p.sh.rows() != rows) {
            throw std::invalid_argument("primitive " + std::to_string(i) + " has " +
                                        std::to_string(p.sh.rows()) + " SH rows, scene degree needs " +
                                        std::to_string(rows));
        }
        if (!p.position.allFinite() || !p.log_scale.allFinite() || !p.rotation.allFinite() ||
            !std::isfinite(p.opacity_logit) || !p.sh.allFinite()) {
            throw std::invalid_argument("primitive " + std::to_string(i) + " has non-finite parameters");
        }
        if (p.rotation.norm() == 0.0) {
            throw std::invalid_argument("primitive " + std::to_string(i) + " has a zero quaternion");
        }
    }
}

} // namespace rgs
