// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Small fixed-size linear algebra and SO(3) helpers. Everything here is
// templated on the scalar type and operates on Eigen fixed-size values.
// Vectors are columns; matrices are indexed (row, col).
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace rgs {

template <typename Scalar> using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar> using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar> using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar> using Mat2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar> using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar> using Mat23 = Eigen::Matrix<Scalar, 2, 3>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Vec4d = Vec4<double>;
using Mat2d = Mat2<double>;
using Mat3d = Mat3<double>;
using Mat23d = Mat23<double>;

using Rng = std::mt19937_64;

class LinAlgError : public std::runtime_error {
public:
    explicit LinAlgError(const std::string& what) : std::runtime_error(what) {}
};

/// Cross-product matrix: skew(v) * w == v.cross(w).
template <typename Scalar>
Mat3<Scalar> skew(const Vec3<Scalar>& v) {
    Mat3<Scalar> m;
    m << Scalar(0), -v.z(), v.y(),
         v.z(), Scalar(0), -v.x(),
         -v.y(), v.x(), Scalar(0);
    return m;
}

/// Exponential map so(3) -> SO(3). Rodrigues' formula, with a second-order
/// series below `kSmallAngle`.
template <typename Scalar>
Mat3<Scalar> so3_exp(const Vec3<Scalar>& v) {
    constexpr double kSmallAngle = 1e-8;
    const Scalar theta2 = v.squaredNorm();
    const Mat3<Scalar> K = skew(v);
    if (theta2 < Scalar(kSmallAngle * kSmallAngle)) {
        return Mat3<Scalar>::Identity() + K + Scalar(0.5) * K * K;
    }
    const Scalar theta = std::sqrt(theta2);
    const Scalar a = std::sin(theta) / theta;
    const Scalar b = (Scalar(1) - std::cos(theta)) / theta2;
    return Mat3<Scalar>::Identity() + a * K + b * K * K;
}

/// Rotation matrix of the quaternion q = (w, x, y, z). q must be unit norm.
template <typename Scalar>
Mat3<Scalar> quat_to_rotation(const Vec4<Scalar>& q) {
    const Scalar w = q[0], x = q[1], y = q[2], z = q[3];
    Mat3<Scalar> R;
    R << Scalar(1) - Scalar(2) * (y * y + z * z), Scalar(2) * (x * y - w * z), Scalar(2) * (x * z + w * y),
         Scalar(2) * (x * y + w * z), Scalar(1) - Scalar(2) * (x * x + z * z), Scalar(2) * (y * z - w * x),
         Scalar(2) * (x * z - w * y), Scalar(2) * (y * z + w * x), Scalar(1) - Scalar(2) * (x * x + y * y);
    return R;
}

/// Adjoint of quat_to_rotation: maps dL/dR to dL/dq for a unit q.
template <typename Scalar>
Vec4<Scalar> quat_to_rotation_vjp(const Vec4<Scalar>& q, const Mat3<Scalar>& g) {
    const Scalar w = q[0], x = q[1], y = q[2], z = q[3];
    Vec4<Scalar> d;
    d[0] = Scalar(2) * (-z * g(0, 1) + y * g(0, 2) + z * g(1, 0) - x * g(1, 2) - y * g(2, 0) + x * g(2, 1));
    d[1] = Scalar(2) * (y * g(0, 1) + z * g(0, 2) + y * g(1, 0) - Scalar(2) * x * g(1, 1) - w * g(1, 2) +
                        z * g(2, 0) + w * g(2, 1) - Scalar(2) * x * g(2, 2));
    d[2] = Scalar(2) * (-Scalar(2) * y * g(0, 0) + x * g(0, 1) + w * g(0, 2) + x * g(1, 0) + z * g(1, 2) -
                        w * g(2, 0) + z * g(2, 1) - Scalar(2) * y * g(2, 2));
    d[3] = Scalar(2) * (-Scalar(2) * z * g(0, 0) - w * g(0, 1) + x * g(0, 2) + w * g(1, 0) -
                        Scalar(2) * z * g(1, 1) + y * g(1, 2) + x * g(2, 0) + y * g(2, 1));
    return d;
}

/// Gradient through q -> q / |q|.
template <typename Scalar>
Vec4<Scalar> normalize_vjp(const Vec4<Scalar>& raw, const Vec4<Scalar>& g_unit) {
    const Scalar n = raw.norm();
    const Vec4<Scalar> u = raw / n;
    return (g_unit - u * u.dot(g_unit)) / n;
}

template <typename Scalar>
Vec3<Scalar> normalize_vjp(const Vec3<Scalar>& raw, const Vec3<Scalar>& g_unit) {
    const Scalar n = raw.norm();
    const Vec3<Scalar> u = raw / n;
    return (g_unit - u * u.dot(g_unit)) / n;
}

/// Lower-triangular L with L * L^T == S. Negative pivots (from eigenvalues
/// slightly below zero) are clamped to zero, which also covers the
/// semi-definite case.
template <typename Scalar>
Mat3<Scalar> spd_factor(const Mat3<Scalar>& S) {
    using std::abs;
    using std::sqrt;
    const Scalar scale = std::max(S.cwiseAbs().maxCoeff(), Scalar(1));
    if ((S - S.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-6) * scale) {
        throw LinAlgError("spd_factor: matrix is not symmetric");
    }
    const Mat3<Scalar> A = Scalar(0.5) * (S + S.transpose());
    Mat3<Scalar> L = Mat3<Scalar>::Zero();
    const Scalar tiny = Scalar(1e-300);
    for (int j = 0; j < 3; ++j) {
        Scalar d = A(j, j);
        for (int k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
        if (d <= tiny) {
            // column is (numerically) dependent on the previous ones
            continue;
        }
        const Scalar ljj = sqrt(d);
        L(j, j) = ljj;
        for (int i = j + 1; i < 3; ++i) {
            Scalar s = A(i, j);
            for (int k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
            L(i, j) = s / ljj;
        }
    }
    return L;
}

template <typename Scalar>
Vec3<Scalar> sample_mvn(const Vec3<Scalar>& mean, const Mat3<Scalar>& factor, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec3<Scalar> z;
    for (int i = 0; i < 3; ++i) z[i] = Scalar(normal(rng));
    return mean + factor * z;
}

/// Standard normal 3-vector; the same stream sample_mvn consumes.
inline Vec3d sample_standard_normal(Rng& rng) {
    return sample_mvn<double>(Vec3d::Zero(), Mat3d::Identity(), rng);
}

template <typename Scalar>
Scalar sigmoid(Scalar x) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar logit(Scalar p) {
    return std::log(p / (Scalar(1) - p));
}

template <typename Scalar>
Mat3<Scalar> diag_exp2(const Vec3<Scalar>& log_std) {
    return (Scalar(2) * log_std).array().exp().matrix().asDiagonal();
}

} // namespace rgs
