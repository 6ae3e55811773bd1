// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Per-image robustness transforms applied to Gaussian primitives:
//
//  * motion blur / pose: a random rigid world transform
//        zeta(x, eps) = R (exp(S_R^1/2 eps_R) x + S_t^1/2 eps_t) + t
//    linearized at (mu, 0), giving mu' = R mu + t and
//        Sigma' = R (Sigma + [mu]x S_R [mu]x^T + S_t) R^T;
//  * defocus: isotropic inflation of the projected covariance by the
//    squared circle-of-confusion radius A (rho - 1/depth);
//  * color: affine map W c + q of the decoded color.
//
// Covariance inflation is paired with an opacity rescale that keeps
// alpha * sqrt(det Sigma) constant.
#pragma once

#include "rgs/core_math.hpp"
#include "rgs/json_io.hpp"
#include "rgs/scene.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <string>

namespace rgs {

inline constexpr double kInitialBlurStd = 1e-4;

struct MotionBlurParams {
    Vec4d rotation = Vec4d(1, 0, 0, 0);  // (w, x, y, z), normalized on use
    Vec3d translation = Vec3d::Zero();
    Vec3d log_std_rotation = Vec3d::Constant(std::log(kInitialBlurStd));
    Vec3d log_std_translation = Vec3d::Constant(std::log(kInitialBlurStd));
};

struct DefocusParams {
    double aperture = 0.0;        // A, pixels * scene units
    double focus_inv_depth = 1.0; // rho, 1 / scene units
};

struct ColorParams {
    Mat3d W = Mat3d::Identity();
    Vec3d q = Vec3d::Zero();
};

/// Which mechanisms are active for an image. A disabled mechanism behaves
/// exactly like its identity parameters.
struct MechanismFlags {
    bool pose = false;
    bool motion_blur = false;
    bool defocus = false;
    bool color = false;

    static MechanismFlags all() { return {true, true, true, true}; }
    static MechanismFlags none() { return {}; }
    bool operator==(const MechanismFlags&) const = default;
};

struct PerImageParams {
    MotionBlurParams motion;
    DefocusParams defocus;
    ColorParams color;
    MechanismFlags enabled;
};

/// The per-image quantities the renderer consumes after applying the flags.
struct EffectiveParams {
    Mat3d pose_rotation = Mat3d::Identity();
    Vec3d pose_translation = Vec3d::Zero();
    Mat3d blur_rotation_cov = Mat3d::Zero();
    Mat3d blur_translation_cov = Mat3d::Zero();
    double aperture = 0.0;
    double focus_inv_depth = 0.0;
    Mat3d W = Mat3d::Identity();
    Vec3d q = Vec3d::Zero();
    bool has_blur = false;
};

EffectiveParams effective(const PerImageParams& p);

template <typename Scalar>
struct BlurredGaussian {
    Vec3<Scalar> mean;
    Mat3<Scalar> cov;
    Scalar alpha;
};

/// Linearized motion-blur update of one primitive.
template <typename Scalar>
BlurredGaussian<Scalar> motion_blur_transform(const Vec3<Scalar>& mu, const Mat3<Scalar>& sigma, Scalar alpha,
                                              const Mat3<Scalar>& pose_rotation, const Vec3<Scalar>& pose_translation,
                                              const Mat3<Scalar>& blur_rotation_cov,
                                              const Mat3<Scalar>& blur_translation_cov) {
    const Mat3<Scalar> K = skew(mu);
    const Mat3<Scalar> inner = sigma + K * blur_rotation_cov * K.transpose() + blur_translation_cov;
    BlurredGaussian<Scalar> out;
    out.mean = pose_rotation * mu + pose_translation;
    out.cov = pose_rotation * inner * pose_rotation.transpose();
    // det(R M R^T) == det(M) for a rotation R
    out.alpha = alpha * std::sqrt(sigma.determinant() / inner.determinant());
    return out;
}

inline BlurredGaussian<double> motion_blur_transform(const Vec3d& mu, const Mat3d& sigma, double alpha,
                                                     const PerImageParams& p) {
    const EffectiveParams e = effective(p);
    return motion_blur_transform<double>(mu, sigma, alpha, e.pose_rotation, e.pose_translation,
                                         e.blur_rotation_cov, e.blur_translation_cov);
}

/// The exact (non-linearized) random world transform for one noise draw.
template <typename Scalar>
Vec3<Scalar> zeta_exact(const Vec3<Scalar>& x, const Vec3<Scalar>& eps_rotation, const Vec3<Scalar>& eps_translation,
                        const Mat3<Scalar>& pose_rotation, const Vec3<Scalar>& pose_translation,
                        const Mat3<Scalar>& blur_rotation_cov, const Mat3<Scalar>& blur_translation_cov) {
    const Mat3<Scalar> E = so3_exp<Scalar>(spd_factor<Scalar>(blur_rotation_cov) * eps_rotation);
    return pose_rotation * (E * x + spd_factor<Scalar>(blur_translation_cov) * eps_translation) + pose_translation;
}

inline Vec3d zeta_exact(const Vec3d& x, const Vec3d& eps_rotation, const Vec3d& eps_translation,
                        const PerImageParams& p) {
    const EffectiveParams e = effective(p);
    return zeta_exact<double>(x, eps_rotation, eps_translation, e.pose_rotation, e.pose_translation,
                              e.blur_rotation_cov, e.blur_translation_cov);
}

/// Signed circle-of-confusion radius; only its square is used.
template <typename Scalar>
Scalar defocus_radius(Scalar depth, Scalar aperture, Scalar focus_inv_depth) {
    return aperture * (focus_inv_depth - Scalar(1) / depth);
}

inline double defocus_radius(double depth, const DefocusParams& p) {
    return defocus_radius<double>(depth, p.aperture, p.focus_inv_depth);
}

template <typename Scalar>
struct Defocused2D {
    Mat2<Scalar> cov;
    Scalar alpha;
};

template <typename Scalar>
Defocused2D<Scalar> apply_defocus(const Mat2<Scalar>& cov2d, Scalar alpha, Scalar radius) {
    Defocused2D<Scalar> out;
    out.cov = cov2d;
    const Scalar r2 = radius * radius;
    out.cov(0, 0) += r2;
    out.cov(1, 1) += r2;
    out.alpha = alpha * std::sqrt(cov2d.determinant() / out.cov.determinant());
    return out;
}

template <typename Scalar>
Vec3<Scalar> apply_color_affine(const Vec3<Scalar>& rgb, const Mat3<Scalar>& W, const Vec3<Scalar>& q) {
    return W * rgb + q;
}

inline Vec3d apply_color_affine(const Vec3d& rgb, const ColorParams& p) {
    return apply_color_affine<double>(rgb, p.W, p.q);
}

/// Folds (W, q) into SH coefficients so that the plain decoder reproduces
/// W * decode(f) + q for every direction (before the decoder's clamp).
ShCoeffs absorb_color_into_sh(const ShCoeffs& sh, const ColorParams& p);

/// Defaults for a freshly initialized image: identity pose and color,
/// near-zero blur, pinhole defocus focused at `focus_depth`.
PerImageParams initial_params(const MechanismFlags& flags, double focus_depth);

/// JSON sidecar keyed by image id. See README for the schema.
using ParamsById = std::map<std::string, PerImageParams>;
void save_params(const ParamsById& params, const std::filesystem::path& path);
ParamsById load_params(const std::filesystem::path& path);

nlohmann::ordered_json params_to_json(const PerImageParams& p);
PerImageParams params_from_json(const nlohmann::json& j, const std::string& where);

} // namespace rgs
