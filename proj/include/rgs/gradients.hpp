// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Reverse-mode derivative of render() with respect to every primitive
// parameter and the per-image robustness parameters, plus a central
// finite-difference checker.
//
// Reduction tree: pixel contributions are summed per splat inside fixed
// 16-row bands (in pixel order), bands are summed in band order, and the
// per-image terms are summed over primitives in index order. None of this
// depends on the worker count, so gradients are bit-identical for any
// --threads value.
#pragma once

#include "rgs/camera.hpp"
#include "rgs/image.hpp"
#include "rgs/renderer.hpp"
#include "rgs/robust_transforms.hpp"
#include "rgs/scene.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rgs {

struct PrimitiveGrad {
    Vec3d position = Vec3d::Zero();
    Vec3d log_scale = Vec3d::Zero();
    Vec4d rotation = Vec4d::Zero();
    double opacity_logit = 0.0;
    ShCoeffs sh;
};

struct ImageParamGrad {
    Vec4d pose_rotation = Vec4d::Zero();
    Vec3d pose_translation = Vec3d::Zero();
    Vec3d log_std_rotation = Vec3d::Zero();
    Vec3d log_std_translation = Vec3d::Zero();
    double aperture = 0.0;
    double focus_inv_depth = 0.0;
    Mat3d W = Mat3d::Zero();
    Vec3d q = Vec3d::Zero();
};

struct Gradients {
    std::vector<PrimitiveGrad> primitives;
    /// Zero for mechanisms disabled in the params.
    ImageParamGrad image;
};

/// dL/d(params) given dL/d(rendered image). Pixels where the final [0, 1]
/// clamp is active pass no gradient.
Gradients render_backward(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                          const ImageBuffer& grad_out, const RenderOptions& opts = {});

/// Render and backward in one pass, sharing the forward work.
struct RenderWithGrad {
    ImageBuffer image;
    Gradients grad;
};
RenderWithGrad render_with_backward(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                                    const std::function<ImageBuffer(const ImageBuffer&)>& loss_grad,
                                    const RenderOptions& opts = {});

enum class ParamGroup {
    Position,
    LogScale,
    Rotation,
    Opacity,
    Sh,
    PoseRotation,
    PoseTranslation,
    BlurRotation,
    BlurTranslation,
    DefocusAperture,
    DefocusFocus,
    ColorW,
    ColorQ,
};
inline constexpr int kParamGroupCount = 13;
const char* group_name(ParamGroup g);

/// Flat addressing of all optimizable scalars: primitives first, each as
/// position(3) log_scale(3) rotation(4) opacity(1) sh(3K, basis-major), then
/// images, each as pose quaternion(4) translation(3) log_std_rotation(3)
/// log_std_translation(3) aperture(1) focus_inv_depth(1) W(9, row-major) q(3).
struct ParamLayout {
    int n_primitives = 0;
    int sh_degree = 0;
    int n_images = 0;

    static constexpr int kImageStride = 27;
    int primitive_stride() const { return 11 + 3 * sh_coeff_count(sh_degree); }
    Eigen::Index size() const {
        return Eigen::Index(n_primitives) * primitive_stride() + Eigen::Index(n_images) * kImageStride;
    }
    Eigen::Index primitive_offset(int k) const { return Eigen::Index(k) * primitive_stride(); }
    Eigen::Index image_offset(int i) const {
        return Eigen::Index(n_primitives) * primitive_stride() + Eigen::Index(i) * kImageStride;
    }
    ParamGroup group_of(Eigen::Index index) const;
};

Eigen::VectorXd flatten(const Scene& scene, const std::vector<PerImageParams>& images);
void unflatten(const Eigen::VectorXd& theta, Scene& scene, std::vector<PerImageParams>& images);
/// Writes a single render's gradient into a layout-sized vector (image i).
void scatter_gradient(const Gradients& g, const ParamLayout& layout, int image, Eigen::VectorXd& out);

/// Central differences with h_i = max(h_rel * |theta_i|, 1e-6).
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& loss, const Eigen::VectorXd& theta,
                            double h_rel = 1e-4);

struct GroupReport {
    double max_rel_error = 0.0;   // over coordinates with |fd| >= 1e-8
    double max_abs_error = 0.0;   // over coordinates with |fd| < 1e-8
    Eigen::Index worst = -1;
    int compared = 0;
    int excluded = 0;             // too close to a clamp / cutoff boundary
    bool passed = true;
};

struct GradReport {
    std::array<GroupReport, kParamGroupCount> groups;
    bool passed = true;
};

inline constexpr double kGradRelTolerance = 1e-3;
inline constexpr double kGradAbsTolerance = 1e-6;

/// Compares render_backward against fd_gradient for the loss
/// sum(w * render), with w a seeded random adjoint. Coordinates whose
/// derivative is not smooth within 2h (fd at h and h/2 disagree) are
/// excluded. Quaternion gradients are projected onto the unit sphere's
/// tangent before comparison.
GradReport check_gradients(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                           std::uint64_t seed, const RenderOptions& opts = {});

std::string format_report(const GradReport& report);

} // namespace rgs
