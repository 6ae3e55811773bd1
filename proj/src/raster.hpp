// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Shared internals of the forward renderer and its adjoint.
#pragma once

#include "rgs/renderer.hpp"

#include <vector>

namespace rgs::detail {

/// Intermediates of the world-space stage of one primitive.
struct WorldCache {
    Vec4d q_unit;
    Mat3d rotation;   // of the primitive
    Vec3d scale2;     // exp(2 * log_scale)
    Mat3d sigma;
    double alpha;     // sigmoid(opacity_logit)
    Mat3d skew_mu;
    Mat3d inner;      // Sigma + [mu]x S_R [mu]x^T + S_t
    double mass_ratio;  // sqrt(det Sigma / det inner)
    WorldGaussian out;
};

/// Intermediates of the image-space stage.
struct ProjectionCache {
    Vec3d x_cam;
    Mat23d J;
    Mat23d T;        // J * R_wc
    Mat2d cov;       // before defocus, with dilation
    double radius;
    double defocus_ratio;  // sqrt(det cov / det cov')
    Vec3d view;      // mean - camera center
    Vec3d dir;
    ShBasis basis;
    Vec3d color_linear;
    Vec3d color;     // clamped decode, before the affine transform
};

WorldGaussian world_stage(const GaussianPrimitive& p, const EffectiveParams& eff, WorldCache* cache);

std::optional<Splat2D> project_stage(const WorldGaussian& g, const ShCoeffs& sh, int sh_degree,
                                     const PinholeCamera& cam, const EffectiveParams& eff,
                                     const RenderOptions& opts, ProjectionCache* cache);

/// Depth-sorted splats with, for each image row, the splats whose bounding
/// box covers it (in depth order).
struct Frame {
    int width = 0, height = 0;
    std::vector<Splat2D> splats;
    std::vector<std::vector<int>> rows;
};

Frame build_frame(std::vector<Splat2D> splats, int width, int height);

struct Contribution {
    int splat;       // index into Frame::splats
    double alpha;    // clamped alpha actually composited
    double falloff;  // exp(power)
    bool clamped;    // alpha hit alpha_clamp_max
    double dx, dy;
    double transmittance;  // before this splat
};

/// Front-to-back compositing of one pixel. Appends contributions when
/// `trace` is non-null. Returns the unclamped color including background.
Vec3d composite_pixel(const Frame& frame, int x, int y, const RenderOptions& opts, double* final_transmittance,
                      std::vector<Contribution>* trace);

ImageBuffer composite(const Frame& frame, const RenderOptions& opts);

/// Fixed row-band height of the deterministic reduction tree.
inline constexpr int kBandRows = 16;

} // namespace rgs::detail
