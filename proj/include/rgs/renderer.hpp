// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// CPU forward renderer. Per primitive: motion-blur update in world space,
// projection to a 2D Gaussian, defocus inflation, opacity rescaling and
// color decode with the per-image affine transform. Splats are then sorted
// by camera depth and alpha-composited front to back per pixel.
#pragma once

#include "rgs/camera.hpp"
#include "rgs/image.hpp"
#include "rgs/robust_transforms.hpp"
#include "rgs/scene.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace rgs {

struct RenderOptions {
    double sigma_cutoff = 3.0;
    double min_alpha = 1.0 / 255.0;
    double transmittance_floor = 1e-4;
    double alpha_clamp_max = 0.999;
    Vec3d background = Vec3d::Zero();
    /// Added to every projected covariance before defocus (pixels^2).
    double dilation = 0.3;
};

void validate_render_options(const RenderOptions& opts);

struct Splat2D {
    int primitive = -1;
    Vec2d mean2d;
    Mat2d cov2d;       // after dilation and defocus
    Vec3d conic;       // (a, b, c) of cov2d^-1 = [[a, b], [b, c]]
    double depth = 0;
    double alpha_eff = 0;
    Vec3d color;
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounding box
};

/// A primitive after the world-space (motion blur / pose) stage.
struct WorldGaussian {
    Vec3d mean;
    Mat3d cov;
    double alpha;
};

/// Projects a world-space Gaussian. Empty when culled (behind the camera,
/// entirely outside the image, or degenerate).
std::optional<Splat2D> splat(const WorldGaussian& g, const ShCoeffs& sh, int sh_degree, const PinholeCamera& cam,
                             const EffectiveParams& eff, const RenderOptions& opts);

ImageBuffer render(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                   const RenderOptions& opts = {});

/// Averages n_samples renders, each under one exact draw of the random world
/// transform shared by all primitives. Blur is then zero in the closed-form
/// stage; pose, defocus and color are applied as in render().
ImageBuffer render_mc_oracle(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                             int n_samples, std::uint64_t seed, const RenderOptions& opts = {});

/// Renders already-transformed world Gaussians (no motion-blur stage).
ImageBuffer render_world(const std::vector<WorldGaussian>& gaussians, const Scene& scene, const PinholeCamera& cam,
                         const EffectiveParams& eff, const RenderOptions& opts);

} // namespace rgs
