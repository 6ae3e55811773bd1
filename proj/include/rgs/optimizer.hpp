// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Adam-based scene fitting with per-image robustness parameters, and
// test-time adaptation of pose and color against a frozen scene.
#pragma once

#include "rgs/camera.hpp"
#include "rgs/gradients.hpp"
#include "rgs/image.hpp"
#include "rgs/renderer.hpp"
#include "rgs/robust_transforms.hpp"
#include "rgs/scene.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rgs {

struct LearningRates {
    double position = 1.6e-4;        // times scene extent
    double position_final = 1.6e-6;  // times scene extent; exponential decay target
    double scale = 5e-3;
    double rotation = 1e-3;
    double opacity = 5e-2;
    double sh = 2.5e-3;
    double pose_rotation = 1e-4;
    double pose_translation = 1e-4;  // times scene extent
    double blur = 1e-3;
    double defocus = 1e-3;
    double color = 5e-3;
};

struct FitConfig {
    int iterations = 2000;
    LearningRates lr;
    double lambda_l1 = 0.8;
    double lambda_dssim = 0.2;
    double prune_opacity_threshold = 0.005;
    int prune_interval = 100;  // 0 disables pruning
    std::uint64_t seed = 0;
    MechanismFlags mechanisms = MechanismFlags::all();
    /// Initial |A|. The loss is stationary in A at A = 0 (the radius enters
    /// squared), so a pinhole start would never leave it.
    double initial_aperture = 1.0;
    /// <= 0 means: measured from the initial primitive positions.
    double scene_extent = 0.0;
    RenderOptions render;
};

void validate_fit_config(const FitConfig& cfg);

struct AdamState {
    Eigen::VectorXd m, v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-15;

    AdamState() = default;
    explicit AdamState(Eigen::Index n) : m(Eigen::VectorXd::Zero(n)), v(Eigen::VectorXd::Zero(n)) {}
};

/// One bias-corrected Adam update; `lr` holds one rate per coordinate.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, const Eigen::VectorXd& lr);

struct TrainView {
    std::string id;
    PinholeCamera camera;
    ImageBuffer image;
};

struct PhotometricLoss {
    double loss = 0.0;
    double l1 = 0.0;
    double ssim = 0.0;
    ImageBuffer grad;  // d loss / d rendered
};

/// lambda_l1 * L1 + lambda_dssim * (1 - SSIM), with its gradient.
PhotometricLoss photometric_loss(const ImageBuffer& rendered, const ImageBuffer& target, double lambda_l1,
                                 double lambda_dssim);

struct LossRecord {
    int step = 0;
    std::string image_id;
    double loss = 0.0;
    double l1 = 0.0;
    double ssim = 0.0;
    int primitives = 0;
};

struct FitResult {
    Scene scene;
    std::vector<PerImageParams> params;  // aligned with the dataset
    std::vector<LossRecord> trace;
};

/// Largest axis-aligned span of the primitive positions (1 for a single point).
double scene_extent_of(const Scene& scene);

/// Median camera-space depth of the scene's positions over the given views.
double median_depth(const Scene& scene, const std::vector<TrainView>& views);

FitResult fit(const Scene& initial, const std::vector<TrainView>& dataset, const FitConfig& cfg);

void write_loss_csv(const std::vector<LossRecord>& trace, const std::filesystem::path& path);

/// Primitives with opacity below the threshold, unless that would empty the scene.
std::vector<int> prune_candidates(const Scene& scene, double opacity_threshold);

struct AdaptConfig {
    int steps = 1000;
    double lr_pose_rotation = 1e-4;
    double lr_pose_translation = 1e-4;  // times scene extent
    double lr_color = 5e-3;
    double lambda_l1 = 0.8;
    double lambda_dssim = 0.2;
    double scene_extent = 0.0;          // <= 0: measured from the scene
    RenderOptions render;
};

struct AdaptResult {
    PerImageParams params;
    double psnr_before = 0.0;
    double psnr_after = 0.0;
    std::vector<LossRecord> trace;
};

/// Optimizes pose and color only; the scene is read-only and blur/defocus
/// stay disabled.
AdaptResult test_time_adapt(const Scene& scene, const ImageBuffer& target, const PinholeCamera& cam,
                            const AdaptConfig& cfg = {});

} // namespace rgs
