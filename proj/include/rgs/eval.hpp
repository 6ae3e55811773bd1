// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Image metrics and the sharpness-based test-view selection.
#pragma once

#include "rgs/core_math.hpp"
#include "rgs/image.hpp"

#include <string>
#include <vector>

namespace rgs {

/// Max central-difference gradient magnitude of Rec.601 luma over interior
/// pixels. Higher is sharper.
double blurriness(const ImageBuffer& img);

double luma(const Vec3d& rgb);

struct ViewRecord {
    std::string id;
    Vec3d center = Vec3d::Zero();  // camera center, world
    Vec3d axis = Vec3d::UnitZ();   // optical axis, world, unit
    double score = 0.0;
    bool selected = false;
};

enum class ConflictMode {
    Conjunctive,  // conflict iff closer than min_dist AND within min_angle
    Disjunctive,  // conflict iff closer than min_dist OR within min_angle
};

struct SelectionOptions {
    int k = 10;
    double min_dist = 0.5;
    double min_angle_deg = 60.0;
    ConflictMode mode = ConflictMode::Conjunctive;
};

bool views_conflict(const ViewRecord& a, const ViewRecord& b, const SelectionOptions& opts);

/// Greedy by descending score (id ascending on ties). Returns the selected
/// views in selection order, with `selected` set.
std::vector<ViewRecord> select_test_views(const std::vector<ViewRecord>& views, const SelectionOptions& opts = {});

inline constexpr double kPsnrCap = 99.0;

double mse(const ImageBuffer& a, const ImageBuffer& b);
/// 10 log10(1 / MSE), data range 1; identical images report kPsnrCap.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Gaussian-window SSIM averaged over channels and valid window positions.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

struct SsimWithGrad {
    double value = 0.0;
    ImageBuffer grad;  // d ssim / d a
};
SsimWithGrad ssim_with_grad(const ImageBuffer& a, const ImageBuffer& b);

} // namespace rgs
