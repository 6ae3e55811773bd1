// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rgs/core_math.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rgs {

inline constexpr double kZNear = 1e-4;

/// Pinhole camera. Pixel (i, j) has its center at u = i, v = j.
struct PinholeCamera {
    std::string id;
    double fx = 1.0, fy = 1.0;
    double cx = 0.0, cy = 0.0;
    int width = 1, height = 1;
    Mat3d rotation = Mat3d::Identity();   // world -> camera
    Vec3d translation = Vec3d::Zero();    // world -> camera
    std::string image_path;

    Vec3d center() const { return -rotation.transpose() * translation; }
    /// Viewing direction (camera +z) in world coordinates.
    Vec3d forward() const { return rotation.row(2).transpose(); }
};

struct Projection {
    Vec2d pixel;
    double depth;
};

void validate_camera(const PinholeCamera& cam);

inline Vec3d to_camera(const PinholeCamera& cam, const Vec3d& x) {
    return cam.rotation * x + cam.translation;
}

/// Empty when the point is at or behind the near plane.
std::optional<Projection> project(const PinholeCamera& cam, const Vec3d& x_cam);

/// d(pixel)/d(x_cam). Empty when the point is behind the near plane.
std::optional<Mat23d> projection_jacobian(const PinholeCamera& cam, const Vec3d& x_cam);

/// Camera at `eye` looking at `target`, with `up` roughly the image -y axis.
PinholeCamera look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up, double focal, int width,
                      int height);

/// JSON camera list:
///   [{"id", "fx", "fy", "cx", "cy", "width", "height",
///     "rotation": [w, x, y, z], "translation": [x, y, z], "image_path"}]
/// rotation/translation map world to camera coordinates. An optional "split"
/// field ("train" / "test") is preserved.
struct CameraRecord {
    PinholeCamera camera;
    std::string split = "train";
};

std::vector<CameraRecord> load_cameras(const std::filesystem::path& path);
void save_cameras(const std::vector<CameraRecord>& cameras, const std::filesystem::path& path);

} // namespace rgs
