// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/camera.hpp"

#include "rgs/json_io.hpp"

#include <fstream>
#include <stdexcept>

namespace rgs {

void validate_camera(const PinholeCamera& cam) {
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
        throw std::invalid_argument("camera '" + cam.id + "': focal lengths must be positive");
    }
    if (cam.width < 1 || cam.height < 1) {
        throw std::invalid_argument("camera '" + cam.id + "': image size must be at least 1x1");
    }
}

std::optional<Projection> project(const PinholeCamera& cam, const Vec3d& x_cam) {
    const double z = x_cam.z();
    if (!(z > kZNear)) return std::nullopt;
    return Projection{Vec2d(cam.fx * x_cam.x() / z + cam.cx, cam.fy * x_cam.y() / z + cam.cy), z};
}

std::optional<Mat23d> projection_jacobian(const PinholeCamera& cam, const Vec3d& x_cam) {
    const double z = x_cam.z();
    if (!(z > kZNear)) return std::nullopt;
    const double iz = 1.0 / z;
    Mat23d J;
    J << cam.fx * iz, 0.0, -cam.fx * x_cam.x() * iz * iz,
         0.0, cam.fy * iz, -cam.fy * x_cam.y() * iz * iz;
    return J;
}

PinholeCamera look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up, double focal, int width,
                      int height) {
    const Vec3d fwd = (target - eye).normalized();
    Vec3d right = fwd.cross(up);
    if (right.norm() < 1e-12) right = fwd.unitOrthogonal();
    right.normalize();
    const Vec3d down = fwd.cross(right);
    PinholeCamera cam;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = fwd.transpose();
    cam.translation = -cam.rotation * eye;
    cam.fx = cam.fy = focal;
    cam.width = width;
    cam.height = height;
    cam.cx = 0.5 * (width - 1);
    cam.cy = 0.5 * (height - 1);
    return cam;
}

std::vector<CameraRecord> load_cameras(const std::filesystem::path& path) {
    const auto doc = read_json_file(path);
    if (!doc.is_array()) throw ConfigError("cameras", "expected a JSON array of cameras");
    std::vector<CameraRecord> out;
    for (const auto& j : doc) {
        check_keys(j, "camera",
                   {"id", "fx", "fy", "cx", "cy", "width", "height", "rotation", "translation", "image_path", "split"});
        CameraRecord rec;
        auto& cam = rec.camera;
        cam.id = get_required<std::string>(j, "id", "camera");
        cam.fx = get_required<double>(j, "fx", "camera." + cam.id);
        cam.fy = get_required<double>(j, "fy", "camera." + cam.id);
        cam.cx = get_required<double>(j, "cx", "camera." + cam.id);
        cam.cy = get_required<double>(j, "cy", "camera." + cam.id);
        cam.width = get_required<int>(j, "width", "camera." + cam.id);
        cam.height = get_required<int>(j, "height", "camera." + cam.id);
        const Vec4d q = vec_from_json<4>(j.at("rotation"), "camera." + cam.id + ".rotation");
        if (q.norm() < 1e-12) throw ConfigError("camera." + cam.id + ".rotation", "zero quaternion");
        cam.rotation = quat_to_rotation<double>(q.normalized());
        cam.translation = vec_from_json<3>(j.at("translation"), "camera." + cam.id + ".translation");
        cam.image_path = j.value("image_path", std::string());
        rec.split = j.value("split", std::string("train"));
        if (rec.split != "train" && rec.split != "test") {
            throw ConfigError("camera." + cam.id + ".split", "must be 'train' or 'test'");
        }
        validate_camera(cam);
        out.push_back(std::move(rec));
    }
    return out;
}

void save_cameras(const std::vector<CameraRecord>& cameras, const std::filesystem::path& path) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& rec : cameras) {
        const auto& cam = rec.camera;
        const Eigen::Quaterniond q(cam.rotation);
        nlohmann::ordered_json j;
        j["id"] = cam.id;
        j["fx"] = cam.fx;
        j["fy"] = cam.fy;
        j["cx"] = cam.cx;
        j["cy"] = cam.cy;
        j["width"] = cam.width;
        j["height"] = cam.height;
        j["rotation"] = {q.w(), q.x(), q.y(), q.z()};
        j["translation"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
        j["image_path"] = cam.image_path;
        j["split"] = rec.split;
        doc.push_back(std::move(j));
    }
    write_json_file(doc, path);
}

} // namespace rgs
