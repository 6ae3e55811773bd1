// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/robust_transforms.hpp"

namespace rgs {

EffectiveParams effective(const PerImageParams& p) {
    EffectiveParams e;
    if (p.enabled.pose) {
        e.pose_rotation = quat_to_rotation<double>(p.motion.rotation.normalized());
        e.pose_translation = p.motion.translation;
    }
    if (p.enabled.motion_blur) {
        e.blur_rotation_cov = diag_exp2<double>(p.motion.log_std_rotation);
        e.blur_translation_cov = diag_exp2<double>(p.motion.log_std_translation);
        e.has_blur = true;
    }
    if (p.enabled.defocus) {
        e.aperture = p.defocus.aperture;
        e.focus_inv_depth = p.defocus.focus_inv_depth;
    }
    if (p.enabled.color) {
        e.W = p.color.W;
        e.q = p.color.q;
    }
    return e;
}

ShCoeffs absorb_color_into_sh(const ShCoeffs& sh, const ColorParams& p) {
    // rows are basis functions, columns channels: decode = 0.5 + sh^T b
    ShCoeffs out = sh * p.W.transpose();
    const Vec3d offset = p.q + (p.W - Mat3d::Identity()) * Vec3d::Constant(0.5);
    out.row(0) += (offset / kShC0).transpose();
    return out;
}

PerImageParams initial_params(const MechanismFlags& flags, double focus_depth) {
    PerImageParams p;
    p.enabled = flags;
    p.defocus.aperture = 0.0;
    p.defocus.focus_inv_depth = 1.0 / focus_depth;
    return p;
}

nlohmann::ordered_json params_to_json(const PerImageParams& p) {
    nlohmann::ordered_json j;
    j["enabled"] = {{"pose", p.enabled.pose},
                    {"motion_blur", p.enabled.motion_blur},
                    {"defocus", p.enabled.defocus},
                    {"color", p.enabled.color}};
    j["pose"] = {{"rotation", to_json_array(p.motion.rotation)},
                 {"translation", to_json_array(p.motion.translation)}};
    j["motion_blur"] = {{"log_std_rotation", to_json_array(p.motion.log_std_rotation)},
                        {"log_std_translation", to_json_array(p.motion.log_std_translation)}};
    j["defocus"] = {{"aperture", p.defocus.aperture}, {"focus_inv_depth", p.defocus.focus_inv_depth}};
    j["color"] = {{"W", mat3_to_json(p.color.W)}, {"q", to_json_array(p.color.q)}};
    return j;
}

PerImageParams params_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"enabled", "pose", "motion_blur", "defocus", "color"});
    PerImageParams p;
    if (j.contains("enabled")) {
        const auto& e = j.at("enabled");
        check_keys(e, where + ".enabled", {"pose", "motion_blur", "defocus", "color"});
        get_optional(e, "pose", where + ".enabled", p.enabled.pose);
        get_optional(e, "motion_blur", where + ".enabled", p.enabled.motion_blur);
        get_optional(e, "defocus", where + ".enabled", p.enabled.defocus);
        get_optional(e, "color", where + ".enabled", p.enabled.color);
    }
    if (j.contains("pose")) {
        const auto& s = j.at("pose");
        check_keys(s, where + ".pose", {"rotation", "translation"});
        if (s.contains("rotation")) p.motion.rotation = vec_from_json<4>(s.at("rotation"), where + ".pose.rotation");
        if (s.contains("translation"))
            p.motion.translation = vec_from_json<3>(s.at("translation"), where + ".pose.translation");
        if (p.motion.rotation.norm() < 1e-12) throw ConfigError(where + ".pose.rotation", "zero quaternion");
    }
    if (j.contains("motion_blur")) {
        const auto& s = j.at("motion_blur");
        check_keys(s, where + ".motion_blur", {"log_std_rotation", "log_std_translation"});
        if (s.contains("log_std_rotation"))
            p.motion.log_std_rotation = vec_from_json<3>(s.at("log_std_rotation"), where + ".motion_blur.log_std_rotation");
        if (s.contains("log_std_translation"))
            p.motion.log_std_translation =
                vec_from_json<3>(s.at("log_std_translation"), where + ".motion_blur.log_std_translation");
    }
    if (j.contains("defocus")) {
        const auto& s = j.at("defocus");
        check_keys(s, where + ".defocus", {"aperture", "focus_inv_depth"});
        get_optional(s, "aperture", where + ".defocus", p.defocus.aperture);
        get_optional(s, "focus_inv_depth", where + ".defocus", p.defocus.focus_inv_depth);
    }
    if (j.contains("color")) {
        const auto& s = j.at("color");
        check_keys(s, where + ".color", {"W", "q"});
        if (s.contains("W")) p.color.W = mat3_from_json(s.at("W"), where + ".color.W");
        if (s.contains("q")) p.color.q = vec_from_json<3>(s.at("q"), where + ".color.q");
    }
    return p;
}

void save_params(const ParamsById& params, const std::filesystem::path& path) {
    nlohmann::ordered_json doc = nlohmann::ordered_json::object();
    for (const auto& [id, p] : params) doc[id] = params_to_json(p);
    write_json_file(doc, path);
}

ParamsById load_params(const std::filesystem::path& path) {
    const auto doc = read_json_file(path);
    if (!doc.is_object()) throw ConfigError(path.string(), "expected an object keyed by image id");
    ParamsById out;
    for (const auto& item : doc.items()) out[item.key()] = params_from_json(item.value(), item.key());
    return out;
}

} // namespace rgs
