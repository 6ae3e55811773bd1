// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/config.hpp"

#include "rgs/json_io.hpp"

namespace rgs {

namespace {

nlohmann::ordered_json range_to_json(const Range& r) { return nlohmann::ordered_json::array({r.lo, r.hi}); }

void get_range(const nlohmann::json& j, const char* key, const std::string& where, Range& out) {
    if (!j.contains(key)) return;
    const Vec2d v = vec_from_json<2>(j.at(key), where + "." + key);
    if (v[0] < 0 || v[1] < v[0]) throw ConfigError(where + "." + key, "expected [lo, hi] with 0 <= lo <= hi");
    out = Range{v[0], v[1]};
}

} // namespace

nlohmann::ordered_json flags_to_json(const MechanismFlags& f) {
    return {{"pose", f.pose}, {"motion_blur", f.motion_blur}, {"defocus", f.defocus}, {"color", f.color}};
}

MechanismFlags flags_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"pose", "motion_blur", "defocus", "color"});
    MechanismFlags f = MechanismFlags::all();
    get_optional(j, "pose", where, f.pose);
    get_optional(j, "motion_blur", where, f.motion_blur);
    get_optional(j, "defocus", where, f.defocus);
    get_optional(j, "color", where, f.color);
    return f;
}

nlohmann::ordered_json render_options_to_json(const RenderOptions& o) {
    return {{"sigma_cutoff", o.sigma_cutoff},
            {"min_alpha", o.min_alpha},
            {"transmittance_floor", o.transmittance_floor},
            {"alpha_clamp_max", o.alpha_clamp_max},
            {"background", to_json_array(o.background)},
            {"dilation", o.dilation}};
}

RenderOptions render_options_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"sigma_cutoff", "min_alpha", "transmittance_floor", "alpha_clamp_max", "background", "dilation"});
    RenderOptions o;
    get_optional(j, "sigma_cutoff", where, o.sigma_cutoff);
    get_optional(j, "min_alpha", where, o.min_alpha);
    get_optional(j, "transmittance_floor", where, o.transmittance_floor);
    get_optional(j, "alpha_clamp_max", where, o.alpha_clamp_max);
    if (j.contains("background")) o.background = vec_from_json<3>(j.at("background"), where + ".background");
    get_optional(j, "dilation", where, o.dilation);
    try {
        validate_render_options(o);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    return o;
}

nlohmann::ordered_json fit_config_to_json(const FitConfig& c) {
    const LearningRates& r = c.lr;
    return {{"iterations", c.iterations},
            {"seed", c.seed},
            {"lambda_l1", c.lambda_l1},
            {"lambda_dssim", c.lambda_dssim},
            {"prune_opacity_threshold", c.prune_opacity_threshold},
            {"prune_interval", c.prune_interval},
            {"initial_aperture", c.initial_aperture},
            {"scene_extent", c.scene_extent},
            {"mechanisms", flags_to_json(c.mechanisms)},
            {"lr",
             {{"position", r.position},
              {"position_final", r.position_final},
              {"scale", r.scale},
              {"rotation", r.rotation},
              {"opacity", r.opacity},
              {"sh", r.sh},
              {"pose_rotation", r.pose_rotation},
              {"pose_translation", r.pose_translation},
              {"blur", r.blur},
              {"defocus", r.defocus},
              {"color", r.color}}}};
}

FitConfig fit_config_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"iterations", "seed", "lambda_l1", "lambda_dssim", "prune_opacity_threshold",
                          "prune_interval", "initial_aperture", "scene_extent", "mechanisms", "lr"});
    FitConfig c;
    get_optional(j, "iterations", where, c.iterations);
    get_optional(j, "seed", where, c.seed);
    get_optional(j, "lambda_l1", where, c.lambda_l1);
    get_optional(j, "lambda_dssim", where, c.lambda_dssim);
    get_optional(j, "prune_opacity_threshold", where, c.prune_opacity_threshold);
    get_optional(j, "prune_interval", where, c.prune_interval);
    get_optional(j, "initial_aperture", where, c.initial_aperture);
    get_optional(j, "scene_extent", where, c.scene_extent);
    if (j.contains("mechanisms")) c.mechanisms = flags_from_json(j.at("mechanisms"), where + ".mechanisms");
    if (j.contains("lr")) {
        const auto& l = j.at("lr");
        const std::string w = where + ".lr";
        check_keys(l, w, {"position", "position_final", "scale", "rotation", "opacity", "sh", "pose_rotation",
                          "pose_translation", "blur", "defocus", "color"});
        LearningRates& r = c.lr;
        get_optional(l, "position", w, r.position);
        get_optional(l, "position_final", w, r.position_final);
        get_optional(l, "scale", w, r.scale);
        get_optional(l, "rotation", w, r.rotation);
        get_optional(l, "opacity", w, r.opacity);
        get_optional(l, "sh", w, r.sh);
        get_optional(l, "pose_rotation", w, r.pose_rotation);
        get_optional(l, "pose_translation", w, r.pose_translation);
        get_optional(l, "blur", w, r.blur);
        get_optional(l, "defocus", w, r.defocus);
        get_optional(l, "color", w, r.color);
    }
    try {
        validate_fit_config(c);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(where, e.what());
    }
    return c;
}

nlohmann::ordered_json adapt_config_to_json(const AdaptConfig& c) {
    return {{"steps", c.steps},
            {"lr_pose_rotation", c.lr_pose_rotation},
            {"lr_pose_translation", c.lr_pose_translation},
            {"lr_color", c.lr_color},
            {"lambda_l1", c.lambda_l1},
            {"lambda_dssim", c.lambda_dssim},
            {"scene_extent", c.scene_extent}};
}

AdaptConfig adapt_config_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"steps", "lr_pose_rotation", "lr_pose_translation", "lr_color", "lambda_l1",
                          "lambda_dssim", "scene_extent"});
    AdaptConfig c;
    get_optional(j, "steps", where, c.steps);
    get_optional(j, "lr_pose_rotation", where, c.lr_pose_rotation);
    get_optional(j, "lr_pose_translation", where, c.lr_pose_translation);
    get_optional(j, "lr_color", where, c.lr_color);
    get_optional(j, "lambda_l1", where, c.lambda_l1);
    get_optional(j, "lambda_dssim", where, c.lambda_dssim);
    get_optional(j, "scene_extent", where, c.scene_extent);
    if (c.steps < 0) throw ConfigError(where + ".steps", "must be >= 0");
    if (!(c.lr_pose_rotation > 0 && c.lr_pose_translation > 0 && c.lr_color > 0)) {
        throw ConfigError(where, "learning rates must be positive");
    }
    if (c.lambda_l1 < 0 || c.lambda_dssim < 0 || std::abs(c.lambda_l1 + c.lambda_dssim - 1.0) > 1e-9) {
        throw ConfigError(where, "lambda_l1 + lambda_dssim must equal 1");
    }
    return c;
}

nlohmann::ordered_json corruption_to_json(const CorruptionSpec& s) {
    return {{"rotation_blur_std", range_to_json(s.rotation_blur_std)},
            {"translation_blur_std", range_to_json(s.translation_blur_std)},
            {"pose_rotation", range_to_json(s.pose_rotation)},
            {"pose_translation", range_to_json(s.pose_translation)},
            {"color_matrix_std", s.color_matrix_std},
            {"color_offset_std", s.color_offset_std},
            {"aperture", range_to_json(s.aperture)},
            {"focus_inv_depth", range_to_json(s.focus_inv_depth)},
            {"seed", s.seed}};
}

CorruptionSpec corruption_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"rotation_blur_std", "translation_blur_std", "pose_rotation", "pose_translation",
                          "color_matrix_std", "color_offset_std", "aperture", "focus_inv_depth", "seed"});
    CorruptionSpec s;
    get_range(j, "rotation_blur_std", where, s.rotation_blur_std);
    get_range(j, "translation_blur_std", where, s.translation_blur_std);
    get_range(j, "pose_rotation", where, s.pose_rotation);
    get_range(j, "pose_translation", where, s.pose_translation);
    get_optional(j, "color_matrix_std", where, s.color_matrix_std);
    get_optional(j, "color_offset_std", where, s.color_offset_std);
    get_range(j, "aperture", where, s.aperture);
    get_range(j, "focus_inv_depth", where, s.focus_inv_depth);
    get_optional(j, "seed", where, s.seed);
    if (s.color_matrix_std < 0 || s.color_offset_std < 0) throw ConfigError(where, "color stds must be >= 0");
    return s;
}

nlohmann::ordered_json selection_to_json(const SelectionOptions& s) {
    return {{"k", s.k},
            {"min_dist", s.min_dist},
            {"min_angle_deg", s.min_angle_deg},
            {"mode", s.mode == ConflictMode::Conjunctive ? "conjunctive" : "disjunctive"}};
}

SelectionOptions selection_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"k", "min_dist", "min_angle_deg", "mode"});
    SelectionOptions s;
    get_optional(j, "k", where, s.k);
    get_optional(j, "min_dist", where, s.min_dist);
    get_optional(j, "min_angle_deg", where, s.min_angle_deg);
    if (j.contains("mode")) {
        const std::string m = get_required<std::string>(j, "mode", where);
        if (m == "conjunctive") s.mode = ConflictMode::Conjunctive;
        else if (m == "disjunctive") s.mode = ConflictMode::Disjunctive;
        else throw ConfigError(where + ".mode", "expected \"conjunctive\" or \"disjunctive\"");
    }
    if (s.k < 1) throw ConfigError(where + ".k", "must be >= 1");
    return s;
}

nlohmann::ordered_json synth_config_to_json(const SynthConfig& c) {
    return {{"n_primitives", c.n_primitives},
            {"extent", c.extent},
            {"sh_degree", c.sh_degree},
            {"views", c.views},
            {"width", c.width},
            {"height", c.height},
            {"focal_factor", c.focal_factor},
            {"oracle_samples", c.oracle_samples},
            {"init_position_std", c.init_position_std},
            {"init_log_scale_std", c.init_log_scale_std},
            {"selection", selection_to_json(c.selection)},
            {"corruption", corruption_to_json(c.corruption)}};
}

SynthConfig synth_config_from_json(const nlohmann::json& j, const std::string& where) {
    check_keys(j, where, {"n_primitives", "extent", "sh_degree", "views", "width", "height", "focal_factor",
                          "oracle_samples", "init_position_std", "init_log_scale_std", "selection", "corruption"});
    SynthConfig c;
    get_optional(j, "n_primitives", where, c.n_primitives);
    get_optional(j, "extent", where, c.extent);
    get_optional(j, "sh_degree", where, c.sh_degree);
    get_optional(j, "views", where, c.views);
    get_optional(j, "width", where, c.width);
    get_optional(j, "height", where, c.height);
    get_optional(j, "focal_factor", where, c.focal_factor);
    get_optional(j, "oracle_samples", where, c.oracle_samples);
    get_optional(j, "init_position_std", where, c.init_position_std);
    get_optional(j, "init_log_scale_std", where, c.init_log_scale_std);
    if (j.contains("selection")) c.selection = selection_from_json(j.at("selection"), where + ".selection");
    if (j.contains("corruption")) c.corruption = corruption_from_json(j.at("corruption"), where + ".corruption");
    if (c.n_primitives < 1) throw ConfigError(where + ".n_primitives", "must be >= 1");
    if (!(c.extent > 0)) throw ConfigError(where + ".extent", "must be positive");
    if (c.sh_degree < 0 || c.sh_degree > kMaxShDegree) throw ConfigError(where + ".sh_degree", "must be in [0, 3]");
    if (c.views < 1) throw ConfigError(where + ".views", "must be >= 1");
    if (c.width < 11 || c.height < 11) throw ConfigError(where + ".width", "images must be at least 11x11");
    if (!(c.focal_factor > 0)) throw ConfigError(where + ".focal_factor", "must be positive");
    if (c.oracle_samples < 1) throw ConfigError(where + ".oracle_samples", "must be >= 1");
    return c;
}

Config config_from_json(const nlohmann::json& doc) {
    check_keys(doc, "", {"render", "fit", "adapt", "synth", "selection"});
    Config c;
    if (doc.contains("render")) c.render = render_options_from_json(doc.at("render"), "render");
    if (doc.contains("fit")) c.fit = fit_config_from_json(doc.at("fit"), "fit");
    if (doc.contains("adapt")) c.adapt = adapt_config_from_json(doc.at("adapt"), "adapt");
    if (doc.contains("synth")) c.synth = synth_config_from_json(doc.at("synth"), "synth");
    if (doc.contains("selection")) c.selection = selection_from_json(doc.at("selection"), "selection");
    c.fit.render = c.render;
    c.adapt.render = c.render;
    c.synth.render = c.render;
    return c;
}

Config load_config(const std::filesystem::path& path) { return config_from_json(read_json_file(path)); }

nlohmann::ordered_json config_to_json(const Config& c) {
    return {{"render", render_options_to_json(c.render)},
            {"fit", fit_config_to_json(c.fit)},
            {"adapt", adapt_config_to_json(c.adapt)},
            {"synth", synth_config_to_json(c.synth)},
            {"selection", selection_to_json(c.selection)}};
}

} // namespace rgs
