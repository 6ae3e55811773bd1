// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/synth.hpp"

#include "rgs/config.hpp"
#include "rgs/json_io.hpp"
#include "rgs/ply.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace rgs {

namespace {

/// Independent stream for (seed, tag, index); fixed by the seed_seq algorithm.
Rng stream(std::uint64_t seed, std::uint32_t tag, std::uint32_t index = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag, index};
    return Rng(seq);
}

double draw(const Range& r, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double t = u(rng);  // always consumed so streams do not shift
    return r.lo + (r.hi - r.lo) * t;
}

Vec3d random_unit(Rng& rng) {
    Vec3d v;
    do {
        v = sample_standard_normal(rng);
    } while (v.norm() < 1e-9);
    return v.normalized();
}

Vec4d random_quaternion(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec4d q;
    do {
        q = Vec4d(n(rng), n(rng), n(rng), n(rng));
    } while (q.norm() < 1e-9);
    return q.normalized();
}

std::string view_id(int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "view_%03d", i);
    return buf;
}

constexpr double kTinyStd = 1e-12;

} // namespace

bool CorruptionSpec::is_zero() const {
    return rotation_blur_std.is_zero() && translation_blur_std.is_zero() && pose_rotation.is_zero() &&
           pose_translation.is_zero() && color_matrix_std == 0.0 && color_offset_std == 0.0 && aperture.is_zero();
}

Scene generate_scene(int n, double extent, int sh_degree, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_scene: n_primitives must be >= 1");
    if (!(extent > 0)) throw std::invalid_argument("generate_scene: extent must be positive");
    Rng rng = stream(seed, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Scene scene;
    scene.sh_degree = sh_degree;
    const double ls_lo = std::log(0.01 * extent), ls_hi = std::log(0.05 * extent);
    for (int k = 0; k < n; ++k) {
        GaussianPrimitive p = make_primitive(sh_degree);
        p.position = extent * Vec3d(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5);
        for (int i = 0; i < 3; ++i) p.log_scale[i] = ls_lo + (ls_hi - ls_lo) * u(rng);
        p.rotation = random_quaternion(rng);
        p.opacity_logit = logit(0.5 + 0.45 * u(rng));
        for (int c = 0; c < 3; ++c) p.sh(0, c) = 3.0 * (u(rng) - 0.5);
        for (int j = 1; j < p.sh.rows(); ++j) {
            const int band = static_cast<int>(std::sqrt(double(j)));
            const double mag = 0.25 * std::pow(0.5, band - 1);
            for (int c = 0; c < 3; ++c) p.sh(j, c) = mag * (2.0 * u(rng) - 1.0);
        }
        scene.primitives.push_back(p);
    }
    return scene;
}

std::vector<PinholeCamera> orbit_cameras(int n, double extent, int width, int height, double focal_factor) {
    if (n < 1) throw std::invalid_argument("orbit_cameras: n must be >= 1");
    std::vector<PinholeCamera> cams;
    const double radius = 2.5 * extent;
    const double max_el = 25.0 * std::numbers::pi / 180.0;
    for (int i = 0; i < n; ++i) {
        const double t = double(i) / double(n);
        const double az = 2.0 * std::numbers::pi * t;
        const double el = max_el * std::sin(6.0 * std::numbers::pi * t);
        const Vec3d eye = radius * Vec3d(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
        PinholeCamera cam = look_at(eye, Vec3d::Zero(), Vec3d::UnitZ(), focal_factor * width, width, height);
        cam.id = view_id(i);
        cam.image_path = "images/" + cam.id + ".png";
        cams.push_back(cam);
    }
    return cams;
}

PerImageParams draw_corruption(const CorruptionSpec& spec, int index) {
    Rng rng = stream(spec.seed, 1, static_cast<std::uint32_t>(index));
    std::normal_distribution<double> n(0.0, 1.0);
    PerImageParams p;
    p.enabled = MechanismFlags::none();

    const double s_rot = draw(spec.rotation_blur_std, rng);
    const double s_trans = draw(spec.translation_blur_std, rng);
    p.motion.log_std_rotation.setConstant(std::log(std::max(s_rot, kTinyStd)));
    p.motion.log_std_translation.setConstant(std::log(std::max(s_trans, kTinyStd)));
    p.enabled.motion_blur = !(spec.rotation_blur_std.is_zero() && spec.translation_blur_std.is_zero());

    const double angle = draw(spec.pose_rotation, rng);
    const Vec3d axis = random_unit(rng);
    p.motion.rotation = Vec4d(std::cos(0.5 * angle), std::sin(0.5 * angle) * axis.x(),
                              std::sin(0.5 * angle) * axis.y(), std::sin(0.5 * angle) * axis.z());
    const double shift = draw(spec.pose_translation, rng);
    p.motion.translation = shift * random_unit(rng);
    p.enabled.pose = !(spec.pose_rotation.is_zero() && spec.pose_translation.is_zero());

    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) p.color.W(r, c) = (r == c ? 1.0 : 0.0) + spec.color_matrix_std * n(rng);
    for (int c = 0; c < 3; ++c) p.color.q[c] = spec.color_offset_std * n(rng);
    p.enabled.color = spec.color_matrix_std > 0.0 || spec.color_offset_std > 0.0;

    p.defocus.aperture = draw(spec.aperture, rng);
    p.defocus.focus_inv_depth = draw(spec.focus_inv_depth, rng);
    p.enabled.defocus = !spec.aperture.is_zero();
    return p;
}

double coverage(const ImageBuffer& img, const Vec3d& background) {
    if (img.data.empty()) return 0.0;
    int hit = 0;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            if ((img.pixel(x, y) - background).cwiseAbs().maxCoeff() > 1.0 / 255.0) ++hit;
    return double(hit) / double(img.width * img.height);
}

SynthDataset generate_dataset(const Scene& scene, const std::vector<PinholeCamera>& cameras,
                              const CorruptionSpec& spec, int oracle_samples, const RenderOptions& opts) {
    if (cameras.empty()) throw std::invalid_argument("generate_dataset: no cameras");
    SynthDataset ds;
    PerImageParams identity;
    identity.enabled = MechanismFlags::none();
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        const PerImageParams truth = draw_corruption(spec, static_cast<int>(i));
        ds.cameras.push_back({cameras[i], "train"});
        ds.truth.push_back(truth);
        ds.sharp.push_back(render(scene, cameras[i], identity, opts));
        if (truth.enabled.motion_blur) {
            Rng seeder = stream(spec.seed, 2, static_cast<std::uint32_t>(i));
            ds.observed.push_back(render_mc_oracle(scene, cameras[i], truth, oracle_samples, seeder(), opts));
        } else {
            ds.observed.push_back(render(scene, cameras[i], truth, opts));
        }
    }
    return ds;
}

Scene perturb_scene(const Scene& scene, double position_std, double log_scale_std, std::uint64_t seed) {
    Rng rng = stream(seed, 3);
    std::normal_distribution<double> n(0.0, 1.0);
    Scene out = scene;
    for (auto& p : out.primitives) {
        for (int i = 0; i < 3; ++i) p.position[i] += position_std * n(rng);
        for (int i = 0; i < 3; ++i) p.log_scale[i] += log_scale_std * n(rng);
        Vec4d q = p.rotation.normalized();
        for (int i = 0; i < 4; ++i) q[i] += 0.1 * n(rng);
        p.rotation = q.normalized();
        p.opacity_logit = logit(0.6);
        for (int c = 0; c < 3; ++c) p.sh(0, c) += 0.3 * n(rng);
        p.sh.bottomRows(p.sh.rows() - 1).setZero();
    }
    return out;
}

void write_synth_dataset(const SynthConfig& cfg, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const std::uint64_t seed = cfg.corruption.seed;
    const Scene scene = generate_scene(cfg.n_primitives, cfg.extent, cfg.sh_degree, seed);
    const auto cams = orbit_cameras(cfg.views, cfg.extent, cfg.width, cfg.height, cfg.focal_factor);
    SynthDataset ds = generate_dataset(scene, cams, cfg.corruption, cfg.oracle_samples, cfg.render);

    std::vector<ViewRecord> records;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        records.push_back({cams[i].id, cams[i].center(), cams[i].forward(), blurriness(ds.observed[i]), false});
    }
    std::set<std::string> test_ids;
    for (const auto& v : select_test_views(records, cfg.selection)) test_ids.insert(v.id);
    for (auto& rec : ds.cameras)
        if (test_ids.count(rec.camera.id)) rec.split = "test";

    fs::create_directories(dir / "images");
    fs::create_directories(dir / "sharp");
    ParamsById truth;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        write_png(ds.observed[i], dir / cams[i].image_path);
        write_png(ds.sharp[i], dir / "sharp" / (cams[i].id + ".png"));
        truth[cams[i].id] = ds.truth[i];
    }
    save_cameras(ds.cameras, dir / "cameras.json");
    save_params(truth, dir / "truth_params.json");
    nlohmann::ordered_json meta;
    meta["seed"] = seed;
    meta["synth"] = synth_config_to_json(cfg);
    meta["render"] = render_options_to_json(cfg.render);
    meta["scene_extent"] = cfg.extent;
    write_json_file(meta, dir / "meta.json");
    write_ply(scene, dir / "scene.ply");
    write_ply(perturb_scene(scene, cfg.init_position_std * cfg.extent, cfg.init_log_scale_std, seed),
              dir / "init.ply");
}

CorruptionSpec corruption_preset(const std::string& name, double extent, std::uint64_t seed) {
    CorruptionSpec s;
    s.seed = seed;
    const bool combined = name == "combined";
    if (name == "blur" || combined) {
        s.rotation_blur_std = {0.005, 0.02};
        s.translation_blur_std = {0.005 * extent, 0.025 * extent};
    }
    if (name == "pose" || combined) {
        s.pose_rotation = {0.005, 0.015};
        s.pose_translation = {0.005 * extent, 0.015 * extent};
    }
    if (name == "color" || combined) {
        s.color_matrix_std = 0.05;
        s.color_offset_std = 0.03;
    }
    if (name == "defocus") {
        s.aperture = {6.0 * extent, 12.0 * extent};
        s.focus_inv_depth = {0.35 / extent, 0.5 / extent};
    }
    if (!combined && name != "none" && name != "blur" && name != "pose" && name != "color" && name != "defocus") {
        throw std::invalid_argument("unknown corruption preset '" + name +
                                    "' (expected none, pose, blur, defocus, color, combined)");
    }
    return s;
}

GradientFixture make_gradient_fixture(std::uint64_t seed, int n, int size) {
    Rng rng = stream(seed, 4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    GradientFixture f;
    f.scene.sh_degree = 3;
    for (int k = 0; k < n; ++k) {
        GaussianPrimitive p = make_primitive(3);
        p.position = 0.3 * Vec3d(u(rng), u(rng), u(rng));
        p.log_scale = Vec3d::Constant(std::log(0.12)) + 0.3 * Vec3d(u(rng), u(rng), u(rng));
        p.rotation = Vec4d(1.0 + 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng), 0.3 * u(rng));
        p.opacity_logit = 0.5 * u(rng);
        for (int j = 0; j < p.sh.rows(); ++j)
            for (int c = 0; c < 3; ++c) p.sh(j, c) = 0.3 * u(rng) / (1.0 + j);
        f.scene.primitives.push_back(p);
    }
    f.camera = look_at(Vec3d(0.2, -0.3, -2.5), Vec3d::Zero(), Vec3d(0, -1, 0), 1.25 * size, size, size);
    f.camera.id = "fixture";
    PerImageParams& q = f.params;
    q.enabled = MechanismFlags::all();
    q.motion.rotation = Vec4d(1.0, 0.01, -0.01, 0.005);
    q.motion.translation = Vec3d(0.01, 0.02, -0.01);
    q.motion.log_std_rotation = Vec3d(std::log(0.02), std::log(0.015), std::log(0.025));
    q.motion.log_std_translation = Vec3d(std::log(0.03), std::log(0.02), std::log(0.025));
    q.defocus.aperture = 3.0;
    q.defocus.focus_inv_depth = 0.35;
    q.color.W << 1.05, 0.02, 0.0, 0.01, 0.95, 0.03, 0.0, -0.02, 1.02;
    q.color.q = Vec3d(0.02, -0.01, 0.03);
    return f;
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path cam_path = dir / "cameras.json";
    if (!fs::exists(cam_path)) throw ConfigError(cam_path.string(), "dataset has no cameras.json");
    LoadedDataset out;
    for (const auto& rec : load_cameras(cam_path)) {
        const PinholeCamera& cam = rec.camera;
        const fs::path observed = dir / (cam.image_path.empty() ? "images/" + cam.id + ".png" : cam.image_path);
        TrainView view{cam.id, cam, read_png(observed)};
        if (view.image.width != cam.width || view.image.height != cam.height) {
            throw ConfigError(observed.string(), "image size does not match camera '" + cam.id + "'");
        }
        const fs::path sharp = dir / "sharp" / (cam.id + ".png");
        const bool test = rec.split == "test";
        if (fs::exists(sharp)) (test ? out.test_sharp : out.train_sharp).push_back({cam.id, cam, read_png(sharp)});
        (test ? out.test : out.train).push_back(std::move(view));
    }
    if (fs::exists(dir / "truth_params.json")) out.truth = load_params(dir / "truth_params.json");
    if (fs::exists(dir / "init.ply")) out.init = read_ply(dir / "init.ply");
    if (fs::exists(dir / "scene.ply")) out.truth_scene = read_ply(dir / "scene.ply");
    return out;
}

} // namespace rgs
