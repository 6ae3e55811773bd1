// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// rgs: synth / fit / render / adapt / eval / check / export.
// Exit codes: 0 success, 1 invalid input or failed check, 2 runtime failure.
#include "rgs/config.hpp"
#include "rgs/eval.hpp"
#include "rgs/gradients.hpp"
#include "rgs/json_io.hpp"
#include "rgs/optimizer.hpp"
#include "rgs/parallel.hpp"
#include "rgs/ply.hpp"
#include "rgs/renderer.hpp"
#include "rgs/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace rgs;

namespace {

/// Bad user input detected after parsing; reported with exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Config load_config_or_default(const std::string& path) {
    return path.empty() ? Config{} : load_config(path);
}

MechanismFlags parse_mechanisms(const std::string& text) {
    if (text == "all") return MechanismFlags::all();
    if (text == "none") return MechanismFlags::none();
    MechanismFlags f = MechanismFlags::none();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "pose") f.pose = true;
        else if (item == "motion_blur") f.motion_blur = true;
        else if (item == "defocus") f.defocus = true;
        else if (item == "color") f.color = true;
        else throw UsageError("--mechanisms: unknown mechanism '" + item + "' (expected all, none, or a comma list of pose, motion_blur, defocus, color)");
    }
    return f;
}

std::vector<TrainView> views_for(const LoadedDataset& ds, const std::string& split, bool sharp) {
    std::vector<TrainView> out;
    auto add = [&](const std::vector<TrainView>& v) { out.insert(out.end(), v.begin(), v.end()); };
    if (split == "test" || split == "all") add(sharp ? ds.test_sharp : ds.test);
    if (split == "train" || split == "all") add(sharp ? ds.train_sharp : ds.train);
    if (split != "test" && split != "train" && split != "all") {
        throw UsageError("--split: expected test, train or all");
    }
    return out;
}

PerImageParams params_or_identity(const ParamsById& params, const std::string& id) {
    const auto it = params.find(id);
    if (it != params.end()) return it->second;
    PerImageParams p;
    p.enabled = MechanismFlags::none();
    return p;
}

// --- subcommands -----------------------------------------------------------

struct SynthArgs {
    std::string out, config, preset;
    std::uint64_t seed = 0;
    int samples = 0;
};

int cmd_synth(const SynthArgs& a) {
    Config cfg = load_config_or_default(a.config);
    SynthConfig sc = cfg.synth;
    if (!a.preset.empty()) sc.corruption = corruption_preset(a.preset, sc.extent, a.seed);
    sc.corruption.seed = a.seed;
    if (a.samples > 0) sc.oracle_samples = a.samples;
    write_synth_dataset(sc, a.out);
    std::cout << "wrote dataset to " << a.out << " (" << sc.views << " views, seed " << a.seed << ")\n";
    return 0;
}

struct FitArgs {
    std::string data, out, config, init, mechanisms;
    int iterations = -1;
    long long seed = -1;
};

int cmd_fit(const FitArgs& a) {
    Config cfg = load_config_or_default(a.config);
    FitConfig fc = cfg.fit;
    if (a.iterations >= 0) fc.iterations = a.iterations;
    if (a.seed >= 0) fc.seed = static_cast<std::uint64_t>(a.seed);
    if (!a.mechanisms.empty()) fc.mechanisms = parse_mechanisms(a.mechanisms);
    const LoadedDataset ds = load_dataset(a.data);
    const fs::path init_path = a.init.empty() ? fs::path(a.data) / "init.ply" : fs::path(a.init);
    if (!fs::exists(init_path)) throw UsageError("--init: file not found: " + init_path.string());
    const Scene init = read_ply(init_path);
    const FitResult r = fit(init, ds.train, fc);
    fs::create_directories(a.out);
    write_ply(r.scene, fs::path(a.out) / "scene.ply");
    ParamsById params;
    for (std::size_t i = 0; i < ds.train.size(); ++i) params[ds.train[i].id] = r.params[i];
    save_params(params, fs::path(a.out) / "params.json");
    write_loss_csv(r.trace, fs::path(a.out) / "loss.csv");
    if (!r.trace.empty()) {
        std::printf("fit: %d steps, final loss %.6f, %zu primitives\n", fc.iterations, r.trace.back().loss,
                    r.scene.size());
    }
    return 0;
}

struct RenderArgs {
    std::string scene, cameras, out, params, config;
    int mc = 0;
    std::uint64_t seed = 0;
    bool raw = false;
};

int cmd_render(const RenderArgs& a) {
    const Config cfg = load_config_or_default(a.config);
    const Scene scene = read_ply(a.scene);
    const auto cams = load_cameras(a.cameras);
    const ParamsById params = a.params.empty() ? ParamsById{} : load_params(a.params);
    fs::create_directories(a.out);
    for (const auto& rec : cams) {
        const PinholeCamera& cam = rec.camera;
        const PerImageParams p = params_or_identity(params, cam.id);
        const ImageBuffer img = a.mc > 0 ? render_mc_oracle(scene, cam, p, a.mc, a.seed, cfg.render)
                                         : render(scene, cam, p, cfg.render);
        write_png(img, fs::path(a.out) / (cam.id + ".png"));
        if (a.raw) write_npy(img, fs::path(a.out) / (cam.id + ".npy"));
    }
    std::cout << "rendered " << cams.size() << " views to " << a.out << "\n";
    return 0;
}

struct AdaptArgs {
    std::string scene, data, out, config, split = "test", target = "observed";
    int steps = -1;
};

int cmd_adapt(const AdaptArgs& a) {
    const Config cfg = load_config_or_default(a.config);
    AdaptConfig ac = cfg.adapt;
    if (a.steps >= 0) ac.steps = a.steps;
    if (a.target != "observed" && a.target != "sharp") throw UsageError("--target: expected observed or sharp");
    const Scene scene = read_ply(a.scene);
    const LoadedDataset ds = load_dataset(a.data);
    const auto views = views_for(ds, a.split, a.target == "sharp");
    fs::create_directories(a.out);
    ParamsById adapted;
    std::ofstream csv(fs::path(a.out) / "adapt.csv");
    csv << "image_id,psnr_before,psnr_after\n";
    for (const auto& v : views) {
        const AdaptResult r = test_time_adapt(scene, v.image, v.camera, ac);
        adapted[v.id] = r.params;
        csv << v.id << ',' << r.psnr_before << ',' << r.psnr_after << '\n';
        std::printf("%s: PSNR %.3f -> %.3f\n", v.id.c_str(), r.psnr_before, r.psnr_after);
    }
    save_params(adapted, fs::path(a.out) / "adapted_params.json");
    return 0;
}

struct EvalArgs {
    std::string data, scene, params, out, config, split = "test", target = "sharp";
};

int cmd_eval(const EvalArgs& a) {
    const Config cfg = load_config_or_default(a.config);
    if (a.target != "observed" && a.target != "sharp") throw UsageError("--target: expected observed or sharp");
    const Scene scene = read_ply(a.scene);
    const LoadedDataset ds = load_dataset(a.data);
    const ParamsById params = a.params.empty() ? ParamsById{} : load_params(a.params);

    // sharpness-based selection over every observed capture
    std::vector<ViewRecord> records;
    for (const auto* set : {&ds.train, &ds.test})
        for (const auto& v : *set) records.push_back({v.id, v.camera.center(), v.camera.forward(), blurriness(v.image), false});
    std::map<std::string, double> score;
    for (const auto& r : records) score[r.id] = r.score;
    std::set<std::string> selected;
    for (const auto& r : select_test_views(records, cfg.selection)) selected.insert(r.id);

    const auto views = views_for(ds, a.split, a.target == "sharp");
    std::ofstream csv(a.out);
    if (!csv) throw std::runtime_error("cannot write " + a.out);
    csv << "image_id,psnr,ssim,blurriness,selected\n";
    double sum_psnr = 0.0, sum_ssim = 0.0;
    for (const auto& v : views) {
        const ImageBuffer img = render(scene, v.camera, params_or_identity(params, v.id), cfg.render);
        const double p = psnr(img, v.image), s = ssim(img, v.image);
        sum_psnr += p;
        sum_ssim += s;
        csv << v.id << ',' << p << ',' << s << ',' << score[v.id] << ',' << (selected.count(v.id) ? 1 : 0) << '\n';
    }
    const double n = std::max<std::size_t>(views.size(), 1);
    fs::path summary = fs::path(a.out);
    summary.replace_filename(summary.stem().string() + "_summary.csv");
    std::ofstream sum(summary);
    sum << "views,mean_psnr,mean_ssim\n" << views.size() << ',' << sum_psnr / n << ',' << sum_ssim / n << '\n';
    std::printf("%zu views: mean PSNR %.3f dB, mean SSIM %.4f\n", views.size(), sum_psnr / n, sum_ssim / n);
    return 0;
}

struct CheckArgs {
    std::uint64_t seed = 0;
    int primitives = 5;
    int size = 32;
};

int cmd_check(const CheckArgs& a) {
    if (a.primitives < 1 || a.primitives > 10) throw UsageError("--primitives: expected 1..10");
    if (a.size < 4) throw UsageError("--size: expected >= 4");
    const GradientFixture f = make_gradient_fixture(0, a.primitives, a.size);
    const GradReport r = check_gradients(f.scene, f.camera, f.params, a.seed);
    std::cout << format_report(r);
    return r.passed ? 0 : 1;
}

struct ExportArgs {
    std::string scene, params, image, out;
};

int cmd_export(const ExportArgs& a) {
    Scene scene = read_ply(a.scene);
    const ParamsById params = load_params(a.params);
    ColorParams color;
    if (!a.image.empty()) {
        const auto it = params.find(a.image);
        if (it == params.end()) throw UsageError("--image: no parameters for '" + a.image + "'");
        if (it->second.enabled.color) color = it->second.color;
    } else {
        // mean over images with color correction enabled
        Mat3d W = Mat3d::Zero();
        Vec3d q = Vec3d::Zero();
        int n = 0;
        for (const auto& [id, p] : params) {
            if (!p.enabled.color) continue;
            W += p.color.W;
            q += p.color.q;
            ++n;
        }
        if (n > 0) color = ColorParams{W / n, q / n};
    }
    for (auto& p : scene.primitives) p.sh = absorb_color_into_sh(p.sh, color);
    write_ply(scene, a.out);
    std::cout << "wrote " << a.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust Gaussian splatting: synthesize, fit, render, adapt, evaluate"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Worker threads (0 = all cores); outputs do not depend on it")
        ->check(CLI::NonNegativeNumber);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and corrupted captures");
    synth->add_option("--out", sa.out, "Output dataset directory")->required();
    synth->add_option("--seed", sa.seed, "Master seed");
    synth->add_option("--config", sa.config, "JSON config file")->check(CLI::ExistingFile);
    synth->add_option("--preset", sa.preset,
                      "Corruption preset: none, pose, blur, defocus, color, combined (empty = config's corruption)");
    synth->add_option("--samples", sa.samples, "Oracle samples per blurred image (0 = config, default 1024)");

    FitArgs fa;
    auto* fitc = app.add_subcommand("fit", "Fit a scene and per-image parameters to a dataset");
    fitc->add_option("--data", fa.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    fitc->add_option("--out", fa.out, "Output directory (scene.ply, params.json, loss.csv)")->required();
    fitc->add_option("--config", fa.config, "JSON config file")->check(CLI::ExistingFile);
    fitc->add_option("--init", fa.init, "Initial scene PLY (empty = <data>/init.ply)");
    fitc->add_option("--iterations", fa.iterations, "Override iterations (-1 = config, default 2000)");
    fitc->add_option("--seed", fa.seed, "Override shuffle seed (-1 = config)");
    fitc->add_option("--mechanisms", fa.mechanisms,
                     "all, none, or comma list of pose,motion_blur,defocus,color (empty = config, default all)");

    RenderArgs ra;
    auto* renderc = app.add_subcommand("render", "Render a scene for a camera list");
    renderc->add_option("--scene", ra.scene, "Scene PLY")->required()->check(CLI::ExistingFile);
    renderc->add_option("--cameras", ra.cameras, "cameras.json")->required()->check(CLI::ExistingFile);
    renderc->add_option("--out", ra.out, "Output directory")->required();
    renderc->add_option("--params", ra.params, "Per-image parameters JSON (missing ids render with identity)")
        ->check(CLI::ExistingFile);
    renderc->add_option("--mc-oracle", ra.mc, "Monte-Carlo oracle with N samples (0 = closed form)")
        ->check(CLI::NonNegativeNumber);
    renderc->add_option("--seed", ra.seed, "Oracle seed");
    renderc->add_flag("--raw", ra.raw, "Also write float32 .npy images");
    renderc->add_option("--config", ra.config, "JSON config file")->check(CLI::ExistingFile);

    AdaptArgs aa;
    auto* adaptc = app.add_subcommand("adapt", "Test-time adaptation of pose and color against a frozen scene");
    adaptc->add_option("--scene", aa.scene, "Scene PLY")->required()->check(CLI::ExistingFile);
    adaptc->add_option("--data", aa.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    adaptc->add_option("--out", aa.out, "Output directory (adapted_params.json, adapt.csv)")->required();
    adaptc->add_option("--split", aa.split, "Views to adapt: test, train or all");
    adaptc->add_option("--target", aa.target, "Images to adapt against: observed or sharp");
    adaptc->add_option("--steps", aa.steps, "Override steps (-1 = config, default 1000)");
    adaptc->add_option("--config", aa.config, "JSON config file")->check(CLI::ExistingFile);

    EvalArgs ea;
    auto* evalc = app.add_subcommand("eval", "Per-view PSNR / SSIM / blurriness and test-view selection");
    evalc->add_option("--data", ea.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    evalc->add_option("--scene", ea.scene, "Scene PLY")->required()->check(CLI::ExistingFile);
    evalc->add_option("--params", ea.params, "Per-image parameters JSON, e.g. from adapt")
        ->check(CLI::ExistingFile);
    evalc->add_option("--out", ea.out, "Per-view CSV; the aggregate goes to <stem>_summary.csv")->required();
    evalc->add_option("--split", ea.split, "Views to score: test, train or all");
    evalc->add_option("--target", ea.target, "Reference images: sharp or observed");
    evalc->add_option("--config", ea.config, "JSON config file")->check(CLI::ExistingFile);

    CheckArgs ca;
    auto* checkc = app.add_subcommand("check", "Analytic vs finite-difference gradient check");
    checkc->add_option("--seed", ca.seed, "Seed of the random adjoint");
    checkc->add_option("--primitives", ca.primitives, "Primitives in the fixture scene (1..10)");
    checkc->add_option("--size", ca.size, "Fixture image size in pixels");

    ExportArgs xa;
    auto* exportc = app.add_subcommand("export", "Fold color correction into SH and write a viewer PLY");
    exportc->add_option("--scene", xa.scene, "Scene PLY")->required()->check(CLI::ExistingFile);
    exportc->add_option("--params", xa.params, "Per-image parameters JSON")->required()->check(CLI::ExistingFile);
    exportc->add_option("--image", xa.image, "Image id whose color params to absorb (empty = mean over images)");
    exportc->add_option("--out", xa.out, "Output PLY")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    set_thread_count(threads);
    try {
        if (synth->parsed()) return cmd_synth(sa);
        if (fitc->parsed()) return cmd_fit(fa);
        if (renderc->parsed()) return cmd_render(ra);
        if (adaptc->parsed()) return cmd_adapt(aa);
        if (evalc->parsed()) return cmd_eval(ea);
        if (checkc->parsed()) return cmd_check(ca);
        if (exportc->parsed()) return cmd_export(xa);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const PlyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
