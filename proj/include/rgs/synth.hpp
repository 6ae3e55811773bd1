// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
//
// Synthetic scenes and corrupted captures with known ground truth.
//
// Dataset directory:
//   images/<id>.png     observed (corrupted) captures
//   sharp/<id>.png      uncorrupted renders of the same cameras
//   cameras.json        camera list with a "split" field (train / test)
//   truth_params.json   per-image parameters that produced each capture
//   meta.json           seed and configuration echo
//   scene.ply           ground-truth scene
//   init.ply            perturbed copy used to start fitting
#pragma once

#include "rgs/camera.hpp"
#include "rgs/eval.hpp"
#include "rgs/image.hpp"
#include "rgs/optimizer.hpp"
#include "rgs/renderer.hpp"
#include "rgs/robust_transforms.hpp"
#include "rgs/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rgs {

struct Range {
    double lo = 0.0;
    double hi = 0.0;
    bool is_zero() const { return lo == 0.0 && hi == 0.0; }
};

/// Per-image corruption draws; every value is drawn uniformly from its range.
struct CorruptionSpec {
    Range rotation_blur_std;     // radians, isotropic
    Range translation_blur_std;  // scene units, isotropic
    Range pose_rotation;         // radians, random axis
    Range pose_translation;      // scene units, random direction
    double color_matrix_std = 0.0;  // W = I + N(0, std^2) per entry
    double color_offset_std = 0.0;  // q ~ N(0, std^2)
    Range aperture;              // A
    Range focus_inv_depth;       // rho
    std::uint64_t seed = 0;

    bool is_zero() const;
};

/// Positions uniform in a cube of edge `extent` centered at the origin.
Scene generate_scene(int n_primitives, double extent, int sh_degree, std::uint64_t seed);

/// `n` cameras on a sphere of radius 2.5 * extent looking at the origin,
/// azimuth stepping around the full circle, elevation oscillating in
/// [-25, 25] degrees. focal = focal_factor * width.
std::vector<PinholeCamera> orbit_cameras(int n, double extent, int width, int height, double focal_factor = 1.6);

/// Draw for image `index`; depends only on (spec.seed, index).
PerImageParams draw_corruption(const CorruptionSpec& spec, int index);

/// Fraction of pixels differing from the background.
double coverage(const ImageBuffer& img, const Vec3d& background = Vec3d::Zero());

struct SynthDataset {
    std::vector<CameraRecord> cameras;
    std::vector<ImageBuffer> observed;
    std::vector<ImageBuffer> sharp;
    std::vector<PerImageParams> truth;
};

/// Observed images come from render_mc_oracle with `oracle_samples` draws
/// (a plain render when the draw has no blur); the oracle seed of image i
/// depends only on (spec.seed, i).
SynthDataset generate_dataset(const Scene& scene, const std::vector<PinholeCamera>& cameras,
                              const CorruptionSpec& spec, int oracle_samples = 1024, const RenderOptions& opts = {});

/// Perturbed copy of a scene: position noise, log-scale noise, rotation
/// noise, opacity reset and DC color noise, higher SH bands zeroed.
Scene perturb_scene(const Scene& scene, double position_std, double log_scale_std, std::uint64_t seed);

struct SynthConfig {
    int n_primitives = 50;
    double extent = 1.0;
    int sh_degree = 3;
    int views = 40;
    int width = 64;
    int height = 64;
    double focal_factor = 1.6;
    int oracle_samples = 1024;
    double init_position_std = 0.02;   // times extent
    double init_log_scale_std = 0.2;
    SelectionOptions selection{8, 0.5, 60.0, ConflictMode::Conjunctive};
    CorruptionSpec corruption;
    RenderOptions render;
};

/// Generates and writes a dataset directory; corruption.seed is the master
/// seed for the scene, the draws and the initialization. Test views are
/// chosen from the observed captures with select_test_views on their
/// blurriness.
void write_synth_dataset(const SynthConfig& cfg, const std::filesystem::path& dir);

/// Named corruption mixes: "none", "pose", "blur", "defocus", "color",
/// "combined" (blur + pose + color). Magnitudes scale with `extent`.
CorruptionSpec corruption_preset(const std::string& name, double extent, std::uint64_t seed);

/// Small scene, camera and non-identity parameters for gradient checking:
/// `n` primitives of SH degree 3 seen by a size x size camera, with every
/// mechanism enabled.
struct GradientFixture {
    Scene scene;
    PinholeCamera camera;
    PerImageParams params;
};
GradientFixture make_gradient_fixture(std::uint64_t seed, int n = 5, int size = 32);

struct LoadedDataset {
    std::vector<TrainView> train;       // observed images
    std::vector<TrainView> test;        // observed images
    std::vector<TrainView> test_sharp;  // sharp renders of the test cameras
    std::vector<TrainView> train_sharp;
    ParamsById truth;
    Scene init;
    Scene truth_scene;
};

LoadedDataset load_dataset(const std::filesystem::path& dir);

} // namespace rgs
