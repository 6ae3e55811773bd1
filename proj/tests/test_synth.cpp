// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/eval.hpp"
#include "rgs/ply.hpp"
#include "rgs/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

using namespace rgs;

namespace fs = std::filesystem;

namespace {

double l1(const ImageBuffer& a, const ImageBuffer& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) s += std::abs(a.data[i] - b.data[i]);
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

} // namespace

TEST(GenerateScene, DeterministicForSeed) {
    EXPECT_EQ(encode_ply(generate_scene(30, 1.0, 3, 11)), encode_ply(generate_scene(30, 1.0, 3, 11)));
    EXPECT_NE(encode_ply(generate_scene(30, 1.0, 3, 11)), encode_ply(generate_scene(30, 1.0, 3, 12)));
}

TEST(GenerateScene, SingletonIsValid) {
    const Scene s = generate_scene(1, 2.0, 2, 5);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_NO_THROW(validate_scene(s));
    EXPECT_THROW(generate_scene(0, 1.0, 3, 1), std::invalid_argument);
}

TEST(GenerateScene, RangesFollowExtent) {
    const double extent = 2.0;
    const Scene s = generate_scene(200, extent, 1, 3);
    for (const auto& p : s.primitives) {
        EXPECT_LE(p.position.cwiseAbs().maxCoeff(), 0.5 * extent);
        EXPECT_GE(p.log_scale.minCoeff(), std::log(0.01 * extent));
        EXPECT_LE(p.log_scale.maxCoeff(), std::log(0.05 * extent));
        EXPECT_GT(opacity_of(p), 0.5);
        EXPECT_LT(opacity_of(p), 0.95);
    }
}

TEST(GenerateScene, OrbitViewsHaveCoverage) {
    const Scene s = generate_scene(50, 1.0, 3, 7);
    PerImageParams p;
    p.enabled = MechanismFlags::none();
    for (const auto& cam : orbit_cameras(8, 1.0, 64, 64)) EXPECT_GT(coverage(render(s, cam, p)), 0.10) << cam.id;
}

TEST(OrbitCameras, RadiusAndLookAt) {
    const auto cams = orbit_cameras(12, 2.0, 40, 30);
    ASSERT_EQ(cams.size(), 12u);
    for (const auto& c : cams) {
        EXPECT_NEAR(c.center().norm(), 5.0, 1e-9);
        EXPECT_LT((c.forward() + c.center().normalized()).norm(), 1e-9);
        EXPECT_EQ(c.width, 40);
        EXPECT_DOUBLE_EQ(c.fx, 1.6 * 40);
    }
}

TEST(GenerateDataset, ZeroSpecGivesSharpImagesBitExactly) {
    const Scene s = generate_scene(20, 1.0, 2, 4);
    CorruptionSpec spec;
    spec.seed = 9;
    const SynthDataset d = generate_dataset(s, orbit_cameras(4, 1.0, 32, 32), spec, 16);
    for (std::size_t i = 0; i < d.observed.size(); ++i) EXPECT_EQ(d.observed[i].data, d.sharp[i].data);
}

TEST(GenerateDataset, TranslationBlurLowersSharpness) {
    const Scene s = generate_scene(50, 1.0, 3, 7);
    CorruptionSpec spec;
    spec.translation_blur_std = {0.02, 0.03};
    spec.seed = 2;
    const SynthDataset d = generate_dataset(s, orbit_cameras(3, 1.0, 64, 64), spec, 128);
    for (std::size_t i = 0; i < d.observed.size(); ++i) {
        EXPECT_NE(d.observed[i].data, d.sharp[i].data);
        EXPECT_LT(blurriness(d.observed[i]), blurriness(d.sharp[i]));
    }
}

TEST(GenerateDataset, TrueParamsExplainObservationsBetterThanIdentity) {
    const Scene s = generate_scene(50, 1.0, 3, 7);
    const SynthDataset d = generate_dataset(s, orbit_cameras(4, 1.0, 48, 48), corruption_preset("combined", 1.0, 5), 256);
    PerImageParams identity;
    identity.enabled = MechanismFlags::none();
    for (std::size_t i = 0; i < d.observed.size(); ++i) {
        const auto& cam = d.cameras[i].camera;
        EXPECT_LT(l1(render(s, cam, d.truth[i]), d.observed[i]), l1(render(s, cam, identity), d.observed[i]));
    }
}

TEST(DrawCorruption, DependsOnlyOnSeedAndIndex) {
    const CorruptionSpec spec = corruption_preset("combined", 1.0, 17);
    const PerImageParams a = draw_corruption(spec, 3), b = draw_corruption(spec, 3), c = draw_corruption(spec, 4);
    EXPECT_EQ(a.motion.rotation, b.motion.rotation);
    EXPECT_EQ(a.color.W, b.color.W);
    EXPECT_NE(a.motion.rotation, c.motion.rotation);
    EXPECT_TRUE(a.enabled.pose && a.enabled.motion_blur && a.enabled.color);
    EXPECT_FALSE(a.enabled.defocus);
}

TEST(DrawCorruption, StaysInsideRanges) {
    const CorruptionSpec spec = corruption_preset("defocus", 1.0, 1);
    for (int i = 0; i < 50; ++i) {
        const PerImageParams p = draw_corruption(spec, i);
        EXPECT_GE(p.defocus.aperture, spec.aperture.lo);
        EXPECT_LE(p.defocus.aperture, spec.aperture.hi);
        EXPECT_GE(p.defocus.focus_inv_depth, spec.focus_inv_depth.lo);
        EXPECT_LE(p.defocus.focus_inv_depth, spec.focus_inv_depth.hi);
    }
    EXPECT_THROW(corruption_preset("fog", 1.0, 1), std::invalid_argument);
}

TEST(WriteDataset, DeterministicAndLoadable) {
    SynthConfig cfg;
    cfg.views = 6;
    cfg.width = cfg.height = 32;
    cfg.oracle_samples = 32;
    cfg.selection.k = 2;
    cfg.corruption = corruption_preset("blur", 1.0, 8);
    const fs::path a = fs::temp_directory_path() / "rgs_test_ds_a", b = fs::temp_directory_path() / "rgs_test_ds_b";
    fs::remove_all(a);
    fs::remove_all(b);
    write_synth_dataset(cfg, a);
    write_synth_dataset(cfg, b);
    int files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file()) continue;
        ++files;
        EXPECT_EQ(slurp(e.path()), slurp(b / fs::relative(e.path(), a))) << e.path();
    }
    EXPECT_EQ(files, 5 + 2 * 6);

    const LoadedDataset ds = load_dataset(a);
    EXPECT_EQ(ds.train.size() + ds.test.size(), 6u);
    EXPECT_EQ(ds.test.size(), 2u);
    EXPECT_EQ(ds.test_sharp.size(), 2u);
    EXPECT_EQ(ds.truth.size(), 6u);
    // manifest round trip is exact
    const PerImageParams drawn = draw_corruption(cfg.corruption, 1);
    EXPECT_EQ(ds.truth.at("view_001").motion.log_std_rotation, drawn.motion.log_std_rotation);
    EXPECT_EQ(ds.truth.at("view_001").motion.log_std_translation, drawn.motion.log_std_translation);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(GradientFixture, EveryMechanismIsActive) {
    const GradientFixture f = make_gradient_fixture(0);
    EXPECT_EQ(f.scene.size(), 5u);
    EXPECT_EQ(f.camera.width, 32);
    EXPECT_EQ(f.params.enabled, MechanismFlags::all());
    EXPECT_NE(f.params.color.W, Mat3d::Identity());
    EXPECT_NE(f.params.defocus.aperture, 0.0);
}
