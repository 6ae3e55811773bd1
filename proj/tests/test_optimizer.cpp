// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/eval.hpp"
#include "rgs/image.hpp"
#include "rgs/optimizer.hpp"
#include "rgs/ply.hpp"
#include "rgs/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace rgs;

namespace {

Scene fixture() { return read_ply(std::string(RGS_SOURCE_DIR) + "/tests/data/fixture50.ply"); }

PerImageParams plain() {
    PerImageParams p;
    p.enabled = MechanismFlags::none();
    return p;
}

std::vector<TrainView> clean_views(const Scene& s, int n, int size) {
    std::vector<TrainView> out;
    for (const auto& cam : orbit_cameras(n, 1.0, size, size)) out.push_back({cam.id, cam, render(s, cam, plain())});
    return out;
}

} // namespace

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
    Eigen::VectorXd theta(3);
    theta << 1.0, -2.0, 0.5;
    const Eigen::VectorXd start = theta;
    AdamState st(3);
    for (int i = 0; i < 10; ++i) adam_step(theta, Eigen::VectorXd::Zero(3), st, Eigen::VectorXd::Constant(3, 0.1));
    EXPECT_EQ(theta, start);
}

TEST(Adam, FirstStepMovesByLearningRateTimesSign) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd g(3);
    g << 3.0, -0.002, 40.0;
    AdamState st(3);
    adam_step(theta, g, st, Eigen::VectorXd::Constant(3, 0.01));
    EXPECT_NEAR(theta[0], -0.01, 1e-12);
    EXPECT_NEAR(theta[1], 0.01, 1e-12);
    EXPECT_NEAR(theta[2], -0.01, 1e-12);
}

TEST(Adam, MinimizesOneDimensionalQuadratic) {
    Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, 5.0);
    AdamState st(1);
    for (int i = 0; i < 3000; ++i) {
        const Eigen::VectorXd g = 2.0 * (theta.array() - 1.5).matrix();
        adam_step(theta, g, st, Eigen::VectorXd::Constant(1, 0.01));
    }
    EXPECT_NEAR(theta[0], 1.5, 1e-2);
}

TEST(Adam, RejectsSizeMismatch) {
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(2);
    AdamState st(2);
    EXPECT_THROW(adam_step(theta, Eigen::VectorXd::Zero(3), st, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST(PhotometricLoss, IdenticalImagesGiveZero) {
    const Scene s = fixture();
    const ImageBuffer img = render(s, orbit_cameras(4, 1.0, 32, 32)[0], plain());
    const PhotometricLoss l = photometric_loss(img, img, 0.8, 0.2);
    EXPECT_NEAR(l.loss, 0.0, 1e-12);
    EXPECT_NEAR(l.ssim, 1.0, 1e-9);
}

TEST(PhotometricLoss, GradientMatchesFiniteDifference) {
    Rng rng(1);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    ImageBuffer a(16, 14), b(16, 14);
    for (auto& v : a.data) v = u(rng);
    for (auto& v : b.data) v = u(rng);
    const PhotometricLoss l = photometric_loss(a, b, 0.8, 0.2);
    for (std::size_t i = 0; i < a.data.size(); i += 37) {
        ImageBuffer ap = a, am = a;
        ap.data[i] += 1e-6;
        am.data[i] -= 1e-6;
        const double fd =
            (photometric_loss(ap, b, 0.8, 0.2).loss - photometric_loss(am, b, 0.8, 0.2).loss) / 2e-6;
        EXPECT_NEAR(l.grad.data[i], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Fit, ZeroIterationsAndSelfConsistentStart) {
    const Scene s = fixture();
    const auto views = clean_views(s, 6, 32);
    FitConfig cfg;
    cfg.mechanisms = MechanismFlags::none();
    cfg.iterations = 0;
    const FitResult r0 = fit(s, views, cfg);
    EXPECT_TRUE(r0.trace.empty());
    EXPECT_EQ(encode_ply(r0.scene), encode_ply(s));
    cfg.iterations = 1;
    const FitResult r1 = fit(s, views, cfg);
    ASSERT_EQ(r1.trace.size(), 1u);
    EXPECT_NEAR(r1.trace[0].loss, 0.0, 1e-6);
}

TEST(Fit, ValidatesInputsBeforeStepping) {
    const Scene s = fixture();
    auto views = clean_views(s, 3, 32);
    views[1].image = ImageBuffer(16, 16);
    EXPECT_THROW(fit(s, views, FitConfig{}), std::invalid_argument);
    EXPECT_THROW(fit(s, {}, FitConfig{}), std::invalid_argument);
    FitConfig bad;
    bad.lambda_l1 = 0.5;
    EXPECT_THROW(fit(s, clean_views(s, 2, 32), bad), std::invalid_argument);
    bad = FitConfig{};
    bad.iterations = -1;
    EXPECT_THROW(validate_fit_config(bad), std::invalid_argument);
}

TEST(Fit, ReconstructsCleanFixtureAbove30dB) {
    const Scene truth = fixture();
    const auto views = clean_views(truth, 40, 64);
    FitConfig cfg;
    cfg.mechanisms = MechanismFlags::none();
    const FitResult r = fit(perturb_scene(truth, 0.02, 0.2, 5), views, cfg);
    double sum = 0.0;
    for (const auto& v : views) sum += psnr(render(r.scene, v.camera, plain()), v.image);
    EXPECT_GE(sum / double(views.size()), 30.0);
}

TEST(Fit, DeterministicForFixedSeed) {
    const Scene truth = fixture();
    const auto views = clean_views(truth, 5, 32);
    FitConfig cfg;
    cfg.iterations = 60;
    cfg.seed = 4;
    const FitResult a = fit(perturb_scene(truth, 0.02, 0.2, 1), views, cfg);
    const FitResult b = fit(perturb_scene(truth, 0.02, 0.2, 1), views, cfg);
    EXPECT_EQ(encode_ply(a.scene), encode_ply(b.scene));
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace[i].loss, b.trace[i].loss);
}

TEST(Prune, DropsLowOpacityButNeverEmptiesScene) {
    Scene s = generate_scene(4, 1.0, 0, 3);
    s.primitives[1].opacity_logit = -10.0;
    EXPECT_EQ(prune_candidates(s, 0.005), std::vector<int>{1});
    for (auto& p : s.primitives) p.opacity_logit = -10.0;
    EXPECT_TRUE(prune_candidates(s, 0.005).empty());
}

TEST(SceneExtent, LargestAxisSpan) {
    Scene s = generate_scene(2, 1.0, 0, 3);
    s.primitives[0].position = Vec3d(0, 0, 0);
    s.primitives[1].position = Vec3d(0.5, -2.0, 1.0);
    EXPECT_DOUBLE_EQ(scene_extent_of(s), 2.0);
}

TEST(LossCsv, HeaderAndRows) {
    const auto path = std::filesystem::temp_directory_path() / "rgs_test_loss.csv";
    write_loss_csv({{0, "a", 0.5, 0.25, 0.75, 10}, {1, "b", 0.4, 0.2, 0.8, 9}}, path);
    std::ifstream in(path);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "step,image_id,loss,l1,ssim,primitives");
    EXPECT_EQ(row.substr(0, 4), "0,a,");
    std::filesystem::remove(path);
}

TEST(Adapt, OptimalStartIsAFixedPoint) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 48, 48)[9];
    const ImageBuffer target = quantize8(render(s, cam, plain()));
    AdaptConfig cfg;
    cfg.steps = 200;
    const AdaptResult r = test_time_adapt(s, target, cam, cfg);
    EXPECT_NEAR(r.psnr_after, r.psnr_before, 0.1);
}

TEST(Adapt, RecoversPoseAndColorWithoutTouchingTheScene) {
    const Scene s = fixture();
    const std::string before = encode_ply(s);
    const PinholeCamera cam = orbit_cameras(40, 1.0, 48, 48)[4];
    PerImageParams shift = plain();
    shift.enabled.pose = shift.enabled.color = true;
    shift.motion.rotation = Vec4d(1.0, 0.004, -0.003, 0.002).normalized();
    shift.motion.translation = Vec3d(0.005, -0.004, 0.003);
    shift.color.W(0, 0) = 1.05;
    shift.color.q = Vec3d(0.02, -0.01, 0.0);
    const ImageBuffer target = render(s, cam, shift);
    AdaptConfig cfg;
    cfg.steps = 300;
    cfg.lr_pose_rotation = cfg.lr_pose_translation = 1e-3;
    const AdaptResult r = test_time_adapt(s, target, cam, cfg);
    EXPECT_GT(r.psnr_after, r.psnr_before + 3.0);
    EXPECT_FALSE(r.params.enabled.motion_blur);
    EXPECT_FALSE(r.params.enabled.defocus);
    EXPECT_EQ(encode_ply(s), before);
    EXPECT_EQ(r.trace.size(), 300u);
}
