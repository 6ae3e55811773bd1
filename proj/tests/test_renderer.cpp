// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/parallel.hpp"
#include "rgs/ply.hpp"
#include "rgs/renderer.hpp"
#include "rgs/synth.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace rgs;

namespace {

PinholeCamera axis_camera(int size = 33, double f = 50.0) {
    PinholeCamera c;
    c.id = "axis";
    c.fx = c.fy = f;
    c.cx = c.cy = (size - 1) / 2.0;
    c.width = c.height = size;
    return c;
}

PerImageParams plain() {
    PerImageParams p;
    p.enabled = MechanismFlags::none();
    return p;
}

Scene single(const Vec3d& pos, double scale, double opacity_logit, const Vec3d& dc) {
    Scene s;
    s.sh_degree = 0;
    GaussianPrimitive p = make_primitive(0);
    p.position = pos;
    p.log_scale.setConstant(std::log(scale));
    p.opacity_logit = opacity_logit;
    p.sh.row(0) = dc.transpose();
    s.primitives.push_back(p);
    return s;
}

Scene fixture() { return read_ply(std::string(RGS_SOURCE_DIR) + "/tests/data/fixture50.ply"); }

} // namespace

TEST(Splat, IsotropicOnAxis) {
    const PinholeCamera cam = axis_camera(64, 80.0);
    const double s = 0.05, d = 3.0;
    const WorldGaussian g{Vec3d(0, 0, d), s * s * Mat3d::Identity(), 0.5};
    const auto sp = splat(g, ShCoeffs::Zero(1, 3), 0, cam, EffectiveParams{}, RenderOptions{});
    ASSERT_TRUE(sp);
    const double v = std::pow(80.0 * s / d, 2) + 0.3;
    EXPECT_LT((sp->cov2d - v * Mat2d::Identity()).norm(), 1e-12);
    EXPECT_EQ(sp->mean2d, Vec2d(cam.cx, cam.cy));
    EXPECT_EQ(sp->depth, d);
}

TEST(Splat, BehindCameraIsCulled) {
    const WorldGaussian g{Vec3d(0, 0, -1), 0.01 * Mat3d::Identity(), 0.5};
    EXPECT_FALSE(splat(g, ShCoeffs::Zero(1, 3), 0, axis_camera(), EffectiveParams{}, RenderOptions{}));
}

TEST(Splat, MatchesProjectedSampleCovariance) {
    PinholeCamera cam = axis_camera(64, 70.0);
    cam.rotation = so3_exp<double>(Vec3d(0.1, -0.2, 0.05));
    cam.translation = Vec3d(0.1, 0.05, 3.0);
    Rng rng(1);
    Mat3d A;
    for (int k = 0; k < 9; ++k) A(k / 3, k % 3) = std::normal_distribution<double>()(rng);
    const Mat3d S = 0.0004 * (A * A.transpose() + 0.3 * Mat3d::Identity());
    const Vec3d mu(0.2, -0.1, 0.1);
    RenderOptions opts;
    opts.dilation = 0.0;
    const auto sp = splat({mu, S, 0.5}, ShCoeffs::Zero(1, 3), 0, cam, EffectiveParams{}, opts);
    ASSERT_TRUE(sp);
    const Mat3d L = spd_factor(S);
    const int n = 100000;
    Vec2d sum = Vec2d::Zero();
    Mat2d outer = Mat2d::Zero();
    for (int i = 0; i < n; ++i) {
        const Vec2d px = project(cam, to_camera(cam, sample_mvn(mu, L, rng)))->pixel;
        sum += px;
        outer += px * px.transpose();
    }
    const Vec2d mean = sum / n;
    const Mat2d cov = outer / n - mean * mean.transpose();
    EXPECT_LT((cov - sp->cov2d).norm(), 0.05 * sp->cov2d.norm());
}

TEST(Render, TransparentSceneShowsBackground) {
    Scene s = fixture();
    for (auto& p : s.primitives) p.opacity_logit = -40.0;
    RenderOptions opts;
    opts.background = Vec3d(0.2, 0.4, 0.6);
    const ImageBuffer img = render(s, orbit_cameras(8, 1.0, 32, 32)[0], plain(), opts);
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) EXPECT_EQ(img.pixel(x, y), opts.background);
}

TEST(Render, SingleOnAxisGaussianCenterPixel) {
    const Vec3d dc(0.8, -0.3, 0.2);
    const double logit = 1.2;
    const Scene s = single(Vec3d(0, 0, 2), 0.1, logit, dc);
    RenderOptions opts;
    opts.background = Vec3d(0.1, 0.1, 0.1);
    const PinholeCamera cam = axis_camera();
    const ImageBuffer img = render(s, cam, plain(), opts);
    const double a = sigmoid(logit);
    const Vec3d color = decode_color(s.primitives[0], Vec3d::UnitZ());
    const Vec3d expected = a * color + (1 - a) * opts.background;
    EXPECT_LT((img.pixel(16, 16) - expected).norm(), 1e-12);
}

TEST(Render, IdentityParamsMatchDisabledMechanismsBitExactly) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 48, 48)[5];
    PerImageParams identity;
    identity.enabled = MechanismFlags::all();
    identity.motion.log_std_rotation.setConstant(-std::numeric_limits<double>::infinity());
    identity.motion.log_std_translation.setConstant(-std::numeric_limits<double>::infinity());
    identity.defocus.aperture = 0.0;
    EXPECT_EQ(render(s, cam, identity).data, render(s, cam, plain()).data);
}

TEST(Render, DeterministicAcrossThreadCounts) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 64, 64)[11];
    PerImageParams p = draw_corruption(corruption_preset("combined", 1.0, 3), 0);
    set_thread_count(1);
    const ImageBuffer a = render(s, cam, p);
    const ImageBuffer am = render_mc_oracle(s, cam, p, 8, 5);
    set_thread_count(4);
    const ImageBuffer b = render(s, cam, p);
    const ImageBuffer bm = render_mc_oracle(s, cam, p, 8, 5);
    set_thread_count(0);
    EXPECT_EQ(a.data, b.data);
    EXPECT_EQ(am.data, bm.data);
}

TEST(Render, RejectsEmptySceneAndBadOptions) {
    EXPECT_THROW(render(Scene{}, axis_camera(), plain()), std::invalid_argument);
    RenderOptions bad;
    bad.alpha_clamp_max = 1.0;
    EXPECT_THROW(render(fixture(), axis_camera(), plain(), bad), std::invalid_argument);
    EXPECT_THROW(render_mc_oracle(fixture(), axis_camera(), plain(), 0, 1), std::invalid_argument);
}

TEST(MonteCarlo, SingleSampleWithoutBlurEqualsRenderWithPose) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 48, 48)[2];
    PerImageParams p = plain();
    p.enabled.pose = true;
    p.enabled.motion_blur = true;
    p.motion.rotation = Vec4d(1.0, 0.01, -0.02, 0.005).normalized();
    p.motion.translation = Vec3d(0.01, 0.0, -0.02);
    p.motion.log_std_rotation.setConstant(-std::numeric_limits<double>::infinity());
    p.motion.log_std_translation.setConstant(-std::numeric_limits<double>::infinity());
    const ImageBuffer a = render(s, cam, p);
    const ImageBuffer b = render_mc_oracle(s, cam, p, 1, 9);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) worst = std::max(worst, std::abs(a.data[i] - b.data[i]));
    EXPECT_LT(worst, 1e-6);
}

TEST(MonteCarlo, ZeroBlurSamplesAreIdentical) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 32, 32)[7];
    const ImageBuffer one = render_mc_oracle(s, cam, plain(), 1, 1);
    const ImageBuffer many = render_mc_oracle(s, cam, plain(), 6, 2);
    for (std::size_t i = 0; i < one.data.size(); ++i) EXPECT_NEAR(one.data[i], many.data[i], 1e-14);
}

TEST(MonteCarlo, ConvergesTowardClosedFormAsBlurShrinks) {
    const Scene s = fixture();
    const PinholeCamera cam = orbit_cameras(40, 1.0, 32, 32)[1];
    double prev = 1e9;
    for (double scale : {1.0, 0.5, 0.25}) {
        PerImageParams p = plain();
        p.enabled.motion_blur = true;
        p.motion.log_std_rotation.setConstant(std::log(0.01 * scale));
        p.motion.log_std_translation.setConstant(std::log(0.01 * scale));
        const ImageBuffer a = render(s, cam, p);
        const ImageBuffer b = render_mc_oracle(s, cam, p, 1024, 3);
        double err = 0.0;
        for (std::size_t i = 0; i < a.data.size(); ++i) err += std::abs(a.data[i] - b.data[i]);
        err /= double(a.data.size());
        EXPECT_LT(err, prev);
        prev = err;
    }
}
