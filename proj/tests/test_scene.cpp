// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/ply.hpp"
#include "rgs/scene.hpp"
#include "rgs/synth.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>

using namespace rgs;

namespace {

// Real spherical harmonics in the 3DGS sign convention, written out
// independently of the library tables.
double sh_reference(int j, const Vec3d& d) {
    const double x = d.x(), y = d.y(), z = d.z(), pi = 3.14159265358979323846;
    switch (j) {
    case 0: return 0.5 / std::sqrt(pi);
    case 1: return -std::sqrt(3.0 / (4 * pi)) * y;
    case 2: return std::sqrt(3.0 / (4 * pi)) * z;
    case 3: return -std::sqrt(3.0 / (4 * pi)) * x;
    case 4: return 0.5 * std::sqrt(15.0 / pi) * x * y;
    case 5: return -0.5 * std::sqrt(15.0 / pi) * y * z;
    case 6: return 0.25 * std::sqrt(5.0 / pi) * (3 * z * z - 1);
    case 7: return -0.5 * std::sqrt(15.0 / pi) * x * z;
    case 8: return 0.25 * std::sqrt(15.0 / pi) * (x * x - y * y);
    case 9: return -0.25 * std::sqrt(35.0 / (2 * pi)) * y * (3 * x * x - y * y);
    case 10: return 0.5 * std::sqrt(105.0 / pi) * x * y * z;
    case 11: return -0.25 * std::sqrt(21.0 / (2 * pi)) * y * (5 * z * z - 1);
    case 12: return 0.25 * std::sqrt(7.0 / pi) * z * (5 * z * z - 3);
    case 13: return -0.25 * std::sqrt(21.0 / (2 * pi)) * x * (5 * z * z - 1);
    case 14: return 0.25 * std::sqrt(105.0 / pi) * z * (x * x - y * y);
    case 15: return -0.25 * std::sqrt(35.0 / (2 * pi)) * x * (x * x - 3 * y * y);
    }
    return 0.0;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("rgs_test_" + name);
}

} // namespace

TEST(Covariance, IdentityAndScaled) {
    GaussianPrimitive p = make_primitive(0);
    EXPECT_LT((covariance_of(p) - Mat3d::Identity()).norm(), 1e-15);
    p.log_scale = Vec3d(std::log(2.0), 0, 0);
    EXPECT_LT((covariance_of(p) - Mat3d(Vec3d(4, 1, 1).asDiagonal())).norm(), 1e-14);
}

TEST(Covariance, SymmetricPositiveDefiniteForRandomPrimitives) {
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        GaussianPrimitive p = make_primitive(0);
        p.log_scale = 0.5 * sample_standard_normal(rng);
        p.rotation << sample_standard_normal(rng), 0.3;
        const Mat3d S = covariance_of(p);
        EXPECT_LT((S - S.transpose()).norm(), 1e-14);
        const Eigen::SelfAdjointEigenSolver<Mat3d> es(S);
        EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
        // eigenvalues are exp(2 log_scale)
        Vec3d expected = (2.0 * p.log_scale).array().exp();
        std::sort(expected.data(), expected.data() + 3);
        EXPECT_LT((es.eigenvalues() - expected).norm(), 1e-12 * expected.maxCoeff());
    }
}

TEST(ShBasis, DegreeZeroIsConstant) {
    const auto b = sh_eval_basis(Vec3d(0.6, 0, 0.8), 0);
    ASSERT_EQ(b.size(), 1);
    EXPECT_NEAR(b[0], 0.28209479177, 1e-11);
}

TEST(ShBasis, DegreeOneOnZAxis) {
    const auto b = sh_eval_basis(Vec3d::UnitZ(), 1);
    EXPECT_EQ(b[1], 0.0);
    EXPECT_NEAR(b[2], 0.4886025, 1e-7);
    EXPECT_EQ(b[3], 0.0);
}

TEST(ShBasis, MatchesReferenceFormulasThroughDegreeThree) {
    Rng rng(2);
    for (int i = 0; i < 30; ++i) {
        const Vec3d d = sample_standard_normal(rng).normalized();
        const auto b = sh_eval_basis(d, 3);
        for (int j = 0; j < 16; ++j) EXPECT_NEAR(b[j], sh_reference(j, d), 1e-12) << "basis " << j;
    }
}

TEST(ShBasis, RejectsBadInput) {
    EXPECT_THROW(sh_eval_basis(Vec3d(1, 1, 0), 1), std::invalid_argument);
    EXPECT_THROW(sh_eval_basis(Vec3d::UnitX(), 4), std::invalid_argument);
    EXPECT_THROW(make_primitive(-1), std::invalid_argument);
}

TEST(ShBasis, VjpMatchesFiniteDifference) {
    Rng rng(3);
    const Vec3d d = sample_standard_normal(rng).normalized();
    ShBasis g(16);
    for (int j = 0; j < 16; ++j) g[j] = std::normal_distribution<double>()(rng);
    const Vec3d analytic = sh_basis_vjp(d, 3, g);
    for (int k = 0; k < 3; ++k) {
        Vec3d dp = d, dm = d;
        dp[k] += 1e-6;
        dm[k] -= 1e-6;
        const double fd = (sh_basis_unchecked(dp, 3) - sh_basis_unchecked(dm, 3)).dot(g) / 2e-6;
        EXPECT_NEAR(analytic[k], fd, 1e-7);
    }
}

TEST(DecodeColor, ZeroFeaturesGiveMidGray) {
    const GaussianPrimitive p = make_primitive(3);
    EXPECT_EQ(decode_color(p, Vec3d::UnitX()), Vec3d::Constant(0.5));
}

TEST(DecodeColor, DcTermScalesByBasisConstant) {
    GaussianPrimitive p = make_primitive(2);
    p.sh(0, 0) = 0.7;
    EXPECT_NEAR(decode_color(p, Vec3d::UnitY())[0], 0.5 + 0.28209479 * 0.7, 1e-8);
}

TEST(DecodeColor, DegreeZeroIsViewIndependent) {
    Rng rng(4);
    GaussianPrimitive p = make_primitive(0);
    p.sh.row(0) = sample_standard_normal(rng).transpose();
    const Vec3d d = sample_standard_normal(rng).normalized();
    EXPECT_EQ(decode_color(p, d), decode_color(p, -d));
}

TEST(DecodeColor, ClampsNegativeChannelsToZero) {
    GaussianPrimitive p = make_primitive(0);
    p.sh(0, 1) = -5.0;
    EXPECT_EQ(decode_color(p, Vec3d::UnitZ())[1], 0.0);
}

TEST(ValidateScene, RejectsInconsistentPrimitives) {
    Scene s;
    s.sh_degree = 1;
    s.primitives.push_back(make_primitive(2));
    EXPECT_THROW(validate_scene(s), std::invalid_argument);
    s.primitives[0] = make_primitive(1);
    s.primitives[0].rotation.setZero();
    EXPECT_THROW(validate_scene(s), std::invalid_argument);
    s.primitives[0].rotation = Vec4d(1, 0, 0, 0);
    s.primitives[0].opacity_logit = std::nan("");
    EXPECT_THROW(validate_scene(s), std::invalid_argument);
}

TEST(Ply, RoundTripsFivePrimitives) {
    const Scene s = generate_scene(5, 1.0, 3, 42);
    const auto path = temp_path("five.ply");
    write_ply(s, path);
    const Scene r = read_ply(path);
    ASSERT_EQ(r.size(), 5u);
    ASSERT_EQ(r.sh_degree, 3);
    for (std::size_t k = 0; k < 5; ++k) {
        const auto& a = s.primitives[k];
        const auto& b = r.primitives[k];
        EXPECT_LT((a.position - b.position).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT((a.log_scale - b.log_scale).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_LT((a.rotation - b.rotation).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_NEAR(a.opacity_logit, b.opacity_logit, 1e-6);
        EXPECT_LT((a.sh - b.sh).cwiseAbs().maxCoeff(), 1e-6);
    }
    std::filesystem::remove(path);
}

TEST(Ply, EveryDegreeRoundTrips) {
    for (int d = 0; d <= 3; ++d) {
        const Scene s = generate_scene(3, 1.0, d, 9);
        const Scene r = decode_ply(encode_ply(s));
        EXPECT_EQ(r.sh_degree, d);
        EXPECT_EQ(encode_ply(r), encode_ply(s));
    }
}

TEST(Ply, EmptyFileIsMissingHeader) {
    try {
        decode_ply("");
        FAIL() << "expected PlyError";
    } catch (const PlyError& e) {
        EXPECT_EQ(e.kind(), PlyError::Kind::MissingHeader);
        EXPECT_NE(std::string(e.what()).find("missing header"), std::string::npos);
    }
}

TEST(Ply, TruncatedPayloadNamesElementAndOffset) {
    std::string bytes = encode_ply(generate_scene(4, 1.0, 1, 3));
    bytes.resize(bytes.size() - 10);
    try {
        decode_ply(bytes);
        FAIL() << "expected PlyError";
    } catch (const PlyError& e) {
        EXPECT_EQ(e.kind(), PlyError::Kind::Truncated);
        EXPECT_EQ(e.element(), "vertex");
        EXPECT_EQ(e.byte_offset(), bytes.size());
    }
}

TEST(Ply, PropertyCountMismatchIsRejected) {
    std::string bytes = encode_ply(generate_scene(2, 1.0, 1, 3));
    // drop one f_rest property from the header; the layout no longer fits any degree
    const std::string line = "property float f_rest_8\n";
    const auto at = bytes.find(line);
    ASSERT_NE(at, std::string::npos);
    bytes.erase(at, line.size());
    try {
        decode_ply(bytes);
        FAIL() << "expected PlyError";
    } catch (const PlyError& e) {
        EXPECT_EQ(e.kind(), PlyError::Kind::UnknownLayout);
        EXPECT_EQ(e.element(), "vertex");
    }
}

TEST(Ply, MalformedHeaderAndUnsupportedFormat) {
    EXPECT_THROW(decode_ply("ply\nformat binary_little_endian 1.0\nelement vertex x\nend_header\n"), PlyError);
    try {
        decode_ply("ply\nformat ascii 1.0\nelement vertex 0\nend_header\n");
        FAIL() << "expected PlyError";
    } catch (const PlyError& e) {
        EXPECT_EQ(e.kind(), PlyError::Kind::UnsupportedFormat);
    }
    EXPECT_THROW(decode_ply("ply\nformat binary_little_endian 1.0\nelement vertex 1\n"), PlyError);
}

TEST(Ply, MissingFileIsIoError) {
    try {
        read_ply(temp_path("does_not_exist.ply"));
        FAIL() << "expected PlyError";
    } catch (const PlyError& e) {
        EXPECT_EQ(e.kind(), PlyError::Kind::Io);
    }
}
