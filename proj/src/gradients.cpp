// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/gradients.hpp"

#include "raster.hpp"
#include "rgs/parallel.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace rgs {

namespace {

struct SplatAccum {
    Vec3d color = Vec3d::Zero();  // dL/d(final splat color)
    double alpha = 0.0;           // dL/d(alpha_eff)
    Vec2d mean = Vec2d::Zero();   // dL/d(mean2d)
    Vec3d conic = Vec3d::Zero();  // dL/d(a, b, c)

    void add(const SplatAccum& o) {
        color += o.color;
        alpha += o.alpha;
        mean += o.mean;
        conic += o.conic;
    }
};

struct ForwardState {
    EffectiveParams eff;
    std::vector<detail::WorldCache> world;
    std::vector<detail::ProjectionCache> proj;
    detail::Frame frame;
};

ForwardState run_forward(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                         const RenderOptions& opts) {
    if (scene.empty()) throw std::invalid_argument("render: scene is empty");
    validate_camera(cam);
    validate_render_options(opts);
    ForwardState st;
    st.eff = effective(params);
    st.world.resize(scene.size());
    st.proj.resize(scene.size());
    std::vector<Splat2D> splats;
    for (std::size_t k = 0; k < scene.size(); ++k) {
        const WorldGaussian g = detail::world_stage(scene.primitives[k], st.eff, &st.world[k]);
        auto s = detail::project_stage(g, scene.primitives[k].sh, scene.sh_degree, cam, st.eff, opts, &st.proj[k]);
        if (s) {
            s->primitive = static_cast<int>(k);
            splats.push_back(*s);
        }
    }
    st.frame = detail::build_frame(std::move(splats), cam.width, cam.height);
    return st;
}

/// Pixel-space adjoint: per-splat sums over a fixed band decomposition.
std::vector<SplatAccum> pixel_backward(const detail::Frame& frame, const ImageBuffer& grad_out,
                                       const RenderOptions& opts) {
    const int n = static_cast<int>(frame.splats.size());
    const int bands = (frame.height + detail::kBandRows - 1) / detail::kBandRows;
    std::vector<std::vector<SplatAccum>> band_acc(bands, std::vector<SplatAccum>(n));
    parallel_for(bands, [&](int b) {
        auto& acc = band_acc[b];
        std::vector<detail::Contribution> trace;
        const int y_end = std::min(frame.height, (b + 1) * detail::kBandRows);
        for (int y = b * detail::kBandRows; y < y_end; ++y) {
            for (int x = 0; x < frame.width; ++x) {
                Vec3d G = grad_out.pixel(x, y);
                if (G.isZero(0.0)) continue;
                trace.clear();
                double T_final = 1.0;
                const Vec3d c = detail::composite_pixel(frame, x, y, opts, &T_final, &trace);
                for (int ch = 0; ch < 3; ++ch) {
                    if (c[ch] < 0.0 || c[ch] > 1.0) G[ch] = 0.0;
                }
                Vec3d after = T_final * opts.background;
                for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
                    const Splat2D& s = frame.splats[it->splat];
                    SplatAccum& a = acc[it->splat];
                    const double w = it->transmittance * it->alpha;
                    a.color += w * G;
                    const double dL_da = G.dot(it->transmittance * s.color - after / (1.0 - it->alpha));
                    after += w * s.color;
                    if (it->clamped) continue;
                    a.alpha += dL_da * it->falloff;
                    const double dpower = dL_da * it->alpha;
                    const double dx = it->dx, dy = it->dy;
                    a.conic += dpower * Vec3d(-0.5 * dx * dx, -dx * dy, -0.5 * dy * dy);
                    a.mean += dpower * Vec2d(s.conic[0] * dx + s.conic[1] * dy, s.conic[1] * dx + s.conic[2] * dy);
                }
            }
        }
    });
    std::vector<SplatAccum> total(n);
    for (int b = 0; b < bands; ++b)
        for (int i = 0; i < n; ++i) total[i].add(band_acc[b][i]);
    return total;
}

/// Chain rule from splat-space adjoints back to the primitive and the
/// per-image parameters.
void primitive_backward(const GaussianPrimitive& p, int sh_degree, const PinholeCamera& cam,
                        const EffectiveParams& eff, const detail::WorldCache& wc,
                        const detail::ProjectionCache& pc, const Splat2D& s, const SplatAccum& g,
                        PrimitiveGrad& out, ImageParamGrad& img, Mat3d& G_pose) {
    // color: c' = W c + q, c = max(0.5 + sh^T b, 0)
    img.W += g.color * pc.color.transpose();
    img.q += g.color;
    Vec3d g_col = eff.W.transpose() * g.color;
    for (int ch = 0; ch < 3; ++ch)
        if (pc.color_linear[ch] < 0.0) g_col[ch] = 0.0;
    out.sh = pc.basis * g_col.transpose();
    const ShBasis g_basis = p.sh * g_col;
    const Vec3d g_dir = sh_basis_vjp(pc.dir, sh_degree, g_basis);
    Vec3d g_mean3 = normalize_vjp<double>(pc.view, g_dir);

    // opacity: alpha2 = alpha1 * sqrt(det C / det C')
    const Mat2d& Cp = s.cov2d;
    const Mat2d Cp_inv = Cp.inverse();
    const Mat2d C_inv = pc.cov.inverse();
    const double g_alpha1 = g.alpha * pc.defocus_ratio;
    const double g_log_ratio = g.alpha * s.alpha_eff;
    Mat2d G_C = 0.5 * g_log_ratio * C_inv;
    Mat2d G_Cp = -0.5 * g_log_ratio * Cp_inv;

    // conic = C'^-1
    Mat2d G_Q;
    G_Q << g.conic[0], 0.5 * g.conic[1], 0.5 * g.conic[1], g.conic[2];
    const Mat2d Q = Cp_inv;
    G_Cp -= Q * G_Q * Q;

    // C' = C + r^2 I, r = A (rho - 1/z)
    G_C += G_Cp;
    const double g_r = 2.0 * pc.radius * G_Cp.trace();
    const double z = pc.x_cam.z();
    img.aperture += g_r * (eff.focus_inv_depth - 1.0 / z);
    img.focus_inv_depth += g_r * eff.aperture;
    Vec3d g_xc = Vec3d::Zero();
    g_xc.z() += g_r * eff.aperture / (z * z);

    // C = T Sigma' T^T + d I, T = J R_wc
    const Mat3d& sigma_z = wc.out.cov;
    const Mat23d G_T = (G_C + G_C.transpose()) * pc.T * sigma_z;
    Mat3d G_sigma_z = pc.T.transpose() * G_C * pc.T;
    const Mat23d G_J = G_T * cam.rotation.transpose();

    // mean2d = pi(x_cam)
    g_xc += pc.J.transpose() * g.mean;
    const double x = pc.x_cam.x(), y = pc.x_cam.y();
    const double iz2 = 1.0 / (z * z), iz3 = iz2 / z;
    g_xc.x() += G_J(0, 2) * (-cam.fx * iz2);
    g_xc.y() += G_J(1, 2) * (-cam.fy * iz2);
    g_xc.z() += G_J(0, 0) * (-cam.fx * iz2) + G_J(0, 2) * (2.0 * cam.fx * x * iz3) + G_J(1, 1) * (-cam.fy * iz2) +
                G_J(1, 2) * (2.0 * cam.fy * y * iz3);
    g_mean3 += cam.rotation.transpose() * g_xc;

    // world stage: mu' = P mu + t, Sigma' = P M P^T, alpha1 = alpha sqrt(det Sigma / det M)
    const Mat3d& P = eff.pose_rotation;
    const Mat3d& M = wc.inner;
    G_pose += g_mean3 * p.position.transpose();
    Vec3d g_mu = P.transpose() * g_mean3;
    img.pose_translation += g_mean3;
    Mat3d G_M = P.transpose() * G_sigma_z * P;
    G_pose += (G_sigma_z + G_sigma_z.transpose()) * P * M;

    const double g_alpha = g_alpha1 * wc.mass_ratio;
    const double g_log_mass = g_alpha1 * wc.out.alpha;
    Mat3d G_sigma = 0.5 * g_log_mass * wc.sigma.inverse();
    G_M -= 0.5 * g_log_mass * M.inverse();

    // M = Sigma + K S_R K^T + S_t, K = [mu]x
    G_sigma += G_M;
    const Mat3d& K = wc.skew_mu;
    const Mat3d G_SR = K.transpose() * G_M * K;
    const Mat3d G_K = (G_M + G_M.transpose()) * K * eff.blur_rotation_cov;
    g_mu += Vec3d(G_K(2, 1) - G_K(1, 2), G_K(0, 2) - G_K(2, 0), G_K(1, 0) - G_K(0, 1));
    for (int i = 0; i < 3; ++i) {
        img.log_std_rotation[i] += 2.0 * eff.blur_rotation_cov(i, i) * G_SR(i, i);
        img.log_std_translation[i] += 2.0 * eff.blur_translation_cov(i, i) * G_M(i, i);
    }

    // Sigma = R diag(s2) R^T
    const Mat3d& R = wc.rotation;
    const Mat3d G_S = R.transpose() * G_sigma * R;
    const Mat3d G_R = (G_sigma + G_sigma.transpose()) * R * wc.scale2.asDiagonal();
    for (int i = 0; i < 3; ++i) out.log_scale[i] = 2.0 * wc.scale2[i] * G_S(i, i);
    out.rotation = normalize_vjp<double>(p.rotation, quat_to_rotation_vjp<double>(wc.q_unit, G_R));
    out.position = g_mu;
    out.opacity_logit = g_alpha * wc.alpha * (1.0 - wc.alpha);
}

Gradients backward_from(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                        const ForwardState& st, const ImageBuffer& grad_out, const RenderOptions& opts) {
    if (grad_out.width != cam.width || grad_out.height != cam.height) {
        throw std::invalid_argument("render_backward: adjoint image does not match the camera size");
    }
    Gradients g;
    g.primitives.resize(scene.size());
    for (auto& pg : g.primitives) pg.sh = ShCoeffs::Zero(sh_coeff_count(scene.sh_degree), 3);

    const std::vector<SplatAccum> acc = pixel_backward(st.frame, grad_out, opts);
    // splat index -> primitive order, so image terms sum in primitive index order
    std::vector<int> splat_of(scene.size(), -1);
    for (std::size_t i = 0; i < st.frame.splats.size(); ++i) splat_of[st.frame.splats[i].primitive] = int(i);

    std::vector<ImageParamGrad> img_parts(scene.size());
    std::vector<Mat3d> pose_parts(scene.size(), Mat3d::Zero());
    parallel_for(static_cast<int>(scene.size()), [&](int k) {
        const int i = splat_of[k];
        if (i < 0) return;
        primitive_backward(scene.primitives[k], scene.sh_degree, cam, st.eff, st.world[k], st.proj[k],
                           st.frame.splats[i], acc[i], g.primitives[k], img_parts[k], pose_parts[k]);
    });

    ImageParamGrad& img = g.image;
    Mat3d G_pose = Mat3d::Zero();
    for (std::size_t k = 0; k < scene.size(); ++k) {
        const ImageParamGrad& part = img_parts[k];
        img.pose_translation += part.pose_translation;
        img.log_std_rotation += part.log_std_rotation;
        img.log_std_translation += part.log_std_translation;
        img.aperture += part.aperture;
        img.focus_inv_depth += part.focus_inv_depth;
        img.W += part.W;
        img.q += part.q;
        G_pose += pose_parts[k];
    }
    const Vec4d& q_raw = params.motion.rotation;
    img.pose_rotation = normalize_vjp<double>(q_raw, quat_to_rotation_vjp<double>(q_raw.normalized(), G_pose));

    const MechanismFlags& on = params.enabled;
    if (!on.pose) {
        img.pose_rotation.setZero();
        img.pose_translation.setZero();
    }
    if (!on.motion_blur) {
        img.log_std_rotation.setZero();
        img.log_std_translation.setZero();
    }
    if (!on.defocus) {
        img.aperture = 0.0;
        img.focus_inv_depth = 0.0;
    }
    if (!on.color) {
        img.W.setZero();
        img.q.setZero();
    }
    return g;
}

} // namespace

Gradients render_backward(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                          const ImageBuffer& grad_out, const RenderOptions& opts) {
    const ForwardState st = run_forward(scene, cam, params, opts);
    return backward_from(scene, cam, params, st, grad_out, opts);
}

RenderWithGrad render_with_backward(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                                    const std::function<ImageBuffer(const ImageBuffer&)>& loss_grad,
                                    const RenderOptions& opts) {
    const ForwardState st = run_forward(scene, cam, params, opts);
    RenderWithGrad out;
    out.image = detail::composite(st.frame, opts);
    const ImageBuffer adjoint = loss_grad(out.image);
    out.grad = backward_from(scene, cam, params, st, adjoint, opts);
    return out;
}

const char* group_name(ParamGroup g) {
    switch (g) {
    case ParamGroup::Position: return "position";
    case ParamGroup::LogScale: return "log_scale";
    case ParamGroup::Rotation: return "rotation";
    case ParamGroup::Opacity: return "opacity";
    case ParamGroup::Sh: return "sh";
    case ParamGroup::PoseRotation: return "pose_rotation";
    case ParamGroup::PoseTranslation: return "pose_translation";
    case ParamGroup::BlurRotation: return "blur_log_std_rotation";
    case ParamGroup::BlurTranslation: return "blur_log_std_translation";
    case ParamGroup::DefocusAperture: return "defocus_aperture";
    case ParamGroup::DefocusFocus: return "defocus_focus";
    case ParamGroup::ColorW: return "color_W";
    case ParamGroup::ColorQ: return "color_q";
    }
    return "?";
}

ParamGroup ParamLayout::group_of(Eigen::Index index) const {
    if (index < 0 || index >= size()) throw std::out_of_range("ParamLayout: index out of range");
    const Eigen::Index prim_end = Eigen::Index(n_primitives) * primitive_stride();
    if (index < prim_end) {
        const Eigen::Index r = index % primitive_stride();
        if (r < 3) return ParamGroup::Position;
        if (r < 6) return ParamGroup::LogScale;
        if (r < 10) return ParamGroup::Rotation;
        if (r < 11) return ParamGroup::Opacity;
        return ParamGroup::Sh;
    }
    const Eigen::Index r = (index - prim_end) % kImageStride;
    if (r < 4) return ParamGroup::PoseRotation;
    if (r < 7) return ParamGroup::PoseTranslation;
    if (r < 10) return ParamGroup::BlurRotation;
    if (r < 13) return ParamGroup::BlurTranslation;
    if (r < 14) return ParamGroup::DefocusAperture;
    if (r < 15) return ParamGroup::DefocusFocus;
    if (r < 24) return ParamGroup::ColorW;
    return ParamGroup::ColorQ;
}

namespace {

ParamLayout layout_for(const Scene& scene, std::size_t n_images) {
    return ParamLayout{static_cast<int>(scene.size()), scene.sh_degree, static_cast<int>(n_images)};
}

} // namespace

Eigen::VectorXd flatten(const Scene& scene, const std::vector<PerImageParams>& images) {
    const ParamLayout L = layout_for(scene, images.size());
    Eigen::VectorXd theta(L.size());
    const int K = sh_coeff_count(scene.sh_degree);
    for (int k = 0; k < L.n_primitives; ++k) {
        const auto& p = scene.primitives[k];
        auto b = theta.segment(L.primitive_offset(k), L.primitive_stride());
        b.segment<3>(0) = p.position;
        b.segment<3>(3) = p.log_scale;
        b.segment<4>(6) = p.rotation;
        b[10] = p.opacity_logit;
        for (int j = 0; j < K; ++j)
            for (int c = 0; c < 3; ++c) b[11 + 3 * j + c] = p.sh(j, c);
    }
    for (int i = 0; i < L.n_images; ++i) {
        const auto& q = images[i];
        auto b = theta.segment<ParamLayout::kImageStride>(L.image_offset(i));
        b.segment<4>(0) = q.motion.rotation;
        b.segment<3>(4) = q.motion.translation;
        b.segment<3>(7) = q.motion.log_std_rotation;
        b.segment<3>(10) = q.motion.log_std_translation;
        b[13] = q.defocus.aperture;
        b[14] = q.defocus.focus_inv_depth;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) b[15 + 3 * r + c] = q.color.W(r, c);
        b.segment<3>(24) = q.color.q;
    }
    return theta;
}

void unflatten(const Eigen::VectorXd& theta, Scene& scene, std::vector<PerImageParams>& images) {
    const ParamLayout L = layout_for(scene, images.size());
    if (theta.size() != L.size()) throw std::invalid_argument("unflatten: vector size does not match the layout");
    const int K = sh_coeff_count(scene.sh_degree);
    for (int k = 0; k < L.n_primitives; ++k) {
        auto& p = scene.primitives[k];
        const auto b = theta.segment(L.primitive_offset(k), L.primitive_stride());
        p.position = b.segment<3>(0);
        p.log_scale = b.segment<3>(3);
        p.rotation = b.segment<4>(6);
        p.opacity_logit = b[10];
        for (int j = 0; j < K; ++j)
            for (int c = 0; c < 3; ++c) p.sh(j, c) = b[11 + 3 * j + c];
    }
    for (int i = 0; i < L.n_images; ++i) {
        auto& q = images[i];
        const auto b = theta.segment<ParamLayout::kImageStride>(L.image_offset(i));
        q.motion.rotation = b.segment<4>(0);
        q.motion.translation = b.segment<3>(4);
        q.motion.log_std_rotation = b.segment<3>(7);
        q.motion.log_std_translation = b.segment<3>(10);
        q.defocus.aperture = b[13];
        q.defocus.focus_inv_depth = b[14];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) q.color.W(r, c) = b[15 + 3 * r + c];
        q.color.q = b.segment<3>(24);
    }
}

void scatter_gradient(const Gradients& g, const ParamLayout& L, int image, Eigen::VectorXd& out) {
    if (out.size() != L.size()) throw std::invalid_argument("scatter_gradient: vector size does not match the layout");
    if (static_cast<int>(g.primitives.size()) != L.n_primitives || image < 0 || image >= L.n_images) {
        throw std::invalid_argument("scatter_gradient: gradient does not match the layout");
    }
    const int K = sh_coeff_count(L.sh_degree);
    for (int k = 0; k < L.n_primitives; ++k) {
        const auto& p = g.primitives[k];
        auto b = out.segment(L.primitive_offset(k), L.primitive_stride());
        b.segment<3>(0) += p.position;
        b.segment<3>(3) += p.log_scale;
        b.segment<4>(6) += p.rotation;
        b[10] += p.opacity_logit;
        for (int j = 0; j < K; ++j)
            for (int c = 0; c < 3; ++c) b[11 + 3 * j + c] += p.sh(j, c);
    }
    const auto& q = g.image;
    auto b = out.segment<ParamLayout::kImageStride>(L.image_offset(image));
    b.segment<4>(0) += q.pose_rotation;
    b.segment<3>(4) += q.pose_translation;
    b.segment<3>(7) += q.log_std_rotation;
    b.segment<3>(10) += q.log_std_translation;
    b[13] += q.aperture;
    b[14] += q.focus_inv_depth;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) b[15 + 3 * r + c] += q.W(r, c);
    b.segment<3>(24) += q.q;
}

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& loss, const Eigen::VectorXd& theta,
                            double h_rel) {
    if (!(h_rel > 0)) throw std::invalid_argument("fd_gradient: h_rel must be positive");
    Eigen::VectorXd g(theta.size());
    Eigen::VectorXd t = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double h = std::max(h_rel * std::abs(theta[i]), 1e-6);
        t[i] = theta[i] + h;
        const double fp = loss(t);
        t[i] = theta[i] - h;
        const double fm = loss(t);
        t[i] = theta[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

GradReport check_gradients(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                           std::uint64_t seed, const RenderOptions& opts) {
    validate_scene(scene);
    ImageBuffer w(cam.width, cam.height);
    Rng rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (auto& v : w.data) v = uni(rng);

    const Gradients analytic_g = render_backward(scene, cam, params, w, opts);
    const ParamLayout L = layout_for(scene, 1);
    Eigen::VectorXd analytic = Eigen::VectorXd::Zero(L.size());
    scatter_gradient(analytic_g, L, 0, analytic);

    const Eigen::VectorXd theta = flatten(scene, {params});
    Scene work = scene;
    std::vector<PerImageParams> work_params{params};
    auto loss = [&](const Eigen::VectorXd& t) {
        unflatten(t, work, work_params);
        const ImageBuffer img = render(work, cam, work_params[0], opts);
        long double sum = 0.0L;
        for (std::size_t i = 0; i < img.data.size(); ++i) sum += static_cast<long double>(w.data[i]) * img.data[i];
        return static_cast<double>(sum);
    };
    constexpr double kHRel = 1e-4;
    Eigen::VectorXd fd = fd_gradient(loss, theta, kHRel);
    Eigen::VectorXd fd_half = fd_gradient(loss, theta, 0.5 * kHRel);
    // the floor h of 1e-6 is not halved by h_rel; redo those coordinates explicitly
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        if (kHRel * std::abs(theta[i]) > 1e-6) continue;
        Eigen::VectorXd t = theta;
        const double h = 0.5e-6;
        t[i] = theta[i] + h;
        const double fp = loss(t);
        t[i] = theta[i] - h;
        const double fm = loss(t);
        fd_half[i] = (fp - fm) / (2.0 * h);
    }

    // quaternion blocks: compare tangential components only
    auto project_quat = [](Eigen::VectorXd& v, Eigen::Index off, const Vec4d& q) {
        const Vec4d u = q.normalized();
        const Vec4d g = v.segment<4>(off);
        v.segment<4>(off) = g - g.dot(u) * u;
    };
    for (int k = 0; k < L.n_primitives; ++k) {
        const Eigen::Index off = L.primitive_offset(k) + 6;
        for (Eigen::VectorXd* v : {&analytic, &fd, &fd_half}) project_quat(*v, off, scene.primitives[k].rotation);
    }
    for (Eigen::VectorXd* v : {&analytic, &fd, &fd_half}) project_quat(*v, L.image_offset(0), params.motion.rotation);

    GradReport report;
    std::array<double, kParamGroupCount> worst_score{};
    for (Eigen::Index i = 0; i < L.size(); ++i) {
        const int gi = static_cast<int>(L.group_of(i));
        GroupReport& gr = report.groups[gi];
        const double f = fd[i], f2 = fd_half[i], a = analytic[i];
        const double scale = std::max(std::abs(f), std::abs(f2));
        // a jump or kink inside [theta - h, theta + h] shows up as step-size dependence
        if (std::abs(f - f2) > 2.5e-4 * scale + 2.5e-7) {
            ++gr.excluded;
            continue;
        }
        ++gr.compared;
        const double err = std::abs(a - f);
        double score;
        if (std::abs(f) < 1e-8) {
            gr.max_abs_error = std::max(gr.max_abs_error, err);
            if (err > kGradAbsTolerance) gr.passed = false;
            score = err / kGradAbsTolerance;
        } else {
            const double rel = err / std::max(std::abs(a), std::abs(f));
            gr.max_rel_error = std::max(gr.max_rel_error, rel);
            if (!(rel < kGradRelTolerance)) gr.passed = false;
            score = rel / kGradRelTolerance;
        }
        if (gr.worst < 0 || score > worst_score[gi]) {
            worst_score[gi] = score;
            gr.worst = i;
        }
    }
    for (const auto& gr : report.groups) report.passed = report.passed && gr.passed;
    return report;
}

std::string format_report(const GradReport& report) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-26s %12s %12s %8s %8s %8s  %s\n", "group", "max_rel", "max_abs", "worst",
                  "compared", "excluded", "status");
    os << line;
    for (int g = 0; g < kParamGroupCount; ++g) {
        const GroupReport& r = report.groups[g];
        std::snprintf(line, sizeof line, "%-26s %12.3e %12.3e %8lld %8d %8d  %s\n",
                      group_name(static_cast<ParamGroup>(g)), r.max_rel_error, r.max_abs_error,
                      static_cast<long long>(r.worst), r.compared, r.excluded, r.passed ? "ok" : "FAIL");
        os << line;
    }
    os << (report.passed ? "gradient check passed\n" : "gradient check FAILED\n");
    return os.str();
}

} // namespace rgs
