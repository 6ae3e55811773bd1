// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/renderer.hpp"

#include "raster.hpp"
#include "rgs/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rgs {

namespace detail {

WorldGaussian world_stage(const GaussianPrimitive& p, const EffectiveParams& eff, WorldCache* cache) {
    const Vec4d q_unit = p.rotation.normalized();
    const Mat3d R = quat_to_rotation<double>(q_unit);
    const Vec3d scale2 = (2.0 * p.log_scale).array().exp();
    const Mat3d sigma = R * scale2.asDiagonal() * R.transpose();
    const double alpha = sigmoid(p.opacity_logit);
    const auto blurred = motion_blur_transform<double>(p.position, sigma, alpha, eff.pose_rotation,
                                                       eff.pose_translation, eff.blur_rotation_cov,
                                                       eff.blur_translation_cov);
    WorldGaussian out{blurred.mean, blurred.cov, blurred.alpha};
    if (cache) {
        cache->q_unit = q_unit;
        cache->rotation = R;
        cache->scale2 = scale2;
        cache->sigma = sigma;
        cache->alpha = alpha;
        cache->skew_mu = skew(p.position);
        cache->inner = sigma + cache->skew_mu * eff.blur_rotation_cov * cache->skew_mu.transpose() +
                       eff.blur_translation_cov;
        cache->mass_ratio = std::sqrt(sigma.determinant() / cache->inner.determinant());
        cache->out = out;
    }
    return out;
}

std::optional<Splat2D> project_stage(const WorldGaussian& g, const ShCoeffs& sh, int sh_degree,
                                     const PinholeCamera& cam, const EffectiveParams& eff,
                                     const RenderOptions& opts, ProjectionCache* cache) {
    const Vec3d x_cam = to_camera(cam, g.mean);
    const auto proj = project(cam, x_cam);
    if (!proj) return std::nullopt;
    const Mat23d J = *projection_jacobian(cam, x_cam);
    const Mat23d T = J * cam.rotation;
    Mat2d cov = T * g.cov * T.transpose();
    cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
    cov(0, 0) += opts.dilation;
    cov(1, 1) += opts.dilation;

    const double radius = defocus_radius<double>(proj->depth, eff.aperture, eff.focus_inv_depth);
    const auto defocused = apply_defocus<double>(cov, g.alpha, radius);
    const double det = defocused.cov.determinant();
    if (!(det > 1e-12) || !std::isfinite(det)) return std::nullopt;

    Splat2D s;
    s.mean2d = proj->pixel;
    s.cov2d = defocused.cov;
    s.conic = Vec3d(defocused.cov(1, 1) / det, -defocused.cov(0, 1) / det, defocused.cov(0, 0) / det);
    s.depth = proj->depth;
    s.alpha_eff = defocused.alpha;
    const double hx = opts.sigma_cutoff * std::sqrt(defocused.cov(0, 0));
    const double hy = opts.sigma_cutoff * std::sqrt(defocused.cov(1, 1));
    s.x0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.x() - hx)));
    s.x1 = std::min(cam.width - 1, static_cast<int>(std::floor(s.mean2d.x() + hx)));
    s.y0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.y() - hy)));
    s.y1 = std::min(cam.height - 1, static_cast<int>(std::floor(s.mean2d.y() + hy)));
    if (!std::isfinite(hx) || !std::isfinite(hy) || s.x0 > s.x1 || s.y0 > s.y1) return std::nullopt;

    const Vec3d view = g.mean - cam.center();
    const Vec3d dir = view.normalized();
    const ShBasis basis = sh_basis_unchecked(dir, sh_degree);
    const Vec3d linear = decode_color_linear(sh, basis);
    const Vec3d color = linear.cwiseMax(0.0);
    s.color = apply_color_affine<double>(color, eff.W, eff.q);

    if (cache) {
        cache->x_cam = x_cam;
        cache->J = J;
        cache->T = T;
        cache->cov = cov;
        cache->radius = radius;
        cache->defocus_ratio = defocused.alpha / g.alpha;
        cache->view = view;
        cache->dir = dir;
        cache->basis = basis;
        cache->color_linear = linear;
        cache->color = color;
    }
    return s;
}

Frame build_frame(std::vector<Splat2D> splats, int width, int height) {
    std::sort(splats.begin(), splats.end(), [](const Splat2D& a, const Splat2D& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.primitive < b.primitive;
    });
    Frame f;
    f.width = width;
    f.height = height;
    f.rows.assign(height, {});
    for (int i = 0; i < static_cast<int>(splats.size()); ++i) {
        for (int y = splats[i].y0; y <= splats[i].y1; ++y) f.rows[y].push_back(i);
    }
    f.splats = std::move(splats);
    return f;
}

Vec3d composite_pixel(const Frame& frame, int x, int y, const RenderOptions& opts, double* final_transmittance,
                      std::vector<Contribution>* trace) {
    Vec3d c = Vec3d::Zero();
    double T = 1.0;
    for (int idx : frame.rows[y]) {
        const Splat2D& s = frame.splats[idx];
        if (x < s.x0 || x > s.x1) continue;
        const double dx = x - s.mean2d.x();
        const double dy = y - s.mean2d.y();
        const double power = -0.5 * (s.conic[0] * dx * dx + 2.0 * s.conic[1] * dx * dy + s.conic[2] * dy * dy);
        const double falloff = std::exp(power);
        const double raw = s.alpha_eff * falloff;
        const bool clamped = raw > opts.alpha_clamp_max;
        const double a = clamped ? opts.alpha_clamp_max : raw;
        if (a < opts.min_alpha) continue;
        if (trace) trace->push_back({idx, a, falloff, clamped, dx, dy, T});
        c += (T * a) * s.color;
        T *= 1.0 - a;
        if (T < opts.transmittance_floor) break;
    }
    c += T * opts.background;
    if (final_transmittance) *final_transmittance = T;
    return c;
}

ImageBuffer composite(const Frame& frame, const RenderOptions& opts) {
    ImageBuffer img(frame.width, frame.height);
    parallel_for(frame.height, [&](int y) {
        for (int x = 0; x < frame.width; ++x) {
            const Vec3d c = composite_pixel(frame, x, y, opts, nullptr, nullptr);
            img.set_pixel(x, y, c.cwiseMax(0.0).cwiseMin(1.0));
        }
    });
    return img;
}

} // namespace detail

void validate_render_options(const RenderOptions& o) {
    if (!(o.sigma_cutoff > 0) || !(o.min_alpha > 0) || !(o.transmittance_floor > 0) || !(o.alpha_clamp_max > 0) ||
        !(o.alpha_clamp_max < 1) || !(o.dilation >= 0)) {
        throw std::invalid_argument("render options: thresholds must be positive and alpha_clamp_max < 1");
    }
}

std::optional<Splat2D> splat(const WorldGaussian& g, const ShCoeffs& sh, int sh_degree, const PinholeCamera& cam,
                             const EffectiveParams& eff, const RenderOptions& opts) {
    return detail::project_stage(g, sh, sh_degree, cam, eff, opts, nullptr);
}

ImageBuffer render_world(const std::vector<WorldGaussian>& gaussians, const Scene& scene, const PinholeCamera& cam,
                         const EffectiveParams& eff, const RenderOptions& opts) {
    std::vector<Splat2D> splats;
    splats.reserve(gaussians.size());
    for (std::size_t k = 0; k < gaussians.size(); ++k) {
        auto s = detail::project_stage(gaussians[k], scene.primitives[k].sh, scene.sh_degree, cam, eff, opts, nullptr);
        if (s) {
            s->primitive = static_cast<int>(k);
            splats.push_back(*s);
        }
    }
    return detail::composite(detail::build_frame(std::move(splats), cam.width, cam.height), opts);
}

ImageBuffer render(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                   const RenderOptions& opts) {
    if (scene.empty()) throw std::invalid_argument("render: scene is empty");
    validate_camera(cam);
    validate_render_options(opts);
    const EffectiveParams eff = effective(params);
    std::vector<WorldGaussian> world(scene.size());
    for (std::size_t k = 0; k < scene.size(); ++k) world[k] = detail::world_stage(scene.primitives[k], eff, nullptr);
    return render_world(world, scene, cam, eff, opts);
}

ImageBuffer render_mc_oracle(const Scene& scene, const PinholeCamera& cam, const PerImageParams& params,
                             int n_samples, std::uint64_t seed, const RenderOptions& opts) {
    if (n_samples < 1) throw std::invalid_argument("render_mc_oracle: n_samples must be >= 1");
    if (scene.empty()) throw std::invalid_argument("render_mc_oracle: scene is empty");
    validate_camera(cam);
    validate_render_options(opts);
    const EffectiveParams eff = effective(params);
    // the sampled transform already contains pose and blur
    EffectiveParams image_stage = eff;
    image_stage.pose_rotation.setIdentity();
    image_stage.pose_translation.setZero();
    image_stage.blur_rotation_cov.setZero();
    image_stage.blur_translation_cov.setZero();
    image_stage.has_blur = false;

    std::vector<Mat3d> sigmas(scene.size());
    std::vector<double> alphas(scene.size());
    for (std::size_t k = 0; k < scene.size(); ++k) {
        sigmas[k] = covariance_of(scene.primitives[k]);
        alphas[k] = opacity_of(scene.primitives[k]);
    }
    const Mat3d rot_factor = spd_factor<double>(eff.blur_rotation_cov);

    Rng rng(seed);
    ImageBuffer acc(cam.width, cam.height);
    std::vector<WorldGaussian> world(scene.size());
    for (int s = 0; s < n_samples; ++s) {
        const Vec3d eps_r = sample_standard_normal(rng);
        const Vec3d eps_t = sample_standard_normal(rng);
        const Mat3d RE = eff.pose_rotation * so3_exp<double>(rot_factor * eps_r);
        for (std::size_t k = 0; k < scene.size(); ++k) {
            world[k].mean = zeta_exact<double>(scene.primitives[k].position, eps_r, eps_t, eff.pose_rotation,
                                               eff.pose_translation, eff.blur_rotation_cov, eff.blur_translation_cov);
            world[k].cov = RE * sigmas[k] * RE.transpose();
            world[k].alpha = alphas[k];
        }
        const ImageBuffer img = render_world(world, scene, cam, image_stage, opts);
        for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += img.data[i];
    }
    for (auto& v : acc.data) v /= n_samples;
    return acc;
}

} // namespace rgs
