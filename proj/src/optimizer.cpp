// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/optimizer.hpp"

#include "rgs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace rgs {

namespace {

ParamLayout primitive_layout(const Scene& scene) {
    return ParamLayout{static_cast<int>(scene.size()), scene.sh_degree, 0};
}

Eigen::VectorXd image_vector(const PerImageParams& p, int sh_degree) {
    Scene empty;
    empty.sh_degree = sh_degree;
    return flatten(empty, {p});
}

void set_image_vector(const Eigen::VectorXd& v, PerImageParams& p, int sh_degree) {
    Scene empty;
    empty.sh_degree = sh_degree;
    std::vector<PerImageParams> one{p};
    unflatten(v, empty, one);
    p = one[0];
}

Eigen::VectorXd primitive_lr(const Scene& scene, const LearningRates& lr, double position_lr) {
    const ParamLayout L = primitive_layout(scene);
    Eigen::VectorXd out(L.size());
    const int stride = L.primitive_stride();
    for (int k = 0; k < L.n_primitives; ++k) {
        auto b = out.segment(L.primitive_offset(k), stride);
        b.segment<3>(0).setConstant(position_lr);
        b.segment<3>(3).setConstant(lr.scale);
        b.segment<4>(6).setConstant(lr.rotation);
        b[10] = lr.opacity;
        b.tail(stride - 11).setConstant(lr.sh);
    }
    return out;
}

/// Image block rates in ParamLayout order; zero for frozen groups.
Eigen::VectorXd image_lr(double pose_rotation, double pose_translation, double blur, double defocus, double color) {
    Eigen::VectorXd out(ParamLayout::kImageStride);
    out.segment<4>(0).setConstant(pose_rotation);
    out.segment<3>(4).setConstant(pose_translation);
    out.segment<6>(7).setConstant(blur);
    out.segment<2>(13).setConstant(defocus);
    out.segment<12>(15).setConstant(color);
    return out;
}

double decayed(double start, double end, int step, int total) {
    if (total <= 1 || start <= 0.0 || end <= 0.0) return start;
    const double s = std::min(1.0, double(step) / double(total - 1));
    return std::exp((1.0 - s) * std::log(start) + s * std::log(end));
}

Eigen::VectorXd gather_gradient(const Gradients& g, const Scene& scene, int sh_degree,
                                Eigen::VectorXd& image_grad) {
    const ParamLayout L{static_cast<int>(scene.size()), sh_degree, 1};
    Eigen::VectorXd all = Eigen::VectorXd::Zero(L.size());
    scatter_gradient(g, L, 0, all);
    image_grad = all.tail(ParamLayout::kImageStride);
    return all.head(L.size() - ParamLayout::kImageStride);
}

} // namespace

void validate_fit_config(const FitConfig& cfg) {
    if (cfg.iterations < 0) throw std::invalid_argument("fit config: iterations must be >= 0");
    const LearningRates& r = cfg.lr;
    for (double v : {r.position, r.position_final, r.scale, r.rotation, r.opacity, r.sh, r.pose_rotation,
                     r.pose_translation, r.blur, r.defocus, r.color}) {
        if (!(v > 0.0)) throw std::invalid_argument("fit config: learning rates must be positive");
    }
    if (cfg.lambda_l1 < 0 || cfg.lambda_dssim < 0 || std::abs(cfg.lambda_l1 + cfg.lambda_dssim - 1.0) > 1e-9) {
        throw std::invalid_argument("fit config: lambda_l1 + lambda_dssim must equal 1");
    }
    if (cfg.prune_interval < 0) throw std::invalid_argument("fit config: prune_interval must be >= 0");
    if (!(cfg.prune_opacity_threshold >= 0.0 && cfg.prune_opacity_threshold < 1.0)) {
        throw std::invalid_argument("fit config: prune_opacity_threshold must be in [0, 1)");
    }
    validate_render_options(cfg.render);
}

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& s, const Eigen::VectorXd& lr) {
    if (grad.size() != theta.size() || lr.size() != theta.size() || s.m.size() != theta.size() ||
        s.v.size() != theta.size()) {
        throw std::invalid_argument("adam_step: size mismatch");
    }
    ++s.step;
    s.m = s.beta1 * s.m + (1.0 - s.beta1) * grad;
    s.v = s.beta2 * s.v + (1.0 - s.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(s.beta1, double(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, double(s.step));
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double m_hat = s.m[i] / c1;
        const double v_hat = s.v[i] / c2;
        theta[i] -= lr[i] * m_hat / (std::sqrt(v_hat) + s.eps);
    }
}

PhotometricLoss photometric_loss(const ImageBuffer& rendered, const ImageBuffer& target, double lambda_l1,
                                 double lambda_dssim) {
    if (!rendered.same_shape(target)) throw std::invalid_argument("photometric_loss: image dimensions differ");
    PhotometricLoss out;
    const std::size_t n = rendered.data.size();
    out.grad = ImageBuffer(rendered.width, rendered.height);
    double l1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = rendered.data[i] - target.data[i];
        l1 += std::abs(d);
        out.grad.data[i] = lambda_l1 * (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) / double(n);
    }
    out.l1 = l1 / double(n);
    if (lambda_dssim > 0.0) {
        const SsimWithGrad s = ssim_with_grad(rendered, target);
        out.ssim = s.value;
        for (std::size_t i = 0; i < n; ++i) out.grad.data[i] -= lambda_dssim * s.grad.data[i];
    } else {
        out.ssim = ssim(rendered, target);
    }
    out.loss = lambda_l1 * out.l1 + lambda_dssim * (1.0 - out.ssim);
    return out;
}

double scene_extent_of(const Scene& scene) {
    if (scene.empty()) return 1.0;
    Vec3d lo = scene.primitives[0].position, hi = lo;
    for (const auto& p : scene.primitives) {
        lo = lo.cwiseMin(p.position);
        hi = hi.cwiseMax(p.position);
    }
    const double span = (hi - lo).maxCoeff();
    return span > 0.0 ? span : 1.0;
}

double median_depth(const Scene& scene, const std::vector<TrainView>& views) {
    std::vector<double> depths;
    for (const auto& v : views)
        for (const auto& p : scene.primitives) {
            const double z = to_camera(v.camera, p.position).z();
            if (z > kZNear) depths.push_back(z);
        }
    if (depths.empty()) return 1.0;
    const std::size_t mid = depths.size() / 2;
    std::nth_element(depths.begin(), depths.begin() + mid, depths.end());
    return depths[mid];
}

std::vector<int> prune_candidates(const Scene& scene, double threshold) {
    std::vector<int> out;
    for (std::size_t k = 0; k < scene.size(); ++k)
        if (opacity_of(scene.primitives[k]) < threshold) out.push_back(static_cast<int>(k));
    if (out.size() == scene.size()) out.clear();
    return out;
}

FitResult fit(const Scene& initial, const std::vector<TrainView>& dataset, const FitConfig& cfg) {
    validate_fit_config(cfg);
    validate_scene(initial);
    if (initial.empty()) throw std::invalid_argument("fit: initial scene is empty");
    if (dataset.empty()) throw std::invalid_argument("fit: dataset is empty");
    for (const auto& v : dataset) {
        validate_camera(v.camera);
        if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
            throw std::invalid_argument("fit: image '" + v.id + "' does not match its camera size");
        }
    }

    const double extent = cfg.scene_extent > 0.0 ? cfg.scene_extent : scene_extent_of(initial);
    const double focus = median_depth(initial, dataset);
    const int deg = initial.sh_degree;

    FitResult result;
    result.scene = initial;
    result.params.assign(dataset.size(), initial_params(cfg.mechanisms, focus));
    for (auto& p : result.params) p.defocus.aperture = cfg.initial_aperture;

    Eigen::VectorXd theta = flatten(result.scene, {});
    AdamState prim_state(theta.size());
    std::vector<Eigen::VectorXd> img_theta;
    std::vector<AdamState> img_state;
    for (const auto& p : result.params) {
        img_theta.push_back(image_vector(p, deg));
        img_state.emplace_back(ParamLayout::kImageStride);
    }
    const Eigen::VectorXd img_rates = image_lr(cfg.lr.pose_rotation, cfg.lr.pose_translation * extent, cfg.lr.blur,
                                               cfg.lr.defocus, cfg.lr.color);

    Rng rng(cfg.seed);
    std::vector<int> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    const int n = static_cast<int>(dataset.size());

    for (int t = 0; t < cfg.iterations; ++t) {
        if (t % n == 0) std::shuffle(order.begin(), order.end(), rng);
        const int i = order[t % n];
        const TrainView& view = dataset[i];

        PhotometricLoss loss;
        const RenderWithGrad rg = render_with_backward(
            result.scene, view.camera, result.params[i],
            [&](const ImageBuffer& img) {
                loss = photometric_loss(img, view.image, cfg.lambda_l1, cfg.lambda_dssim);
                return loss.grad;
            },
            cfg.render);
        result.trace.push_back(
            {t, view.id, loss.loss, loss.l1, loss.ssim, static_cast<int>(result.scene.size())});

        Eigen::VectorXd g_img;
        const Eigen::VectorXd g_prim = gather_gradient(rg.grad, result.scene, deg, g_img);
        const double pos_lr = extent * decayed(cfg.lr.position, cfg.lr.position_final, t, cfg.iterations);
        adam_step(theta, g_prim, prim_state, primitive_lr(result.scene, cfg.lr, pos_lr));
        adam_step(img_theta[i], g_img, img_state[i], img_rates);
        std::vector<PerImageParams> none;
        unflatten(theta, result.scene, none);
        set_image_vector(img_theta[i], result.params[i], deg);

        if (cfg.prune_interval > 0 && (t + 1) % cfg.prune_interval == 0) {
            const std::vector<int> drop = prune_candidates(result.scene, cfg.prune_opacity_threshold);
            if (drop.empty()) continue;
            const int stride = primitive_layout(result.scene).primitive_stride();
            std::vector<bool> gone(result.scene.size(), false);
            for (int k : drop) gone[k] = true;
            Scene kept;
            kept.sh_degree = deg;
            std::vector<int> keep_idx;
            for (std::size_t k = 0; k < result.scene.size(); ++k) {
                if (gone[k]) continue;
                kept.primitives.push_back(result.scene.primitives[k]);
                keep_idx.push_back(static_cast<int>(k));
            }
            AdamState next(Eigen::Index(keep_idx.size()) * stride);
            next.step = prim_state.step;
            for (std::size_t j = 0; j < keep_idx.size(); ++j) {
                next.m.segment(Eigen::Index(j) * stride, stride) =
                    prim_state.m.segment(Eigen::Index(keep_idx[j]) * stride, stride);
                next.v.segment(Eigen::Index(j) * stride, stride) =
                    prim_state.v.segment(Eigen::Index(keep_idx[j]) * stride, stride);
            }
            result.scene = std::move(kept);
            prim_state = std::move(next);
            theta = flatten(result.scene, {});
        }
    }
    return result;
}

void write_loss_csv(const std::vector<LossRecord>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(10);
    out << "step,image_id,loss,l1,ssim,primitives\n";
    for (const auto& r : trace)
        out << r.step << ',' << r.image_id << ',' << r.loss << ',' << r.l1 << ',' << r.ssim << ',' << r.primitives
            << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

AdaptResult test_time_adapt(const Scene& scene, const ImageBuffer& target, const PinholeCamera& cam,
                            const AdaptConfig& cfg) {
    if (cfg.steps < 0) throw std::invalid_argument("adapt: steps must be >= 0");
    if (!target.same_shape(ImageBuffer(cam.width, cam.height))) {
        throw std::invalid_argument("adapt: target image does not match the camera size");
    }
    validate_scene(scene);
    const double extent = cfg.scene_extent > 0.0 ? cfg.scene_extent : scene_extent_of(scene);
    MechanismFlags flags = MechanismFlags::none();
    flags.pose = true;
    flags.color = true;

    AdaptResult out;
    out.params = initial_params(flags, 1.0);
    out.psnr_before = psnr(render(scene, cam, out.params, cfg.render), target);

    Eigen::VectorXd theta = image_vector(out.params, scene.sh_degree);
    AdamState state(ParamLayout::kImageStride);
    const Eigen::VectorXd rates =
        image_lr(cfg.lr_pose_rotation, cfg.lr_pose_translation * extent, 0.0, 0.0, cfg.lr_color);
    for (int t = 0; t < cfg.steps; ++t) {
        PhotometricLoss loss;
        const RenderWithGrad rg = render_with_backward(
            scene, cam, out.params,
            [&](const ImageBuffer& img) {
                loss = photometric_loss(img, target, cfg.lambda_l1, cfg.lambda_dssim);
                return loss.grad;
            },
            cfg.render);
        out.trace.push_back({t, "", loss.loss, loss.l1, loss.ssim, static_cast<int>(scene.size())});
        Eigen::VectorXd g_img;
        gather_gradient(rg.grad, scene, scene.sh_degree, g_img);
        adam_step(theta, g_img, state, rates);
        set_image_vector(theta, out.params, scene.sh_degree);
    }
    out.psnr_after = psnr(render(scene, cam, out.params, cfg.render), target);
    return out;
}

} // namespace rgs
