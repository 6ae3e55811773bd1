// Copyright Contributors to the robust-splat project
// SPDX-License-Identifier: Apache-2.0
#include "rgs/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rgs {

namespace {

void require_same_shape(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(what) + ": image dimensions differ (" + std::to_string(a.width) + "x" +
                                    std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                    std::to_string(b.height) + ")");
    }
}

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kSsimWindow / 2;
        g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[i];
    }
    for (double& v : g) v /= sum;
    return g;
}

/// Plane of doubles, row-major.
struct Plane {
    int w = 0, h = 0;
    std::vector<double> v;
    Plane(int w_, int h_) : w(w_), h(h_), v(std::size_t(w_) * h_, 0.0) {}
    double& at(int x, int y) { return v[std::size_t(y) * w + x]; }
    double at(int x, int y) const { return v[std::size_t(y) * w + x]; }
};

/// Valid-mode separable correlation with the Gaussian window.
Plane filter_valid(const Plane& in, const std::array<double, kSsimWindow>& g) {
    const int ow = in.w - kSsimWindow + 1, oh = in.h - kSsimWindow + 1;
    Plane tmp(ow, in.h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += g[i] * in.at(x + i, y);
            tmp.at(x, y) = s;
        }
    Plane out(ow, oh);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            double s = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) s += g[i] * tmp.at(x, y + i);
            out.at(x, y) = s;
        }
    return out;
}

/// Adjoint of filter_valid: scatters a valid-size map back to full size.
Plane filter_adjoint(const Plane& in, int w, int h, const std::array<double, kSsimWindow>& g) {
    Plane tmp(in.w, h);
    for (int y = 0; y < in.h; ++y)
        for (int x = 0; x < in.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) tmp.at(x, y + i) += g[i] * in.at(x, y);
    Plane out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < in.w; ++x)
            for (int i = 0; i < kSsimWindow; ++i) out.at(x + i, y) += g[i] * tmp.at(x, y);
    return out;
}

Plane channel(const ImageBuffer& img, int c) {
    Plane p(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) p.at(x, y) = img(x, y, c);
    return p;
}

Plane product(const Plane& a, const Plane& b) {
    Plane p(a.w, a.h);
    for (std::size_t i = 0; i < p.v.size(); ++i) p.v[i] = a.v[i] * b.v[i];
    return p;
}

SsimWithGrad ssim_impl(const ImageBuffer& a, const ImageBuffer& b, bool want_grad) {
    require_same_shape(a, b, "ssim");
    if (a.width < kSsimWindow || a.height < kSsimWindow) {
        throw std::invalid_argument("ssim: images must be at least 11x11");
    }
    const auto g = gaussian_taps();
    const int ow = a.width - kSsimWindow + 1, oh = a.height - kSsimWindow + 1;
    const double norm = 1.0 / (3.0 * ow * oh);
    SsimWithGrad out;
    if (want_grad) out.grad = ImageBuffer(a.width, a.height);
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Plane x = channel(a, c), y = channel(b, c);
        const Plane mx = filter_valid(x, g), my = filter_valid(y, g);
        const Plane exx = filter_valid(product(x, x), g), eyy = filter_valid(product(y, y), g);
        const Plane exy = filter_valid(product(x, y), g);
        Plane dA(ow, oh), dB(ow, oh), dC(ow, oh);
        double sum = 0.0;
        for (std::size_t i = 0; i < mx.v.size(); ++i) {
            const double ux = mx.v[i], uy = my.v[i];
            const double vx = exx.v[i] - ux * ux, vy = eyy.v[i] - uy * uy, cxy = exy.v[i] - ux * uy;
            const double n1 = 2.0 * ux * uy + kC1, n2 = 2.0 * cxy + kC2;
            const double d1 = ux * ux + uy * uy + kC1, d2 = vx + vy + kC2;
            const double s = (n1 * n2) / (d1 * d2);
            sum += s;
            if (want_grad) {
                dA.v[i] = s * (2.0 * uy / n1 - 2.0 * ux / d1 + 2.0 * ux / d2 - 2.0 * uy / n2);
                dB.v[i] = -s / d2;
                dC.v[i] = 2.0 * s / n2;
            }
        }
        total += sum;
        if (!want_grad) continue;
        const Plane gA = filter_adjoint(dA, a.width, a.height, g);
        const Plane gB = filter_adjoint(dB, a.width, a.height, g);
        const Plane gC = filter_adjoint(dC, a.width, a.height, g);
        for (int yy = 0; yy < a.height; ++yy)
            for (int xx = 0; xx < a.width; ++xx) {
                out.grad(xx, yy, c) =
                    norm * (gA.at(xx, yy) + 2.0 * x.at(xx, yy) * gB.at(xx, yy) + y.at(xx, yy) * gC.at(xx, yy));
            }
    }
    out.value = total * norm;
    return out;
}

} // namespace

double luma(const Vec3d& rgb) { return 0.299 * rgb[0] + 0.587 * rgb[1] + 0.114 * rgb[2]; }

double blurriness(const ImageBuffer& img) {
    if (img.width < 2 || img.height < 2) throw std::invalid_argument("blurriness: image must be at least 2x2");
    std::vector<double> Y(std::size_t(img.width) * img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) Y[std::size_t(y) * img.width + x] = luma(img.pixel(x, y));
    auto at = [&](int x, int y) { return Y[std::size_t(y) * img.width + x]; };
    double best = 0.0;
    for (int y = 1; y + 1 < img.height; ++y)
        for (int x = 1; x + 1 < img.width; ++x) {
            const double gx = 0.5 * (at(x + 1, y) - at(x - 1, y));
            const double gy = 0.5 * (at(x, y + 1) - at(x, y - 1));
            best = std::max(best, std::sqrt(gx * gx + gy * gy));
        }
    return best;
}

bool views_conflict(const ViewRecord& a, const ViewRecord& b, const SelectionOptions& opts) {
    const bool near = (a.center - b.center).norm() < opts.min_dist;
    const double cosang = std::clamp(a.axis.normalized().dot(b.axis.normalized()), -1.0, 1.0);
    const double angle = std::acos(cosang) * 180.0 / std::numbers::pi;
    const bool aligned = angle < opts.min_angle_deg;
    return opts.mode == ConflictMode::Conjunctive ? (near && aligned) : (near || aligned);
}

std::vector<ViewRecord> select_test_views(const std::vector<ViewRecord>& views, const SelectionOptions& opts) {
    if (opts.k < 1) throw std::invalid_argument("select_test_views: k must be >= 1");
    std::vector<ViewRecord> order = views;
    std::stable_sort(order.begin(), order.end(), [](const ViewRecord& a, const ViewRecord& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    std::vector<ViewRecord> chosen;
    for (auto& v : order) {
        if (static_cast<int>(chosen.size()) >= opts.k) break;
        const bool blocked = std::any_of(chosen.begin(), chosen.end(),
                                         [&](const ViewRecord& s) { return views_conflict(v, s, opts); });
        if (blocked) continue;
        v.selected = true;
        chosen.push_back(v);
    }
    return chosen;
}

double mse(const ImageBuffer& a, const ImageBuffer& b) {
    require_same_shape(a, b, "mse");
    if (a.data.empty()) throw std::invalid_argument("mse: empty image");
    double s = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        s += d * d;
    }
    return s / static_cast<double>(a.data.size());
}

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    const double m = mse(a, b);
    if (m <= 0.0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) { return ssim_impl(a, b, false).value; }

SsimWithGrad ssim_with_grad(const ImageBuffer& a, const ImageBuffer& b) { return ssim_impl(a, b, true); }

} // namespace rgs
