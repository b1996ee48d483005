#include "gsmap/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gsmap {

namespace {

constexpr double kInvDepthEps = 1e-6;

double sign_of(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

} // namespace

double loss_rgb_l1(const ImageD& rendered, const ImageD& target,
                   const ImageD* weight, ImageD* grad) {
    if (!rendered.same_shape(target))
        throw std::runtime_error("loss_rgb_l1: shape mismatch");
    const bool weighted = weight && !weight->empty();
    if (weighted && (weight->h != rendered.h || weight->w != rendered.w))
        throw std::runtime_error("loss_rgb_l1: weight shape mismatch");
    if (grad) *grad = ImageD(rendered.h, rendered.w, rendered.c);

    double wsum = 0.0;
    if (weighted) {
        for (double v : weight->data) wsum += v;
    } else {
        wsum = double(rendered.h) * rendered.w;
    }
    const double denom = wsum * rendered.c;
    if (denom <= 0.0) return 0.0;

    double acc = 0.0;
    const size_t n_px = size_t(rendered.h) * rendered.w;
    for (size_t px = 0; px < n_px; ++px) {
        const double wgt = weighted ? weight->data[px] : 1.0;
        if (wgt == 0.0) continue;
        for (int ch = 0; ch < rendered.c; ++ch) {
            const double diff = rendered.data[px * rendered.c + ch] - target.data[px * rendered.c + ch];
            acc += wgt * std::abs(diff);
            if (grad) grad->data[px * rendered.c + ch] = wgt * sign_of(diff) / denom;
        }
    }
    return acc / denom;
}

double loss_feat_kl(const ImageD& rendered, const ImageD& target,
                    ImageD* grad, ImageD* residual) {
    if (!rendered.same_shape(target))
        throw std::runtime_error("loss_feat_kl: shape mismatch");
    const int nc = rendered.c;
    if (nc < 1) throw std::runtime_error("loss_feat_kl: no channels");
    if (grad) *grad = ImageD(rendered.h, rendered.w, nc);
    if (residual) *residual = ImageD(rendered.h, rendered.w, 1);

    const size_t n_px = size_t(rendered.h) * rendered.w;
    std::vector<double> pt(nc), pr(nc);
    double acc = 0.0;
    for (size_t px = 0; px < n_px; ++px) {
        const double* t = &target.data[px * nc];
        const double* r = &rendered.data[px * nc];
        // log-softmax with max subtraction for stability
        double tmax = t[0], rmax = r[0];
        for (int ch = 1; ch < nc; ++ch) {
            tmax = std::max(tmax, t[ch]);
            rmax = std::max(rmax, r[ch]);
        }
        double tz = 0.0, rz = 0.0;
        for (int ch = 0; ch < nc; ++ch) {
            pt[ch] = std::exp(t[ch] - tmax);
            pr[ch] = std::exp(r[ch] - rmax);
            tz += pt[ch];
            rz += pr[ch];
        }
        const double log_tz = std::log(tz), log_rz = std::log(rz);
        double kl = 0.0;
        for (int ch = 0; ch < nc; ++ch) {
            pt[ch] /= tz;
            pr[ch] /= rz;
            const double log_t = t[ch] - tmax - log_tz;
            const double log_r = r[ch] - rmax - log_rz;
            kl += pt[ch] * (log_t - log_r);
            if (grad) grad->data[px * nc + ch] = (pr[ch] - pt[ch]) / double(n_px);
        }
        acc += kl;
        if (residual) residual->data[px] = kl;
    }
    return acc / double(n_px);
}

double loss_depth_smooth(const ImageD& depth, const ImageD& image, ImageD* grad_depth) {
    if (depth.h != image.h || depth.w != image.w || depth.c != 1)
        throw std::runtime_error("loss_depth_smooth: shape mismatch");
    const int h = depth.h, w = depth.w, nc = image.c;
    if (h < 2 || w < 2) throw std::runtime_error("loss_depth_smooth: image too small");
    if (grad_depth) *grad_depth = ImageD(h, w, 1);

    // Inverse depth and its derivative with respect to depth.
    ImageD inv(h, w, 1), dinv(h, w, 1);
    for (size_t i = 0; i < inv.data.size(); ++i) {
        const double d = depth.data[i];
        const double cl = std::max(d, kInvDepthEps);
        inv.data[i] = 1.0 / cl;
        dinv.data[i] = d > kInvDepthEps ? -1.0 / (d * d) : 0.0;
    }

    const double n = double(h - 1) * (w - 1);
    double acc = 0.0;
    for (int y = 0; y + 1 < h; ++y) {
        for (int x = 0; x + 1 < w; ++x) {
            double gx_img = 0.0, gy_img = 0.0;
            for (int ch = 0; ch < nc; ++ch) {
                gx_img += std::abs(image.at(y, x + 1, ch) - image.at(y, x, ch));
                gy_img += std::abs(image.at(y + 1, x, ch) - image.at(y, x, ch));
            }
            const double wx = std::exp(-gx_img);
            const double wy = std::exp(-gy_img);
            const double dx = inv.at(y, x + 1) - inv.at(y, x);
            const double dy = inv.at(y + 1, x) - inv.at(y, x);
            acc += std::abs(dx) * wx + std::abs(dy) * wy;
            if (grad_depth) {
                const double sx = sign_of(dx) * wx / n;
                const double sy = sign_of(dy) * wy / n;
                grad_depth->at(y, x + 1) += sx * dinv.at(y, x + 1);
                grad_depth->at(y, x) -= sx * dinv.at(y, x);
                grad_depth->at(y + 1, x) += sy * dinv.at(y + 1, x);
                grad_depth->at(y, x) -= sy * dinv.at(y, x);
            }
        }
    }
    return acc / n;
}

double loss_sky(const ImageD& opacity, const MaskU8& sky_mask, ImageD* grad_opacity) {
    if (opacity.h != sky_mask.h || opacity.w != sky_mask.w || opacity.c != 1 || sky_mask.c != 1)
        throw std::runtime_error("loss_sky: shape mismatch");
    if (grad_opacity) *grad_opacity = ImageD(opacity.h, opacity.w, 1);

    const size_t n = opacity.data.size();
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double m = sky_mask.data[i] ? 1.0 : 0.0;
        const double x = m - (1.0 - opacity.data[i]);
        acc += std::abs(x);
        if (grad_opacity) grad_opacity->data[i] = sign_of(x) / double(n);
    }
    return acc / double(n);
}

} // namespace gsmap
