#include "doctest.h"

#include <functional>

#include "gsmap/losses.hpp"
#include "gsmap/render.hpp"
#include "test_util.hpp"

using namespace gsmap;

namespace {

// Smooth-path config: wide coverage, no skip or early-out thresholds, so
// finite differences never cross a hard cutoff.
RenderConfig fd_config() {
    RenderConfig cfg;
    cfg.coverage_sigma = 7.0;
    cfg.alpha_skip = 0.0;
    cfg.min_transmittance = 0.0;
    cfg.background = Vec3(0.3, 0.2, 0.6);
    cfg.threads = 1;
    return cfg;
}

ImageD random_plane(Rng& rng, int h, int w, int c) {
    ImageD img(h, w, c);
    for (double& v : img.data) v = rng.uniform(-1.0, 1.0);
    return img;
}

double dot_plane(const ImageD& a, const ImageD& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
    return s;
}

double objective(const GaussianMap& map, const ViewGeometry& geom, const RenderConfig& cfg,
                 const RenderGrads& up) {
    const RenderOutput out = render(map, geom, cfg);
    double s = dot_plane(up.rgb, out.rgb) + dot_plane(up.depth, out.depth) +
               dot_plane(up.opacity, out.opacity);
    if (!up.feat.empty()) s += dot_plane(up.feat, out.feat);
    return s;
}

// Central-difference check of every parameter of every Gaussian.
void check_render_gradients(uint64_t seed, size_t n_gaussians) {
    Rng rng(seed);
    GaussianMap map = gsmap_test::random_map(rng, n_gaussians, 2, 1, 0.2);
    const ViewGeometry geom = gsmap_test::test_geometry(12, 12, 6, 6);
    const RenderConfig cfg = fd_config();

    RenderGrads up;
    up.rgb = random_plane(rng, 12, 12, 3);
    up.depth = random_plane(rng, 12, 12, 1);
    up.opacity = random_plane(rng, 12, 12, 1);
    up.feat = random_plane(rng, 6, 6, 2);

    const RenderOutput out = render(map, geom, cfg);
    GradientBuffer grads;
    render_backward(map, geom, out, up, cfg, grads);
    CHECK(grads.first_non_finite() == -1);

    const double h = 1e-4;
    auto fd = [&](std::function<double&(GaussianMap&)> param) {
        GaussianMap m = map;
        param(m) += h;
        const double hi = objective(m, geom, cfg, up);
        param(m) -= 2 * h;
        const double lo = objective(m, geom, cfg, up);
        return (hi - lo) / (2 * h);
    };
    auto check = [&](double analytic, double numeric, const char* tag, size_t gi, int k) {
        CAPTURE(tag);
        CAPTURE(gi);
        CAPTURE(k);
        if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-6) return;
        const double rel =
            std::abs(analytic - numeric) / std::max(std::abs(analytic), std::abs(numeric));
        CHECK(rel < 2e-3);
    };

    for (size_t gi = 0; gi < map.size(); ++gi) {
        for (int k = 0; k < 3; ++k)
            check(grads.mu[gi][k], fd([gi, k](GaussianMap& m) -> double& { return m[gi].mu[k]; }),
                  "mu", gi, k);
        for (int k = 0; k < 4; ++k)
            check(grads.q[gi][k], fd([gi, k](GaussianMap& m) -> double& { return m[gi].q[k]; }),
                  "q", gi, k);
        for (int k = 0; k < 3; ++k)
            check(grads.log_s[gi][k],
                  fd([gi, k](GaussianMap& m) -> double& { return m[gi].log_s[k]; }), "log_s", gi,
                  k);
        check(grads.alpha_logit[gi],
              fd([gi](GaussianMap& m) -> double& { return m[gi].alpha_logit; }), "alpha", gi, 0);
        for (int k = 0; k < kMaxShCoeffs; ++k)
            for (int ch = 0; ch < 3; ++ch)
                check(grads.sh[gi][k][ch],
                      fd([gi, k, ch](GaussianMap& m) -> double& { return m[gi].sh[k][ch]; }),
                      "sh", gi, k * 3 + ch);
        for (int k = 0; k < 2; ++k)
            check(grads.feat[gi][k],
                  fd([gi, k](GaussianMap& m) -> double& { return m[gi].feat[k]; }), "feat", gi, k);
    }
}

} // namespace

TEST_CASE("render_backward matches finite differences") {
    check_render_gradients(101, 5);
    check_render_gradients(202, 6);
}

TEST_CASE("render_backward requires the forward blend records") {
    Rng rng(9);
    const GaussianMap map = gsmap_test::random_map(rng, 3, 2, 0);
    const ViewGeometry geom = gsmap_test::test_geometry(12, 12);
    RenderOutput out;  // no forward pass
    RenderGrads up;
    up.rgb = ImageD(12, 12, 3, 0.1);
    GradientBuffer grads;
    CHECK_THROWS_WITH_AS(render_backward(map, geom, out, up, fd_config(), grads),
                         doctest::Contains("forward pass required"), std::runtime_error);
}

TEST_CASE("visibility flags mark only splatted gaussians") {
    GaussianMap map;
    map.feat_dim = 0;
    map.gaussians = {gsmap_test::make_gaussian(Vec3(0, 0, 4), 0.3, 0.6, Vec3(1, 0, 0), 0),
                     gsmap_test::make_gaussian(Vec3(0, 0, -4), 0.3, 0.6, Vec3(1, 0, 0), 0)};
    const ViewGeometry geom = gsmap_test::test_geometry(16, 16);
    const RenderConfig cfg = fd_config();
    const RenderOutput out = render(map, geom, cfg);
    RenderGrads up;
    up.rgb = ImageD(16, 16, 3, 1.0);
    GradientBuffer grads;
    render_backward(map, geom, out, up, cfg, grads);
    CHECK(grads.visible[0] == 1);
    CHECK(grads.visible[1] == 0);
    CHECK(grads.pos2d_ndc[0].norm() > 0.0);
    CHECK(grads.mu[1].norm() == 0.0);
}

TEST_CASE("loss gradients match finite differences") {
    Rng rng(404);
    const int h = 6, w = 7;
    const double step = 1e-6;

    auto fd_plane = [&](ImageD& x, const std::function<double()>& f, const ImageD& analytic,
                        double tol) {
        for (size_t i = 0; i < x.data.size(); ++i) {
            const double keep = x.data[i];
            x.data[i] = keep + step;
            const double hi = f();
            x.data[i] = keep - step;
            const double lo = f();
            x.data[i] = keep;
            const double num = (hi - lo) / (2 * step);
            CAPTURE(i);
            CHECK(analytic.data[i] == doctest::Approx(num).epsilon(tol).scale(1.0));
        }
    };

    SUBCASE("rgb l1") {
        ImageD rendered = ImageD(h, w, 3);
        ImageD target = ImageD(h, w, 3);
        ImageD weight = ImageD(h, w, 1);
        for (double& v : rendered.data) v = rng.uniform(0.0, 1.0);
        for (double& v : target.data) v = rng.uniform(0.0, 1.0);
        for (double& v : weight.data) v = rng.uniform(0.1, 2.0);
        ImageD grad;
        loss_rgb_l1(rendered, target, &weight, &grad);
        fd_plane(rendered, [&] { return loss_rgb_l1(rendered, target, &weight, nullptr); }, grad,
                 1e-6);
    }
    SUBCASE("feature kl") {
        ImageD rendered = ImageD(h, w, 4);
        ImageD target = ImageD(h, w, 4);
        for (double& v : rendered.data) v = rng.uniform(-2.0, 2.0);
        for (double& v : target.data) v = rng.uniform(-2.0, 2.0);
        ImageD grad;
        loss_feat_kl(rendered, target, &grad, nullptr);
        fd_plane(rendered, [&] { return loss_feat_kl(rendered, target, nullptr, nullptr); }, grad,
                 1e-5);
    }
    SUBCASE("depth smoothness") {
        ImageD depth = ImageD(h, w, 1);
        ImageD image = ImageD(h, w, 3);
        for (double& v : depth.data) v = rng.uniform(1.0, 6.0);
        for (double& v : image.data) v = rng.uniform(0.0, 1.0);
        ImageD grad;
        loss_depth_smooth(depth, image, &grad);
        fd_plane(depth, [&] { return loss_depth_smooth(depth, image, nullptr); }, grad, 1e-4);
    }
    SUBCASE("sky opacity") {
        ImageD opacity = ImageD(h, w, 1);
        MaskU8 sky = MaskU8(h, w, 1);
        for (double& v : opacity.data) v = rng.uniform(0.05, 0.95);
        for (auto& v : sky.data) v = uint8_t(rng.index(2) * 255);
        ImageD grad;
        loss_sky(opacity, sky, &grad);
        fd_plane(opacity, [&] { return loss_sky(opacity, sky, nullptr); }, grad, 1e-6);
    }
}
