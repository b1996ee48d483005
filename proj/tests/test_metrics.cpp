#include "doctest.h"

#include <cmath>

#include "gsmap/metrics.hpp"
#include "gsmap/rng.hpp"

using namespace gsmap;

namespace {

MaskU8 span_mask(int w, int begin, int end) {
    MaskU8 m(1, w, 1);
    for (int x = begin; x < end; ++x) m.at(0, x) = 255;
    return m;
}

} // namespace

TEST_CASE("iou on interval masks") {
    CHECK(iou(span_mask(6, 0, 2), span_mask(6, 1, 3)) == doctest::Approx(1.0 / 3.0));
    CHECK(iou(span_mask(6, 0, 3), span_mask(6, 0, 3)) == 1.0);
    CHECK(iou(span_mask(6, 0, 2), span_mask(6, 3, 5)) == 0.0);
    CHECK(iou(span_mask(6, 0, 0), span_mask(6, 0, 0)) == 1.0);  // both empty
    CHECK(iou(span_mask(6, 0, 0), span_mask(6, 2, 4)) == 0.0);
    // Symmetric.
    CHECK(iou(span_mask(6, 1, 3), span_mask(6, 0, 2)) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("chamfer distance on simple sets") {
    const std::vector<Vec3> a{Vec3(0, 0, 0), Vec3(1, 0, 0)};
    CHECK(chamfer(a, a) == 0.0);
    CHECK(chamfer({Vec3(0, 0, 0)}, {Vec3(1, 0, 0)}) == doctest::Approx(1.0));
    // Directed means: a->b is (0.5+0.5)/2, b->a is 0.5.
    CHECK(chamfer(a, {Vec3(0.5, 0, 0)}) == doctest::Approx(0.5));
}

TEST_CASE("kdtree nearest neighbor agrees with brute force") {
    Rng rng(99);
    std::vector<Vec3> pts;
    for (int i = 0; i < 300; ++i)
        pts.emplace_back(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    const KdTree tree(pts);
    CHECK(tree.size() == 300);
    for (int i = 0; i < 200; ++i) {
        const Vec3 q(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5));
        double best = std::numeric_limits<double>::infinity();
        for (const Vec3& p : pts) best = std::min(best, (p - q).squaredNorm());
        CHECK(tree.nearest_sq(q) == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("psnr on flat offsets and masks") {
    ImageD a(8, 8, 3, 0.0);
    ImageD b(8, 8, 3, 0.1);
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-9));  // mse 0.01
    CHECK(std::isinf(psnr(a, a)));

    // Excluding the corrupt half restores the clean score.
    ImageD c = a;
    MaskU8 exclude(8, 8, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 8; ++x) {
            for (int ch = 0; ch < 3; ++ch) c.at(y, x, ch) = 0.9;
            exclude.at(y, x) = 255;
        }
    CHECK(psnr(c, b, &exclude) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(psnr(c, b) < 10.0);

    MaskU8 all(8, 8, 1, 255);
    CHECK_THROWS_AS(psnr(a, b, &all), std::runtime_error);
}

TEST_CASE("psnr decreases with noise level") {
    Rng rng(13);
    ImageD clean(16, 16, 3);
    for (double& v : clean.data) v = rng.uniform(0.2, 0.8);
    ImageD n1 = clean, n2 = clean;
    for (size_t i = 0; i < clean.data.size(); ++i) {
        const double e = rng.normal();
        n1.data[i] += 0.01 * e;
        n2.data[i] += 0.05 * e;
    }
    CHECK(psnr(clean, n1) > psnr(clean, n2));
}

TEST_CASE("ssim on constant and identical images") {
    ImageD a(16, 16, 1, 0.3);
    ImageD b(16, 16, 1, 0.7);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    // Flat images: only the luminance term differs from 1.
    const double c1 = 1e-4;
    const double want = (2 * 0.3 * 0.7 + c1) / (0.3 * 0.3 + 0.7 * 0.7 + c1);
    CHECK(ssim(a, b) == doctest::Approx(want).epsilon(1e-9));
    CHECK(want == doctest::Approx(0.72418548526).epsilon(1e-9));

    // Channels average: a 3-channel version scores the same.
    ImageD a3(16, 16, 3, 0.3), b3(16, 16, 3, 0.7);
    CHECK(ssim(a3, b3) == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("ssim penalizes structural change more than brightness shift") {
    Rng rng(21);
    ImageD base(24, 24, 1);
    for (int y = 0; y < 24; ++y)
        for (int x = 0; x < 24; ++x) base.at(y, x) = 0.5 + 0.3 * std::sin(0.7 * x) * std::cos(0.5 * y);
    ImageD shifted = base;
    for (double& v : shifted.data) v += 0.02;
    ImageD shuffled = base;
    Rng rng2(22);
    for (double& v : shuffled.data) v = 0.5 + 0.3 * (rng2.uniform() - 0.5);
    CHECK(ssim(base, shifted) > 0.9);
    CHECK(ssim(base, shifted) > ssim(base, shuffled));
}

TEST_CASE("metric report aggregates the per-frame mean") {
    MetricReport r{"x", {1.0, 2.0, 6.0}, false};
    CHECK(r.aggregate() == doctest::Approx(3.0));
}
