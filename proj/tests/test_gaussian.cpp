#include "doctest.h"

#include "gsmap/gaussian.hpp"
#include "test_util.hpp"

using namespace gsmap;

TEST_CASE("quat_to_rot handles identity, axis permutation, and normalization") {
    CHECK((quat_to_rot(Vec4(1, 0, 0, 0)) - Mat3::Identity()).norm() == doctest::Approx(0.0));

    // 120 degrees about (1,1,1): x -> y -> z -> x.
    const Mat3 r = quat_to_rot(Vec4(0.5, 0.5, 0.5, 0.5));
    CHECK((r * Vec3(1, 0, 0) - Vec3(0, 1, 0)).norm() < 1e-12);
    CHECK((r * Vec3(0, 1, 0) - Vec3(0, 0, 1)).norm() < 1e-12);

    // Unnormalized input gives the same rotation.
    const Mat3 r2 = quat_to_rot(Vec4(2.0, 2.0, 2.0, 2.0));
    CHECK((r - r2).norm() < 1e-12);
}

TEST_CASE("covariance rotates the squared scales") {
    Gaussian3D g;
    g.log_s = Vec3(std::log(2.0), 0.0, 0.0);
    g.q = Vec4(std::cos(M_PI / 4), 0, 0, std::sin(M_PI / 4));  // 90 degrees about z
    const Mat3 cov = covariance(g);
    Mat3 want;
    want << 1, 0, 0, 0, 4, 0, 0, 0, 1;
    CHECK((cov - want).norm() < 1e-12);
    // Symmetric positive diagonal in the unrotated case.
    g.q = Vec4(1, 0, 0, 0);
    const Mat3 cov0 = covariance(g);
    CHECK(cov0(0, 0) == doctest::Approx(4.0));
    CHECK(cov0(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("sh_to_color dc term and clamping") {
    Gaussian3D g;
    g.sh[0] = Vec3(1.0, 1.0, 1.0);
    const Vec3 c = sh_to_color(g, Vec3(0, 0, 1), 0);
    CHECK(c[0] == doctest::Approx(kShC0 + 0.5).epsilon(1e-12));

    g.sh[0] = Vec3(-2.0, 4.0, 0.0);
    const Vec3 cc = sh_to_color(g, Vec3(0, 0, 1), 0);
    CHECK(cc[0] == 0.0);  // clamped low
    CHECK(cc[1] == 1.0);  // clamped high
    CHECK(cc[2] == doctest::Approx(0.5));
}

TEST_CASE("sh_to_color degree 1 follows the view direction") {
    Gaussian3D g;
    g.sh[0] = Vec3::Zero();
    g.sh[2] = Vec3(1.0, 0.0, 0.0);  // z-aligned band
    const Vec3 c = sh_to_color(g, Vec3(0, 0, 1), 1);
    CHECK(c[0] == doctest::Approx(0.5 + kShC1).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(0.5));
    const Vec3 back = sh_to_color(g, Vec3(0, 0, -1), 1);
    CHECK(back[0] == doctest::Approx(0.5 - kShC1).epsilon(1e-12));
    // Degree 0 ignores the directional bands.
    const Vec3 c0 = sh_to_color(g, Vec3(0, 0, 1), 0);
    CHECK(c0[0] == doctest::Approx(0.5));
}

TEST_CASE("init_from_points seeds scales from neighbor distances") {
    const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(3, 0, 0)};
    const std::vector<Vec3> cols{Vec3(1.0, 0.0, 0.5), Vec3(0.2, 0.2, 0.2)};
    const GaussianMap map = init_from_points(pts, cols, 4, 0);
    REQUIRE(map.size() == 2);
    CHECK(map.feat_dim == 4);
    CHECK(map.sh_degree == 0);
    for (const Gaussian3D& g : map.gaussians) {
        CHECK(g.log_s[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
        CHECK(g.opacity() == doctest::Approx(0.1).epsilon(1e-12));
        CHECK(g.q == Vec4(1, 0, 0, 0));
        CHECK(g.feat.size() == 4);
        CHECK(g.feat.norm() == 0.0);
    }
    CHECK(map[0].sh[0][0] == doctest::Approx(0.5 / kShC0).epsilon(1e-12));
    CHECK(map[0].sh[0][2] == doctest::Approx(0.0));

    // A single point falls back to unit scale.
    const GaussianMap one = init_from_points({Vec3(1, 2, 3)}, {Vec3(0.5, 0.5, 0.5)}, 1, 1);
    CHECK(one[0].log_s[0] == doctest::Approx(0.0));
    CHECK(one.sh_degree == 1);
}

TEST_CASE("validate rejects broken maps") {
    Rng rng(1);
    GaussianMap map = gsmap_test::random_map(rng, 3, 2, 1);
    map.validate();

    GaussianMap bad = map;
    bad[1].mu[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(bad.validate(), std::runtime_error);

    bad = map;
    bad[0].q = Vec4::Zero();
    CHECK_THROWS_AS(bad.validate(), std::runtime_error);

    bad = map;
    bad[2].feat = VecX::Zero(5);
    CHECK_THROWS_AS(bad.validate(), std::runtime_error);

    bad = map;
    bad.sh_degree = 3;
    CHECK_THROWS_AS(bad.validate(), std::runtime_error);
}
