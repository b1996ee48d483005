#include "doctest.h"

#include "gsmap/densify.hpp"
#include "test_util.hpp"

using namespace gsmap;

namespace {

struct Fixture {
    GaussianMap map;
    OptimizerState state;

    explicit Fixture(std::initializer_list<double> sigmas, double opacity = 0.8) {
        map.feat_dim = 2;
        for (double s : sigmas) {
            Gaussian3D g;
            g.mu = Vec3(0, 0, 5);
            g.log_s = Vec3::Constant(std::log(s));
            g.alpha_logit = gsmap_test::logit(opacity);
            g.feat = VecX::Zero(2);
            map.gaussians.push_back(std::move(g));
        }
        state.resize(map);
    }
};

} // namespace

TEST_CASE("high-gradient small gaussians clone along the dominant axis") {
    Fixture f({0.1});
    f.map[0].log_s = Vec3(std::log(0.05), std::log(0.1), std::log(0.02));
    const DensifyStats stats =
        densify_and_prune(f.map, f.state, {1.0}, DensifyConfig{});
    CHECK(stats.cloned == 1);
    CHECK(stats.split == 0);
    REQUIRE(f.map.size() == 2);
    // Identity rotation: the dominant axis is y with sigma 0.1.
    CHECK((f.map[1].mu - Vec3(0, 0.1, 5)).norm() < 1e-12);
    CHECK(f.map[0].mu == Vec3(0, 0, 5));
    CHECK(f.map[1].log_s == f.map[0].log_s);  // clones keep their size
    CHECK(f.state.moments.size() == 2);
}

TEST_CASE("high-gradient large gaussians split into shrunk children") {
    Fixture f({0.5});
    DensifyConfig cfg;
    const DensifyStats stats = densify_and_prune(f.map, f.state, {1.0}, cfg);
    CHECK(stats.split == 1);
    REQUIRE(f.map.size() == 2);
    CHECK(f.map[0].mu[0] == doctest::Approx(-0.25));
    CHECK(f.map[1].mu[0] == doctest::Approx(0.25));
    for (int i = 0; i < 2; ++i)
        CHECK(std::exp(f.map[i].log_s[0]) == doctest::Approx(0.5 / cfg.split_shrink));
}

TEST_CASE("low-gradient gaussians are left alone") {
    Fixture f({0.05, 0.5});
    const DensifyStats stats =
        densify_and_prune(f.map, f.state, {1e-6, 1e-6}, DensifyConfig{});
    CHECK(stats.cloned == 0);
    CHECK(stats.split == 0);
    CHECK(f.map.size() == 2);
}

TEST_CASE("transparent gaussians are pruned") {
    Fixture f({0.1, 0.1, 0.1});
    f.map[1].alpha_logit = gsmap_test::logit(0.001);
    const DensifyStats stats =
        densify_and_prune(f.map, f.state, {0.0, 0.0, 0.0}, DensifyConfig{});
    CHECK(stats.pruned == 1);
    CHECK(f.map.size() == 2);
    CHECK(f.state.moments.size() == 2);
}

TEST_CASE("growth stops at the gaussian budget") {
    Fixture f({0.1, 0.1, 0.1});
    DensifyConfig cfg;
    cfg.max_gaussians = 3;
    const DensifyStats stats = densify_and_prune(f.map, f.state, {1.0, 1.0, 1.0}, cfg);
    CHECK(stats.cloned == 0);
    CHECK(stats.split == 0);
    CHECK(f.map.size() == 3);

    cfg.max_gaussians = 4;  // room for exactly one net addition
    const DensifyStats s2 = densify_and_prune(f.map, f.state, {1.0, 1.0, 1.0}, cfg);
    CHECK(s2.cloned == 1);
    CHECK(f.map.size() == 4);
}

TEST_CASE("reset_opacity caps opacities and clears their moments") {
    Fixture f({0.1, 0.1}, 0.9);
    f.map[1].alpha_logit = gsmap_test::logit(0.01);
    f.state.moments[0].m_alpha = 3.0;
    f.state.moments[0].v_alpha = 3.0;
    f.state.moments[1].m_alpha = 5.0;
    reset_opacity(f.map, f.state, 0.05);
    CHECK(f.map[0].opacity() == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(f.state.moments[0].m_alpha == 0.0);
    CHECK(f.state.moments[0].v_alpha == 0.0);
    // Already below the cap: untouched, moments kept.
    CHECK(f.map[1].opacity() == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(f.state.moments[1].m_alpha == 5.0);
}

TEST_CASE("prune_transparent removes only below-threshold gaussians") {
    Fixture f({0.1, 0.1, 0.1, 0.1});
    f.map[0].alpha_logit = gsmap_test::logit(0.004);
    f.map[2].alpha_logit = gsmap_test::logit(0.0001);
    const size_t removed = prune_transparent(f.map, f.state, 0.005);
    CHECK(removed == 2);
    CHECK(f.map.size() == 2);
    for (const Gaussian3D& g : f.map.gaussians) CHECK(g.opacity() > 0.005);
}

TEST_CASE("densify validates input sizes") {
    Fixture f({0.1});
    CHECK_THROWS_AS(densify_and_prune(f.map, f.state, {1.0, 2.0}, DensifyConfig{}),
                    std::runtime_error);
}
