#include "doctest.h"

#include "gsmap/synth.hpp"
#include "test_util.hpp"

using namespace gsmap;

namespace {

SceneSpec small_spec() {
    SceneSpec spec;
    spec.seed = 9;
    spec.traversals = 3;
    spec.frames_per_traversal = 4;
    spec.width = 64;
    spec.height = 48;
    spec.feat_w = 32;
    spec.feat_h = 24;
    spec.feat_dim = 6;
    spec.min_transients = 1;
    spec.max_transients = 3;
    spec.path_z1 = 24.0;
    return spec;
}

bool maps_equal(const GaussianMap& a, const GaussianMap& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].mu != b[i].mu || a[i].q != b[i].q || a[i].log_s != b[i].log_s) return false;
        if (a[i].alpha_logit != b[i].alpha_logit) return false;
        if (a[i].feat.size() != b[i].feat.size()) return false;
        for (long k = 0; k < a[i].feat.size(); ++k)
            if (a[i].feat[k] != b[i].feat[k]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("class embeddings are scaled one-hots that wrap") {
    const VecX e2 = class_embedding(2, 8, 3.0);
    CHECK(e2.size() == 8);
    CHECK(e2[2] == 3.0);
    CHECK(e2.sum() == 3.0);
    // Low dimensions wrap the class index, colliding on purpose.
    const VecX w = class_embedding(2, 2, 3.0);
    CHECK(w[0] == 3.0);
    CHECK(class_embedding(3, 2, 3.0)[1] == 3.0);
}

TEST_CASE("scene intrinsics follow the field of view") {
    SceneSpec spec = small_spec();
    const CameraIntrinsics intr = scene_intrinsics(spec);
    CHECK(intr.width == 64);
    CHECK(intr.height == 48);
    CHECK(intr.cx == 32.0);
    CHECK(intr.cy == 24.0);
    CHECK(intr.fx == doctest::Approx(32.0 / std::tan(M_PI / 6.0)));
    CHECK(intr.fy == intr.fx);
}

TEST_CASE("base poses travel the street at camera height") {
    const SceneSpec spec = small_spec();
    const CameraPose first = scene_base_pose(spec, 0);
    const CameraPose last = scene_base_pose(spec, spec.frames_per_traversal - 1);
    CHECK(first.valid());
    CHECK(last.valid());
    CHECK(first.center()[1] == doctest::Approx(spec.cam_height));
    CHECK(first.center()[2] == doctest::Approx(spec.path_z0));
    CHECK(last.center()[2] == doctest::Approx(spec.path_z1));
    // Forward axis looks down the +z street with a slight downward pitch.
    const Vec3 fwd = first.R.row(2).transpose();
    CHECK(fwd[2] > 0.9);
    CHECK(fwd[1] < 0.0);
}

TEST_CASE("build_scene is deterministic and separates environment from transients") {
    const SceneSpec spec = small_spec();
    const SceneBuild a = build_scene(spec);
    const SceneBuild b = build_scene(spec);
    CHECK(maps_equal(a.environment, b.environment));
    REQUIRE(a.transients.size() == 3);
    for (int t = 0; t < 3; ++t) CHECK(maps_equal(a.transients[t], b.transients[t]));

    // Traversals draw different transient layouts.
    CHECK_FALSE(maps_equal(a.transients[0], a.transients[1]));

    // The environment is independent of the traversal count.
    SceneSpec one = spec;
    one.traversals = 1;
    CHECK(maps_equal(build_scene(one).environment, a.environment));

    // Transient clusters float inside the street.
    for (const GaussianMap& tm : a.transients)
        for (const Gaussian3D& g : tm.gaussians) {
            CHECK(std::abs(g.mu[0]) < spec.street_half_width);
            CHECK(g.mu[1] > 0.0);
        }
}

TEST_CASE("static transients repeat in every traversal") {
    SceneSpec spec = small_spec();
    spec.min_transients = 0;
    spec.max_transients = 0;
    spec.static_transients = 2;
    const SceneBuild sb = build_scene(spec);
    REQUIRE(sb.transients.size() == 3);
    CHECK(sb.transients[0].size() > 0);
    CHECK(maps_equal(sb.transients[0], sb.transients[1]));
    CHECK(maps_equal(sb.transients[1], sb.transients[2]));
}

TEST_CASE("generate_dataset emits consistent frames and ground truth") {
    const SceneSpec spec = small_spec();
    auto [ds, gt] = generate_dataset(spec);
    REQUIRE(ds.frames.size() == 12);
    CHECK(ds.traversal_count == 3);
    REQUIRE(gt.transient_masks.size() == 12);
    REQUIRE(gt.backgrounds.size() == 12);
    REQUIRE(gt.depths.size() == 12);
    ds.validate();

    for (size_t i = 0; i < ds.frames.size(); ++i) {
        const Frame& f = ds.frames[i];
        CHECK(f.image.h == 48);
        CHECK(f.feat.c == 6);
        CHECK(f.feat.h == 24);
        CHECK_FALSE(f.sky_mask.empty());

        // Quantization fixed points.
        CHECK(f.image.data == quantize_image(f.image).data);
        CHECK(f.feat.data == quantize_f32(f.feat).data);

        // The background equals the capture wherever nothing transient shows.
        const MaskU8& mask = gt.transient_masks[i];
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 64; ++x)
                if (!mask.at(y, x))
                    for (int ch = 0; ch < 3; ++ch)
                        CHECK(gt.backgrounds[i].at(y, x, ch) == f.image.at(y, x, ch));
    }

    // Generation is deterministic.
    auto [ds2, gt2] = generate_dataset(spec);
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        CHECK(ds.frames[i].image.data == ds2.frames[i].image.data);
        CHECK(ds.frames[i].feat.data == ds2.frames[i].feat.data);
        CHECK(ds.frames[i].pose.R == ds2.frames[i].pose.R);
        CHECK(gt.transient_masks[i].data == gt2.transient_masks[i].data);
    }

    // Depth is positive where the environment is hit.
    int hits = 0;
    for (size_t i = 0; i < gt.depths.size(); ++i)
        for (double v : gt.depths[i].data)
            if (v > 0.0) ++hits;
    CHECK(hits > 0);

    // Transients appear somewhere.
    long on = 0;
    for (const MaskU8& m : gt.transient_masks)
        for (uint8_t v : m.data) on += v ? 1 : 0;
    CHECK(on > 0);

    // Sky occupies the top of at least some frames.
    long sky = 0;
    for (const Frame& f : ds.frames)
        for (uint8_t v : f.sky_mask.data) sky += v ? 1 : 0;
    CHECK(sky > 0);
}

TEST_CASE("zero transients give empty masks and background captures") {
    SceneSpec spec = small_spec();
    spec.min_transients = 0;
    spec.max_transients = 0;
    auto [ds, gt] = generate_dataset(spec);
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        for (uint8_t v : gt.transient_masks[i].data) CHECK(v == 0);
        CHECK(gt.backgrounds[i].data == ds.frames[i].image.data);
    }
}

TEST_CASE("seed and surface clouds sample the environment") {
    const SceneSpec spec = small_spec();
    auto [ds, gt] = generate_dataset(spec);
    CHECK(ds.seed_points.points.size() > 100);
    CHECK(ds.seed_points.colors.size() == ds.seed_points.points.size());
    CHECK(gt.surface_samples.points.size() > ds.seed_points.points.size());
    for (const Vec3& p : gt.surface_samples.points) {
        CHECK(std::abs(p[0]) <= spec.ground_half_width + 1e-9);
        CHECK(p[2] >= spec.z_min - 1e-9);
        CHECK(p[2] <= spec.z_max + 1e-9);
    }
}

TEST_CASE("spec validation rejects impossible scenes") {
    SceneSpec spec = small_spec();
    spec.traversals = 0;
    CHECK_THROWS_AS(build_scene(spec), std::runtime_error);
    spec = small_spec();
    spec.min_transients = 3;
    spec.max_transients = 1;
    CHECK_THROWS_AS(build_scene(spec), std::runtime_error);
    spec = small_spec();
    spec.feat_dim = 0;
    CHECK_THROWS_AS(generate_dataset(spec), std::runtime_error);
}
