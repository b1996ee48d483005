#include "doctest.h"

#include "gsmap/dataset.hpp"

using namespace gsmap;

TEST_CASE("scaled intrinsics keep the field of view") {
    CameraIntrinsics intr{100.0, 120.0, 64.0, 48.0, 128, 96};
    const CameraIntrinsics half = intr.scaled(64, 48);
    CHECK(half.fx == 50.0);
    CHECK(half.fy == 60.0);
    CHECK(half.cx == 32.0);
    CHECK(half.cy == 24.0);
    CHECK(half.width == 64);
    CHECK(half.height == 48);
    // Scaling back is the identity.
    const CameraIntrinsics again = half.scaled(128, 96);
    CHECK(again.fx == intr.fx);
    CHECK(again.cy == intr.cy);
}

TEST_CASE("pose transforms and camera center are consistent") {
    CameraPose pose;
    pose.R = Eigen::AngleAxisd(0.7, Vec3(0, 1, 0).normalized()).toRotationMatrix();
    pose.t = Vec3(0.3, -1.2, 4.0);
    CHECK(pose.valid());
    const Vec3 c = pose.center();
    CHECK(pose.to_camera(c).norm() == doctest::Approx(0.0).epsilon(1e-12));
    const Vec3 p(1.0, 2.0, 3.0);
    CHECK((pose.R.transpose() * (pose.to_camera(p) - pose.t) - p).norm() < 1e-12);

    CameraPose bad;
    bad.R(0, 0) = 2.0;
    CHECK_FALSE(bad.valid());
}

TEST_CASE("dataset subset picks traversals in the given order and renumbers") {
    MultitraverseDataset ds;
    ds.traversal_count = 3;
    for (int t = 0; t < 3; ++t) {
        for (int j = 0; j < 2; ++j) {
            Frame f;
            f.traversal = t;
            f.image = ImageD(2, 2, 3, double(t) + 0.1 * j);
            ds.frames.push_back(std::move(f));
        }
    }

    const MultitraverseDataset sub = ds.subset({2, 1});
    REQUIRE(sub.frames.size() == 4);
    CHECK(sub.traversal_count == 2);
    CHECK(sub.frames[0].traversal == 0);
    CHECK(sub.frames[1].traversal == 0);
    CHECK(sub.frames[2].traversal == 1);
    CHECK(sub.frames[3].traversal == 1);
    // Frames of old traversal 2 come first.
    CHECK(sub.frames[0].image.data[0] == 2.0);
    CHECK(sub.frames[2].image.data[0] == 1.0);

    const MultitraverseDataset one = ds.subset({0});
    CHECK(one.frames.size() == 2);
    CHECK(one.traversal_count == 1);
}
