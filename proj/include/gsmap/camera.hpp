#pragma once

// Pinhole camera model and world-to-camera poses.

#include "gsmap/types.hpp"

namespace gsmap {

struct CameraIntrinsics {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    int width = 0, height = 0;

    // Intrinsics for a buffer of different resolution covering the same field
    // of view. Continuous image coordinates scale linearly, anchored at the
    // top-left image corner.
    CameraIntrinsics scaled(int new_w, int new_h) const {
        CameraIntrinsics s;
        double rx = double(new_w) / width;
        double ry = double(new_h) / height;
        s.fx = fx * rx;
        s.fy = fy * ry;
        s.cx = cx * rx;
        s.cy = cy * ry;
        s.width = new_w;
        s.height = new_h;
        return s;
    }
};

struct CameraPose {
    Mat3 R = Mat3::Identity();  // world to camera
    Vec3 t = Vec3::Zero();

    Vec3 to_camera(const Vec3& p_world) const { return R * p_world + t; }
    Vec3 center() const { return -R.transpose() * t; }

    // True when R is orthonormal with determinant +1 within tol.
    bool valid(double tol = 1e-6) const {
        Mat3 err = R * R.transpose() - Mat3::Identity();
        return err.cwiseAbs().maxCoeff() < tol && std::abs(R.determinant() - 1.0) < tol;
    }
};

} // namespace gsmap
