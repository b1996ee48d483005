#pragma once

// Anisotropic 3D Gaussian primitives and the map that holds them.

#include <array>
#include <vector>

#include "gsmap/types.hpp"

namespace gsmap {

inline constexpr double kShC0 = 0.28209479177387814;  // Y_0^0
inline constexpr double kShC1 = 0.4886025119029199;   // |Y_1^m|
inline constexpr int kMaxShCoeffs = 4;                // degrees 0 and 1

struct Gaussian3D {
    Vec3 mu = Vec3::Zero();
    Vec4 q = Vec4(1, 0, 0, 0);   // rotation quaternion (w, x, y, z)
    Vec3 log_s = Vec3::Zero();   // log standard deviations per axis
    double alpha_logit = 0.0;    // opacity = sigmoid(alpha_logit)
    // rgb coefficients, sh[0] is the dc term
    std::array<Vec3, kMaxShCoeffs> sh{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
    VecX feat;                   // distilled feature embedding

    double opacity() const { return 1.0 / (1.0 + std::exp(-alpha_logit)); }
};

struct GaussianMap {
    std::vector<Gaussian3D> gaussians;
    int sh_degree = 0;  // 0 or 1
    int feat_dim = 0;

    size_t size() const { return gaussians.size(); }
    bool empty() const { return gaussians.empty(); }
    Gaussian3D& operator[](size_t i) { return gaussians[i]; }
    const Gaussian3D& operator[](size_t i) const { return gaussians[i]; }

    // Throws std::runtime_error when a field is non-finite, a quaternion has
    // zero norm, or feature/sh storage disagrees with the map config.
    void validate() const;
};

// Rotation matrix of the normalized quaternion.
Mat3 quat_to_rot(const Vec4& q);

// World-space covariance R * diag(exp(log_s))^2 * R^T.
Mat3 covariance(const Gaussian3D& g);

// View-dependent color, clamped to [0, 1]. view_dir must be unit length and
// points from the camera center toward the Gaussian.
Vec3 sh_to_color(const Gaussian3D& g, const Vec3& view_dir, int sh_degree);

// Seeds a map from points: identity rotations, isotropic scales from the mean
// distance to the 3 nearest other points (clipped to the points available,
// 1.0 when alone), opacity 0.1, dc color term from the given colors, zero
// features of width feat_dim.
GaussianMap init_from_points(const std::vector<Vec3>& points,
                             const std::vector<Vec3>& colors,
                             int feat_dim, int sh_degree);

} // namespace gsmap
