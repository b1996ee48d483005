#include "gsmap/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gsmap {

Mat3 quat_to_rot(const Vec4& q) {
    double n = q.norm();
    double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    Mat3 R;
    R << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
         2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
         2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
    return R;
}

Mat3 covariance(const Gaussian3D& g) {
    Mat3 R = quat_to_rot(g.q);
    Vec3 s2 = (2.0 * g.log_s).array().exp();
    return R * s2.asDiagonal() * R.transpose();
}

Vec3 sh_to_color(const Gaussian3D& g, const Vec3& view_dir, int sh_degree) {
    Vec3 c = kShC0 * g.sh[0] + Vec3::Constant(0.5);
    if (sh_degree >= 1) {
        c += kShC1 * (-view_dir.y() * g.sh[1] + view_dir.z() * g.sh[2] - view_dir.x() * g.sh[3]);
    }
    return c.cwiseMax(0.0).cwiseMin(1.0);
}

void GaussianMap::validate() const {
    if (sh_degree < 0 || sh_degree > 1)
        throw std::runtime_error("map: sh_degree must be 0 or 1");
    for (size_t i = 0; i < gaussians.size(); ++i) {
        const Gaussian3D& g = gaussians[i];
        bool finite = g.mu.allFinite() && g.q.allFinite() && g.log_s.allFinite() &&
                      std::isfinite(g.alpha_logit) && g.feat.allFinite();
        for (const Vec3& c : g.sh) finite = finite && c.allFinite();
        if (!finite)
            throw std::runtime_error("map: non-finite field in gaussian " + std::to_string(i));
        if (g.q.norm() < 1e-12)
            throw std::runtime_error("map: zero quaternion in gaussian " + std::to_string(i));
        if (g.feat.size() != feat_dim)
            throw std::runtime_error("map: feature width mismatch in gaussian " + std::to_string(i));
    }
}

GaussianMap init_from_points(const std::vector<Vec3>& points,
                             const std::vector<Vec3>& colors,
                             int feat_dim, int sh_degree) {
    if (points.empty())
        throw std::runtime_error("init_from_points: no seed points");
    if (colors.size() != points.size())
        throw std::runtime_error("init_from_points: color count mismatch");

    const size_t n = points.size();
    const size_t k = std::min<size_t>(3, n - 1);
    GaussianMap map;
    map.sh_degree = sh_degree;
    map.feat_dim = feat_dim;
    map.gaussians.resize(n);

    std::vector<double> nearest(k);
    for (size_t i = 0; i < n; ++i) {
        Gaussian3D& g = map.gaussians[i];
        g.mu = points[i];
        g.q = Vec4(1, 0, 0, 0);
        g.alpha_logit = std::log(0.1 / 0.9);
        Vec3 c = colors[i].cwiseMax(0.0).cwiseMin(1.0);
        g.sh[0] = (c - Vec3::Constant(0.5)) / kShC0;
        g.feat = VecX::Zero(feat_dim);

        double scale = 1.0;
        if (k > 0) {
            std::fill(nearest.begin(), nearest.end(), std::numeric_limits<double>::infinity());
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double d = (points[j] - points[i]).norm();
                // Keep the k smallest distances.
                auto it = std::max_element(nearest.begin(), nearest.end());
                if (d < *it) *it = d;
            }
            double sum = 0.0;
            for (double d : nearest) sum += d;
            scale = std::max(sum / k, 1e-7);
        }
        g.log_s = Vec3::Constant(std::log(scale));
    }
    return map;
}

} // namespace gsmap
