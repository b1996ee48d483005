#pragma once

// Shared helpers for the unit and acceptance suites.

#include <filesystem>
#include <string>

#include "gsmap/gaussian.hpp"
#include "gsmap/render.hpp"
#include "gsmap/rng.hpp"

namespace gsmap_test {

// Fresh scratch directory under the system temp root.
inline std::string scratch_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("gsmap_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Gaussian with the given color at full saturation of the dc term.
inline gsmap::Gaussian3D make_gaussian(const gsmap::Vec3& mu, double sigma, double opacity,
                                       const gsmap::Vec3& color, int feat_dim) {
    gsmap::Gaussian3D g;
    g.mu = mu;
    g.log_s = gsmap::Vec3::Constant(std::log(sigma));
    g.alpha_logit = logit(opacity);
    g.sh[0] = (color - gsmap::Vec3::Constant(0.5)) / gsmap::kShC0;
    g.feat = gsmap::VecX::Zero(feat_dim);
    return g;
}

// Random cloud in front of the camera, safely inside the frustum.
inline gsmap::GaussianMap random_map(gsmap::Rng& rng, size_t n, int feat_dim, int sh_degree,
                                     double min_opacity = 0.15) {
    gsmap::GaussianMap map;
    map.feat_dim = feat_dim;
    map.sh_degree = sh_degree;
    for (size_t i = 0; i < n; ++i) {
        gsmap::Gaussian3D g;
        g.mu = gsmap::Vec3(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(2.5, 7.0));
        gsmap::Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        g.q = q.norm() > 1e-9 ? gsmap::Vec4(q / q.norm()) : gsmap::Vec4(1, 0, 0, 0);
        g.log_s = gsmap::Vec3(std::log(rng.uniform(0.08, 0.4)), std::log(rng.uniform(0.08, 0.4)),
                              std::log(rng.uniform(0.08, 0.4)));
        g.alpha_logit = logit(rng.uniform(min_opacity, 0.95));
        for (int k = 0; k < gsmap::kMaxShCoeffs; ++k)
            g.sh[k] = k == 0 ? gsmap::Vec3(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8),
                                           rng.uniform(-0.8, 0.8))
                             : gsmap::Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2),
                                           rng.uniform(-0.2, 0.2));
        g.feat = gsmap::VecX::Zero(feat_dim);
        for (int k = 0; k < feat_dim; ++k) g.feat[k] = rng.uniform(-1.0, 1.0);
        map.gaussians.push_back(std::move(g));
    }
    return map;
}

inline gsmap::ViewGeometry test_geometry(int w, int h, int feat_w = 0, int feat_h = 0) {
    gsmap::ViewGeometry geom;
    geom.intr.fx = 0.9 * w;
    geom.intr.fy = 0.9 * w;
    geom.intr.cx = 0.5 * w;
    geom.intr.cy = 0.5 * h;
    geom.intr.width = w;
    geom.intr.height = h;
    geom.feat_w = feat_w;
    geom.feat_h = feat_h;
    return geom;
}

} // namespace gsmap_test
