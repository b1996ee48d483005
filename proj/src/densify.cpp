#include "gsmap/densify.hpp"

#include <cmath>
#include <stdexcept>

namespace gsmap {

namespace {

int dominant_axis(const Vec3& log_s) {
    int axis = 0;
    if (log_s[1] > log_s[axis]) axis = 1;
    if (log_s[2] > log_s[axis]) axis = 2;
    return axis;
}

} // namespace

DensifyStats densify_and_prune(GaussianMap& map, OptimizerState& state,
                               const std::vector<double>& mean_grad,
                               const DensifyConfig& cfg) {
    if (mean_grad.size() != map.size())
        throw std::runtime_error("densify_and_prune: gradient stats size mismatch");
    if (state.moments.size() != map.size())
        throw std::runtime_error("densify_and_prune: optimizer state size mismatch");

    DensifyStats stats;
    std::vector<Gaussian3D> out;
    std::vector<OptimizerState::Moments> out_m;
    out.reserve(map.size());
    out_m.reserve(map.size());
    OptimizerState::Moments fresh;
    fresh.m_feat = VecX::Zero(map.feat_dim);
    fresh.v_feat = VecX::Zero(map.feat_dim);

    for (size_t i = 0; i < map.size(); ++i) {
        Gaussian3D& g = map[i];
        if (g.opacity() < cfg.prune_opacity) {
            ++stats.pruned;
            continue;
        }
        // Clone and split each add one net Gaussian.
        const bool may_grow = map.size() + stats.cloned + stats.split < cfg.max_gaussians;
        if (mean_grad[i] > cfg.grad_threshold && may_grow) {
            const int axis = dominant_axis(g.log_s);
            const double sigma = std::exp(g.log_s[axis]);
            const Vec3 dir = quat_to_rot(g.q).col(axis);
            if (sigma < cfg.scale_split_threshold) {
                // Clone: keep the original, add a copy shifted one sigma
                // along the dominant axis.
                out.push_back(g);
                out_m.push_back(state.moments[i]);
                Gaussian3D copy = g;
                copy.mu += dir * sigma;
                out.push_back(std::move(copy));
                out_m.push_back(fresh);
                ++stats.cloned;
            } else {
                // Split: replace with two children at +-0.5 sigma, shrunk.
                const Vec3 shrink = Vec3::Constant(std::log(cfg.split_shrink));
                for (double side : {-0.5, 0.5}) {
                    Gaussian3D child = g;
                    child.mu += dir * (side * sigma);
                    child.log_s -= shrink;
                    out.push_back(std::move(child));
                    out_m.push_back(fresh);
                }
                ++stats.split;
            }
        } else {
            out.push_back(std::move(g));
            out_m.push_back(std::move(state.moments[i]));
        }
    }

    map.gaussians = std::move(out);
    state.moments = std::move(out_m);
    return stats;
}

void reset_opacity(GaussianMap& map, OptimizerState& state, double value) {
    const double cap = std::log(value / (1.0 - value));
    for (size_t i = 0; i < map.size(); ++i) {
        if (map[i].alpha_logit > cap) {
            map[i].alpha_logit = cap;
            state.moments[i].m_alpha = 0.0;
            state.moments[i].v_alpha = 0.0;
        }
    }
}

size_t prune_transparent(GaussianMap& map, OptimizerState& state, double threshold) {
    size_t kept = 0;
    for (size_t i = 0; i < map.size(); ++i) {
        if (map[i].opacity() < threshold) continue;
        if (kept != i) {
            map.gaussians[kept] = std::move(map.gaussians[i]);
            state.moments[kept] = std::move(state.moments[i]);
        }
        ++kept;
    }
    const size_t removed = map.size() - kept;
    map.gaussians.resize(kept);
    state.moments.resize(kept);
    return removed;
}

} // namespace gsmap
