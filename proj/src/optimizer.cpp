#include "gsmap/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gsmap {

void OptimizerState::resize(const GaussianMap& map) {
    moments.assign(map.size(), Moments{});
    for (auto& m : moments) {
        m.m_feat = VecX::Zero(map.feat_dim);
        m.v_feat = VecX::Zero(map.feat_dim);
    }
}

double mu_lr_schedule(const AdamConfig& cfg, long step, long total_steps) {
    if (total_steps <= 1 || cfg.lr_mu <= 0.0) return 1.0;
    const double ratio = cfg.lr_mu_final / cfg.lr_mu;
    const double t = double(step) / double(total_steps);
    return std::pow(ratio, t);
}

namespace {

// Elementwise Adam update of one parameter block.
template <typename P, typename G>
void update(P& param, const G& grad, P& m, P& v, double lr,
            double b1, double b2, double eps, double c1, double c2) {
    if (lr == 0.0) return;
    m = b1 * m + (1.0 - b1) * grad;
    v = (b2 * v.array() + (1.0 - b2) * grad.array().square()).matrix();
    param -= (lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps)).matrix();
}

void update1(double& param, double grad, double& m, double& v, double lr,
             double b1, double b2, double eps, double c1, double c2) {
    if (lr == 0.0) return;
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad * grad;
    param -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
}

} // namespace

void adam_step(GaussianMap& map, const GradientBuffer& grads, OptimizerState& state,
               const AdamConfig& cfg, double mu_lr_scale) {
    if (grads.mu.size() != map.size())
        throw std::runtime_error("adam_step: gradient buffer size mismatch");
    if (state.moments.size() != map.size())
        throw std::runtime_error("adam_step: optimizer state size mismatch");
    const long bad = grads.first_non_finite();
    if (bad >= 0)
        throw std::runtime_error("adam_step: non-finite gradient for gaussian " + std::to_string(bad));

    state.step_count += 1;
    const double c1 = 1.0 - std::pow(cfg.beta1, double(state.step_count));
    const double c2 = 1.0 - std::pow(cfg.beta2, double(state.step_count));
    const double b1 = cfg.beta1, b2 = cfg.beta2, eps = cfg.eps;

    for (size_t i = 0; i < map.size(); ++i) {
        Gaussian3D& g = map[i];
        OptimizerState::Moments& mo = state.moments[i];
        update(g.mu, grads.mu[i], mo.m_mu, mo.v_mu, cfg.lr_mu * mu_lr_scale, b1, b2, eps, c1, c2);
        update(g.q, grads.q[i], mo.m_q, mo.v_q, cfg.lr_q, b1, b2, eps, c1, c2);
        update(g.log_s, grads.log_s[i], mo.m_log_s, mo.v_log_s, cfg.lr_log_s, b1, b2, eps, c1, c2);
        update1(g.alpha_logit, grads.alpha_logit[i], mo.m_alpha, mo.v_alpha,
                cfg.lr_alpha, b1, b2, eps, c1, c2);
        const int coeffs = map.sh_degree >= 1 ? kMaxShCoeffs : 1;
        for (int k = 0; k < coeffs; ++k)
            update(g.sh[k], grads.sh[i][k], mo.m_sh[k], mo.v_sh[k], cfg.lr_sh, b1, b2, eps, c1, c2);
        if (map.feat_dim > 0)
            update(g.feat, grads.feat[i], mo.m_feat, mo.v_feat, cfg.lr_feat, b1, b2, eps, c1, c2);
        g.q.normalize();
    }
}

} // namespace gsmap
