#pragma once

// Adam over per-Gaussian parameter groups with independent learning rates.

#include <vector>

#include "gsmap/gaussian.hpp"
#include "gsmap/render.hpp"

namespace gsmap {

struct AdamConfig {
    double lr_mu = 1.6e-4;        // decays exponentially to lr_mu_final
    double lr_mu_final = 1.6e-6;
    double lr_q = 1e-3;
    double lr_log_s = 5e-3;
    double lr_alpha = 5e-2;
    double lr_sh = 2.5e-3;
    double lr_feat = 2.5e-3;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

// First and second moments mirroring the map layout.
struct OptimizerState {
    struct Moments {
        Vec3 m_mu = Vec3::Zero(), v_mu = Vec3::Zero();
        Vec4 m_q = Vec4::Zero(), v_q = Vec4::Zero();
        Vec3 m_log_s = Vec3::Zero(), v_log_s = Vec3::Zero();
        double m_alpha = 0, v_alpha = 0;
        std::array<Vec3, kMaxShCoeffs> m_sh{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                            Vec3::Zero()},
            v_sh{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()};
        VecX m_feat, v_feat;
    };
    std::vector<Moments> moments;
    long step_count = 0;

    void resize(const GaussianMap& map);
};

// One Adam step. mu_lr_scale multiplies lr_mu (the position schedule is the
// trainer's). Quaternions are renormalized afterwards. Throws
// std::runtime_error naming the Gaussian index on a non-finite gradient.
void adam_step(GaussianMap& map, const GradientBuffer& grads, OptimizerState& state,
               const AdamConfig& cfg, double mu_lr_scale = 1.0);

// Position learning rate multiplier for step t of total: exponential decay
// from 1 to lr_mu_final / lr_mu.
double mu_lr_schedule(const AdamConfig& cfg, long step, long total_steps);

} // namespace gsmap
