#pragma once

// Adaptive density control: clone small high-gradient Gaussians, split large
// ones, prune transparent ones.

#include <vector>

#include "gsmap/gaussian.hpp"
#include "gsmap/optimizer.hpp"

namespace gsmap {

struct DensifyConfig {
    double grad_threshold = 2e-4;        // mean 2D positional gradient norm, ndc units
    double scale_split_threshold = 0.2;  // world units; smaller gaussians clone, larger split
    double split_shrink = 1.6;           // children scale divisor
    double prune_opacity = 0.005;
    int interval = 100;                  // steps between densify passes
    int opacity_reset_interval = 3000;
    double opacity_reset_value = 0.05;
    size_t max_gaussians = 200000;       // growth stops at this count
};

struct DensifyStats {
    size_t cloned = 0, split = 0, pruned = 0;
};

// One densify pass. mean_grad is the per-Gaussian mean accumulated screen
// gradient norm. Optimizer moments follow survivors; new entries start fresh.
DensifyStats densify_and_prune(GaussianMap& map, OptimizerState& state,
                               const std::vector<double>& mean_grad,
                               const DensifyConfig& cfg);

// Clamps every opacity to at most value and clears the opacity moments.
void reset_opacity(GaussianMap& map, OptimizerState& state, double value);

// Removes Gaussians with opacity below threshold (stage 3 keeps topology
// otherwise frozen). Returns the number removed.
size_t prune_transparent(GaussianMap& map, OptimizerState& state, double threshold);

} // namespace gsmap
