#pragma once

// Optimization stages over a multitraverse dataset: joint photometric plus
// feature distillation, then ephemerality-masked environment refinement.

#include <functional>
#include <vector>

#include "gsmap/dataset.hpp"
#include "gsmap/densify.hpp"
#include "gsmap/losses.hpp"
#include "gsmap/optimizer.hpp"
#include "gsmap/render.hpp"

namespace gsmap {

struct TrainWeights {
    double rgb = 1.0;
    double feat = 1.0;
    double depth = 0.05;
    double sky = 0.1;
};

struct LossReport {
    long step = 0;
    double total = 0, rgb = 0, feat = 0, depth = 0, sky = 0;
    size_t gaussians = 0;
};

struct TrainConfig {
    long steps = 4000;
    uint64_t seed = 1;             // frame order shuffling
    TrainWeights weights;
    AdamConfig adam;
    DensifyConfig densify;
    RenderConfig render;
    bool use_depth_sky = false;    // extra smoothness and sky terms in stage 3
    long log_every = 100;
    std::function<void(const LossReport&)> on_report;  // optional
};

// Line format: "step=N total=... rgb=... feat=... depth=... sky=... gaussians=N".
std::string format_report(const LossReport& r);

// Stage 2: fits rgb and feature channels to every frame in shuffled order
// with densification. Returns one feature residual map per frame from a final
// re-render. Every frame must carry a target feature map.
std::vector<ImageD> train_distill(GaussianMap& map, const MultitraverseDataset& data,
                                  const TrainConfig& cfg);

// Stage 3: masked photometric refinement. masks are image resolution, 255 =
// ephemeral (excluded from the loss). Features are frozen and topology only
// shrinks via opacity pruning. With use_depth_sky, frames with a sky mask add
// the sky term and all frames add inverse-depth smoothness.
void train_env(GaussianMap& map, const MultitraverseDataset& data,
               const std::vector<MaskU8>& masks, const TrainConfig& cfg);

// Feature residual maps of the current map against every frame.
std::vector<ImageD> compute_residuals(const GaussianMap& map,
                                      const MultitraverseDataset& data,
                                      const RenderConfig& cfg);

} // namespace gsmap
