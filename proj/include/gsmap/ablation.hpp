#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gsmap/mining.hpp"
#include "gsmap/synth.hpp"
#include "gsmap/trainer.hpp"

namespace gsmap {

// Sweep axes over the procedural benchmark. Traversal 0 is always held out
// for evaluation, so scene.traversals counts one more than the largest
// training set.
enum class AblationAxis { traversals, feat_dim, feat_res };

std::string ablation_axis_name(AblationAxis axis);
AblationAxis ablation_axis_from_name(const std::string& name);

struct AblationRow {
    double value = 0;
    double iou = 0;           // mean held-out mask IoU
    double runtime_sec = 0;   // distill plus mining wall time
    long residual_bytes = 0;  // storage for the training-frame residual maps
};

struct AblationConfig {
    SceneSpec scene;           // base spec; the axis overrides one knob
    AblationAxis axis = AblationAxis::traversals;
    std::vector<double> values;
    TrainConfig train;         // distillation settings shared by all runs
    MiningConfig mining;
};

// Distills a fresh map on the given traversals and scores mined masks on the
// held-out traversal 0 against the ground-truth transient masks.
double heldout_iou(const MultitraverseDataset& ds, const GroundTruthBundle& gt,
                   const std::vector<int>& train_ids, const TrainConfig& cfg,
                   const MiningConfig& mining);

// One row per value. The traversals axis reuses a single dataset and trains
// on growing subsets; the other axes regenerate the dataset per value.
std::vector<AblationRow> run_ablation(const AblationConfig& cfg, std::ostream* log = nullptr);

// CSV with header "axis,value,iou,runtime_sec,residual_bytes".
void write_ablation_csv(const std::vector<AblationRow>& rows, AblationAxis axis,
                        const std::string& path);

} // namespace gsmap
