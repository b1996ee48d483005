#pragma once

#include <ostream>
#include <string>

#include "gsmap/mining.hpp"
#include "gsmap/trainer.hpp"

namespace gsmap {

// Everything a full run needs. The default stage sequence is
// init -> distill -> mine -> env -> eval, each reading its predecessor's
// artifacts from out_dir so completed stages can be skipped or rerun.
struct PipelineConfig {
    std::string dataset_dir;
    std::string out_dir;
    uint64_t seed = 1;
    int feat_dim = 8; // PCA target when ingested features are wider; 0 keeps
    long distill_steps = 4000;
    long env_steps = 4000;
    bool use_depth_sky = true;
    long log_every = 200;

    TrainWeights weights;
    AdamConfig adam;
    DensifyConfig densify;
    RenderConfig render;
    MiningConfig mining;

    bool run_init = true;
    bool run_distill = true;
    bool run_mine = true;
    bool run_env = true;
    bool run_eval = true;
};

// Parse a key=value config file ('#' comments). Unknown keys are errors.
PipelineConfig config_from_file(const std::string& path);

// Apply one key=value override; throws on unknown keys or bad values.
void apply_option(PipelineConfig& cfg, const std::string& key, const std::string& value);

// Runs the enabled stages in order. Artifacts land in cfg.out_dir:
// init.ply, distilled.ply, residuals/frame_<i>.f32, masks/frame_<i>.png,
// environment.ply, metrics.csv, metrics_frames.csv, distill.log, env.log.
// Progress lines go to log when given.
void run_pipeline(const PipelineConfig& cfg, std::ostream* log = nullptr);

// Individual stages, each file-driven.
void stage_init(const PipelineConfig& cfg, std::ostream* log = nullptr);
void stage_distill(const PipelineConfig& cfg, std::ostream* log = nullptr);
void stage_mine(const PipelineConfig& cfg, std::ostream* log = nullptr);
void stage_env(const PipelineConfig& cfg, std::ostream* log = nullptr);
void stage_eval(const PipelineConfig& cfg, std::ostream* log = nullptr);

} // namespace gsmap
