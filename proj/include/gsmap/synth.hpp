#pragma once

#include <utility>
#include <vector>

#include "gsmap/dataset.hpp"
#include "gsmap/gaussian.hpp"
#include "gsmap/types.hpp"

namespace gsmap {

// Procedural street scene: a persistent environment (ground plane between two
// textured walls) traversed repeatedly by a camera, with fresh transient
// object clusters placed per traversal.
struct SceneSpec {
    uint64_t seed = 7;
    int traversals = 10;
    int frames_per_traversal = 100;
    int width = 192;
    int height = 128;
    int feat_w = 96;
    int feat_h = 64;
    int feat_dim = 8;

    // Environment geometry (world units; y up, camera travels along +z).
    double street_half_width = 5.5; // wall distance from the center line
    double ground_half_width = 7.0;
    double z_min = -2.0;
    double z_max = 42.0;
    double cell = 0.35; // surface sampling pitch

    // Transients.
    int min_transients = 2;
    int max_transients = 5;
    double transient_min_size = 0.6;
    double transient_max_size = 1.1;
    int static_transients = 0; // clusters repeated identically in every traversal

    // Camera path and per-frame pose jitter.
    double cam_height = 1.45;
    double pitch_deg = 7.0;
    double fov_deg = 60.0; // horizontal
    double path_z0 = 0.5;
    double path_z1 = 36.5;
    double sway = 0.6;
    double jitter_t = 0.02;
    double jitter_r_deg = 0.5;

    // Appearance.
    double photometric = 0.05; // per-traversal brightness jitter amplitude
    double feat_drift = 0.15;  // per-traversal feature shift sigma, per channel
    Vec3 sky = Vec3(0.55, 0.72, 0.92);
    double embed_scale = 3.0;
    double feat_noise = 0.05;

    // Point extraction.
    int seed_point_stride = 4;
    double seed_noise = 0.05;
    int surface_sample_stride = 2;
};

struct SceneBuild {
    GaussianMap environment;
    std::vector<GaussianMap> transients; // one map per traversal
};

// Material class embedding: embed_scale * one_hot(cls mod d). Class ids wrap,
// so dimensions below the class count deliberately collide.
VecX class_embedding(int cls, int d, double embed_scale);

CameraIntrinsics scene_intrinsics(const SceneSpec& spec);

// Un-jittered pose of frame j on the shared base trajectory.
CameraPose scene_base_pose(const SceneSpec& spec, int frame);

SceneBuild build_scene(const SceneSpec& spec);

// Renders every frame of every traversal and assembles the full ground-truth
// bundle. Images are 8-bit quantized and float maps float32-quantized so the
// in-memory dataset equals its serialized form bit for bit.
std::pair<MultitraverseDataset, GroundTruthBundle> generate_dataset(const SceneSpec& spec);

} // namespace gsmap
