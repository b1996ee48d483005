#pragma once

#include <string>

#include "gsmap/dataset.hpp"
#include "gsmap/gaussian.hpp"

namespace gsmap {

// Binary little-endian PLY with per-vertex float32 properties
// x y z, rot_0..3, scale_0..2 (log), opacity (logit), f_dc_0..2,
// f_rest_0..8 for sh degree 1, feat_0..feat_{d-1}. Header comments record
// feat_dim and sh_degree. Parameters are stored as float32, so a map that
// has been saved once round-trips bit-exactly thereafter.
void save_gaussians(const GaussianMap& map, const std::string& path);
GaussianMap load_gaussians(const std::string& path);

// Point clouds as binary PLY (x y z, optional float red green blue).
void save_point_cloud(const PointCloud& pc, const std::string& path);
PointCloud load_point_cloud(const std::string& path);

// Dataset directory: poses.json manifest, traversal_<k>/frame_<j>.png,
// .feat (F32F) and .sky.png per frame, seed_points.ply, and an optional gt/
// mirror holding .mask.png, .depth.f32, .bg.png per frame plus
// surface_samples.ply.
void write_dataset(const MultitraverseDataset& ds, const std::string& dir,
                   const GroundTruthBundle* gt = nullptr);

// target_feat_dim > 0 compresses higher-dimensional feature maps to that
// many channels with PCA at ingestion; matching or lower dims load as-is.
MultitraverseDataset load_dataset(const std::string& dir, int target_feat_dim = 0);

GroundTruthBundle load_ground_truth(const std::string& dir);

} // namespace gsmap
