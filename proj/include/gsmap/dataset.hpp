#pragma once

// Captured frames grouped by traversal, plus the ground truth bundle the
// synthetic generator emits alongside them.

#include <string>
#include <vector>

#include "gsmap/camera.hpp"
#include "gsmap/image.hpp"
#include "gsmap/types.hpp"

namespace gsmap {

struct Frame {
    ImageD image;        // h x w x 3 in [0, 1]
    ImageD feat;         // h_f x w_f x d target features, may be empty
    CameraPose pose;
    CameraIntrinsics intr;
    int traversal = 0;
    MaskU8 sky_mask;     // h x w, 255 = sky, may be empty

    // Throws std::runtime_error on shape or pose violations.
    void validate() const;
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<Vec3> colors;  // may be empty
};

struct MultitraverseDataset {
    std::vector<Frame> frames;       // grouped by traversal, ascending
    int traversal_count = 0;
    PointCloud seed_points;

    // Frames belonging to one traversal, in order.
    std::vector<int> traversal_frames(int t) const;

    // Copy containing only traversals [0, keep), seed points shared.
    MultitraverseDataset first_traversals(int keep) const;

    // Copy containing only the listed traversals, renumbered 0..k-1 in the
    // given order, seed points shared.
    MultitraverseDataset subset(const std::vector<int>& traversal_ids) const;

    void validate() const;
};

// Per-frame ground truth, indexed like MultitraverseDataset::frames.
struct GroundTruthBundle {
    std::vector<MaskU8> transient_masks;  // h x w, 255 = transient
    std::vector<ImageD> depths;           // h x w x 1
    std::vector<ImageD> backgrounds;      // h x w x 3, environment only
    std::vector<MaskU8> sky_masks;        // h x w, 255 = sky
    PointCloud surface_samples;           // environment surfaces, for geometry error
    PointCloud seed_points;

    bool empty() const { return transient_masks.empty(); }
};

} // namespace gsmap
