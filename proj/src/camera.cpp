#include "gsmap/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gsmap {

void Frame::validate() const {
    if (image.empty() || image.c != 3)
        throw std::runtime_error("frame: image must be h x w x 3");
    if (image.h != intr.height || image.w != intr.width)
        throw std::runtime_error("frame: image size disagrees with intrinsics");
    if (!pose.valid())
        throw std::runtime_error("frame: pose rotation is not a proper rotation");
    if (!feat.empty()) {
        // Feature grid must cover the same field of view: aspect ratios agree
        // within one pixel of rounding.
        double expect_h = double(image.h) * feat.w / image.w;
        if (std::abs(feat.h - expect_h) > 1.0)
            throw std::runtime_error("frame: feature map aspect ratio mismatch");
    }
    if (!sky_mask.empty() && (sky_mask.h != image.h || sky_mask.w != image.w))
        throw std::runtime_error("frame: sky mask size mismatch");
}

std::vector<int> MultitraverseDataset::traversal_frames(int t) const {
    std::vector<int> idx;
    for (size_t i = 0; i < frames.size(); ++i)
        if (frames[i].traversal == t) idx.push_back(int(i));
    return idx;
}

MultitraverseDataset MultitraverseDataset::first_traversals(int keep) const {
    MultitraverseDataset out;
    out.traversal_count = keep;
    out.seed_points = seed_points;
    for (const Frame& f : frames)
        if (f.traversal < keep) out.frames.push_back(f);
    return out;
}

MultitraverseDataset MultitraverseDataset::subset(const std::vector<int>& traversal_ids) const {
    MultitraverseDataset out;
    out.traversal_count = int(traversal_ids.size());
    out.seed_points = seed_points;
    for (size_t k = 0; k < traversal_ids.size(); ++k) {
        for (const Frame& f : frames) {
            if (f.traversal != traversal_ids[k]) continue;
            out.frames.push_back(f);
            out.frames.back().traversal = int(k);
        }
    }
    return out;
}

void MultitraverseDataset::validate() const {
    if (frames.empty())
        throw std::runtime_error("dataset: no frames");
    int prev = 0;
    for (size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        f.validate();
        if (f.traversal < 0 || f.traversal >= traversal_count)
            throw std::runtime_error("dataset: traversal id out of range at frame " + std::to_string(i));
        if (f.traversal < prev)
            throw std::runtime_error("dataset: frames not grouped by traversal");
        prev = f.traversal;
    }
}

} // namespace gsmap
