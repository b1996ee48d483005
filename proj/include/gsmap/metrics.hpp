#pragma once

#include <string>
#include <vector>

#include "gsmap/image.hpp"
#include "gsmap/types.hpp"

namespace gsmap {

// Per-frame metric values plus their mean.
struct MetricReport {
    std::string name;
    std::vector<double> per_frame;
    bool masked = false;
    double aggregate() const;
};

// Intersection over union of the nonzero pixels; 1.0 when both masks are empty.
double iou(const MaskU8& pred, const MaskU8& gt);

// Symmetric mean nearest-neighbor distance between point sets, exact search.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

// Peak signal-to-noise ratio in dB for values in [0,1]; pixels where exclude
// is nonzero are ignored. Returns +infinity for identical inputs.
double psnr(const ImageD& a, const ImageD& b, const MaskU8* exclude = nullptr);

// Single-scale SSIM: 11x11 Gaussian window (sigma 1.5), k1 = 0.01, k2 = 0.03,
// dynamic range 1, averaged over channels and valid window positions.
double ssim(const ImageD& a, const ImageD& b);

// Exact nearest-neighbor search over a fixed point set.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points);
    // Squared distance from query to its nearest stored point.
    double nearest_sq(const Vec3& query) const;
    size_t size() const { return pts_.size(); }

private:
    struct Node {
        int left = -1;
        int right = -1;
        int axis = 0;
    };
    int build(int begin, int end, int depth);
    void search(int node, const Vec3& q, double& best) const;

    std::vector<Vec3> pts_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace gsmap
