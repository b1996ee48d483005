#pragma once

#include <array>
#include <vector>

#include "gsmap/image.hpp"

namespace gsmap {

// Thresholds for mining ephemerality masks out of feature residuals.
// delta2 is specified at the reference resolution and rescaled by
// (h_f*w_f)/(ref_h*ref_w) so behaviour is resolution-independent.
struct MiningConfig {
    double delta1 = 0.3;   // activation threshold after min-max normalization
    double delta2 = 100.0; // minimum enclosed area in pixels at reference resolution
    double delta3 = 0.7;   // keep contours reaching below the top (1-delta3) band
    double delta4 = 10.0;  // merge distance between contour bounding boxes
    int ref_h = 110;
    int ref_w = 180;
};

// Closed outer border of one connected component, traced clockwise from its
// topmost-leftmost pixel. Points are (row, col). area counts every pixel
// enclosed by the border, holes included.
struct Contour {
    std::vector<std::array<int, 2>> points;
    int min_y = 0;
    int min_x = 0;
    int max_y = 0;
    int max_x = 0;
    long area = 0;
};

// Min-max normalize to [0,1] (constant input maps to all zeros), then zero
// every value below delta1.
ImageD normalize_and_activate(const ImageD& residual, double delta1);

// Outer borders of the 8-connected components of {activated > 0}, discovered
// in raster order.
std::vector<Contour> find_contours(const ImageD& activated);

// Drop contours with area < delta2*(h*w)/(ref_h*ref_w) and contours whose
// lowest row is above (1-delta3)*h.
std::vector<Contour> filter_contours(std::vector<Contour> contours, int h, int w,
                                     const MiningConfig& cfg);

// Single-link grouping: contours link when their bounding boxes, each
// inflated by delta4/2 per side, intersect. Groups hold ascending indices
// into the input list and are ordered by smallest member.
std::vector<std::vector<int>> merge_contours(const std::vector<Contour>& contours,
                                             double delta4);

// Rasterize the convex hull (boundary included) of each group's pooled
// contour points into an h x w mask, 255 = ephemeral.
MaskU8 hulls_to_mask(const std::vector<std::vector<int>>& groups,
                     const std::vector<Contour>& contours, int h, int w);

MaskU8 upsample_nearest(const MaskU8& mask, int out_h, int out_w);

// Full residual-to-mask path for one frame: activate, trace, filter, merge,
// hull-fill at residual resolution, then nearest-neighbor upsample.
MaskU8 mine_mask(const ImageD& residual, int out_h, int out_w, const MiningConfig& cfg);

std::vector<MaskU8> mine_masks(const std::vector<ImageD>& residuals, int out_h, int out_w,
                               const MiningConfig& cfg);

} // namespace gsmap
