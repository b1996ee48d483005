#pragma once

// Training objectives. Each loss returns its scalar value and, when a
// gradient plane is supplied, writes d(loss)/d(rendered input) into it.

#include "gsmap/image.hpp"

namespace gsmap {

// Weighted mean absolute error over pixels and channels. weight is per pixel
// (h x w); null or empty means all ones. The normalizer is the weight sum
// times the channel count; an all-zero weight yields loss 0 and zero grads.
double loss_rgb_l1(const ImageD& rendered, const ImageD& target,
                   const ImageD* weight, ImageD* grad);

// Per-pixel KL divergence of channel softmaxes, KL(target || rendered),
// averaged over pixels. residual receives the per-pixel values when given.
double loss_feat_kl(const ImageD& rendered, const ImageD& target,
                    ImageD* grad, ImageD* residual);

// Edge-aware smoothness of inverse depth: forward differences on
// 1 / max(depth, 1e-6), each weighted by exp(-L1 norm of the image gradient
// at the same offset). Border row and column are excluded.
double loss_depth_smooth(const ImageD& depth, const ImageD& image, ImageD* grad_depth);

// Mean absolute difference between the sky mask and one minus the rendered
// opacity: sky pixels push opacity toward 0, others toward 1.
double loss_sky(const ImageD& opacity, const MaskU8& sky_mask, ImageD* grad_opacity);

} // namespace gsmap
