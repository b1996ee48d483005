#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gsmap/image.hpp"
#include "gsmap/types.hpp"

namespace gsmap {

struct PcaModel {
    VecX mean;             // D
    Eigen::MatrixXd basis; // D x d, orthonormal columns, top component first
    int source_dim() const { return int(basis.rows()); }
    int target_dim() const { return int(basis.cols()); }
};

// Principal axes of N x D samples via the covariance eigendecomposition.
// Column signs are fixed so each axis' largest-magnitude entry (first index
// on ties) is positive. Throws when d >= N or d > D.
PcaModel pca_fit(const Eigen::MatrixXd& samples, int d);

// (samples - mean) * basis, N x d.
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& samples);

std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& samples, int d);

// Per-pixel transform of an h x w x D feature plane to h x w x d.
ImageD pca_apply(const PcaModel& model, const ImageD& feat);

// Fit on at most max_samples pixels drawn with a fixed stride across frames.
PcaModel pca_fit_frames(const std::vector<ImageD>& feats, int d, int max_samples = 20000);

} // namespace gsmap
