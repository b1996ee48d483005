#include "gsmap/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace gsmap {

PcaModel pca_fit(const Eigen::MatrixXd& samples, int d) {
    const int n = int(samples.rows());
    const int dim = int(samples.cols());
    if (d < 1) throw std::runtime_error("pca_fit: target dimension must be positive");
    if (d > dim) throw std::runtime_error("pca_fit: target dimension exceeds source dimension");
    if (d >= n) throw std::runtime_error("pca_fit: need more samples than target dimensions");
    if (!samples.allFinite()) throw std::runtime_error("pca_fit: non-finite samples");

    PcaModel model;
    model.mean = samples.colwise().mean();
    Eigen::MatrixXd centered = samples.rowwise() - model.mean.transpose();
    Eigen::MatrixXd cov = centered.transpose() * centered / double(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    if (eig.info() != Eigen::Success) throw std::runtime_error("pca_fit: eigensolver failed");

    // Eigenvalues ascend; take the top d columns, largest first.
    model.basis.resize(dim, d);
    for (int k = 0; k < d; ++k) {
        VecX col = eig.eigenvectors().col(dim - 1 - k);
        int arg = 0;
        for (int i = 1; i < dim; ++i)
            if (std::abs(col[i]) > std::abs(col[arg])) arg = i;
        if (col[arg] < 0.0) col = -col;
        model.basis.col(k) = col;
    }
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& samples) {
    if (int(samples.cols()) != model.source_dim())
        throw std::runtime_error("pca_transform: sample dimension mismatch");
    return (samples.rowwise() - model.mean.transpose()) * model.basis;
}

std::pair<PcaModel, Eigen::MatrixXd> pca_fit_transform(const Eigen::MatrixXd& samples, int d) {
    PcaModel model = pca_fit(samples, d);
    Eigen::MatrixXd transformed = pca_transform(model, samples);
    return {std::move(model), std::move(transformed)};
}

ImageD pca_apply(const PcaModel& model, const ImageD& feat) {
    const int src = model.source_dim();
    const int dst = model.target_dim();
    if (feat.c != src) throw std::runtime_error("pca_apply: feature channel mismatch");
    ImageD out(feat.h, feat.w, dst);
    VecX v(src);
    for (int y = 0; y < feat.h; ++y)
        for (int x = 0; x < feat.w; ++x) {
            for (int ch = 0; ch < src; ++ch) v[ch] = feat.at(y, x, ch);
            VecX p = model.basis.transpose() * (v - model.mean);
            for (int ch = 0; ch < dst; ++ch) out.at(y, x, ch) = p[ch];
        }
    return out;
}

PcaModel pca_fit_frames(const std::vector<ImageD>& feats, int d, int max_samples) {
    if (feats.empty()) throw std::runtime_error("pca_fit_frames: no feature maps");
    const int dim = feats[0].c;
    size_t total = 0;
    for (const ImageD& f : feats) {
        if (f.c != dim) throw std::runtime_error("pca_fit_frames: channel mismatch across frames");
        total += size_t(f.h) * f.w;
    }
    const size_t stride = std::max<size_t>(1, total / size_t(std::max(1, max_samples)));
    std::vector<size_t> picks;
    for (size_t i = 0; i < total; i += stride) picks.push_back(i);

    Eigen::MatrixXd samples(long(picks.size()), dim);
    size_t row = 0, base = 0, fi = 0;
    for (size_t pick : picks) {
        while (pick >= base + size_t(feats[fi].h) * feats[fi].w) {
            base += size_t(feats[fi].h) * feats[fi].w;
            ++fi;
        }
        const size_t px = pick - base;
        for (int ch = 0; ch < dim; ++ch)
            samples(long(row), ch) = feats[fi].data[px * size_t(dim) + ch];
        ++row;
    }
    return pca_fit(samples, d);
}

} // namespace gsmap
