#include "gsmap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gsmap {

double MetricReport::aggregate() const {
    if (per_frame.empty()) return 0.0;
    double s = 0.0;
    for (double v : per_frame) s += v;
    return s / double(per_frame.size());
}

double iou(const MaskU8& pred, const MaskU8& gt) {
    if (!pred.same_shape(gt)) throw std::runtime_error("iou: shape mismatch");
    long inter = 0, uni = 0;
    for (size_t i = 0; i < pred.data.size(); ++i) {
        bool p = pred.data[i] != 0, g = gt.data[i] != 0;
        inter += p && g;
        uni += p || g;
    }
    return uni == 0 ? 1.0 : double(inter) / double(uni);
}

KdTree::KdTree(std::vector<Vec3> points) : pts_(std::move(points)), nodes_(pts_.size()) {
    root_ = build(0, int(pts_.size()), 0);
}

int KdTree::build(int begin, int end, int depth) {
    if (begin >= end) return -1;
    const int mid = begin + (end - begin) / 2;
    const int axis = depth % 3;
    std::nth_element(pts_.begin() + begin, pts_.begin() + mid, pts_.begin() + end,
                     [axis](const Vec3& a, const Vec3& b) { return a[axis] < b[axis]; });
    nodes_[size_t(mid)].axis = axis;
    nodes_[size_t(mid)].left = build(begin, mid, depth + 1);
    nodes_[size_t(mid)].right = build(mid + 1, end, depth + 1);
    return mid;
}

void KdTree::search(int node, const Vec3& q, double& best) const {
    if (node < 0) return;
    const Vec3& p = pts_[size_t(node)];
    best = std::min(best, (p - q).squaredNorm());
    const int axis = nodes_[size_t(node)].axis;
    const double d = q[axis] - p[axis];
    const int near = d < 0.0 ? nodes_[size_t(node)].left : nodes_[size_t(node)].right;
    const int far = d < 0.0 ? nodes_[size_t(node)].right : nodes_[size_t(node)].left;
    search(near, q, best);
    if (d * d < best) search(far, q, best);
}

double KdTree::nearest_sq(const Vec3& query) const {
    if (pts_.empty()) throw std::runtime_error("KdTree: empty point set");
    double best = std::numeric_limits<double>::infinity();
    search(root_, query, best);
    return best;
}

namespace {

double directed_mean(const std::vector<Vec3>& from, const KdTree& to) {
    double s = 0.0;
    for (const Vec3& p : from) s += std::sqrt(to.nearest_sq(p));
    return s / double(from.size());
}

} // namespace

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.empty() || b.empty()) throw std::runtime_error("chamfer: empty point set");
    KdTree ta(a), tb(b);
    return 0.5 * (directed_mean(a, tb) + directed_mean(b, ta));
}

double psnr(const ImageD& a, const ImageD& b, const MaskU8* exclude) {
    if (!a.same_shape(b)) throw std::runtime_error("psnr: shape mismatch");
    if (exclude && (exclude->h != a.h || exclude->w != a.w))
        throw std::runtime_error("psnr: mask shape mismatch");
    double se = 0.0;
    long n = 0;
    for (int y = 0; y < a.h; ++y)
        for (int x = 0; x < a.w; ++x) {
            if (exclude && exclude->at(y, x, 0) != 0) continue;
            for (int c = 0; c < a.c; ++c) {
                double d = a.at(y, x, c) - b.at(y, x, c);
                se += d * d;
            }
            n += a.c;
        }
    if (n == 0) throw std::runtime_error("psnr: every pixel excluded");
    const double mse = se / double(n);
    if (mse <= 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

double ssim(const ImageD& a, const ImageD& b) {
    if (!a.same_shape(b)) throw std::runtime_error("ssim: shape mismatch");
    constexpr int kWin = 11;
    constexpr double kSigma = 1.5;
    constexpr double kC1 = 0.01 * 0.01;
    constexpr double kC2 = 0.03 * 0.03;
    if (a.h < kWin || a.w < kWin) throw std::runtime_error("ssim: image smaller than window");

    double kernel[kWin];
    double ksum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        kernel[i] = std::exp(-0.5 * d * d / (kSigma * kSigma));
        ksum += kernel[i];
    }
    for (double& k : kernel) k /= ksum;

    double total = 0.0;
    long count = 0;
    for (int c = 0; c < a.c; ++c) {
        for (int y = 0; y + kWin <= a.h; ++y) {
            for (int x = 0; x + kWin <= a.w; ++x) {
                double ma = 0.0, mb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
                for (int i = 0; i < kWin; ++i)
                    for (int j = 0; j < kWin; ++j) {
                        const double w = kernel[i] * kernel[j];
                        const double va = a.at(y + i, x + j, c);
                        const double vb = b.at(y + i, x + j, c);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                const double var_a = saa - ma * ma;
                const double var_b = sbb - mb * mb;
                const double cov = sab - ma * mb;
                total += (2.0 * ma * mb + kC1) * (2.0 * cov + kC2) /
                         ((ma * ma + mb * mb + kC1) * (var_a + var_b + kC2));
                ++count;
            }
        }
    }
    return total / double(count);
}

} // namespace gsmap
