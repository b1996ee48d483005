#include "gsmap/mining.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace gsmap {

namespace {

// Moore neighborhood in clockwise order (y down): W NW N NE E SE S SW.
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};
constexpr int kDx[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

int dir_index(int dy, int dx) {
    for (int d = 0; d < 8; ++d)
        if (kDy[d] == dy && kDx[d] == dx) return d;
    throw std::logic_error("dir_index: not a unit offset");
}

// Clockwise border trace starting at the component's topmost-leftmost pixel,
// whose west neighbor is guaranteed background. Terminates when a
// (pixel, backtrack) state repeats, which closes the loop without
// re-appending the start.
std::vector<std::array<int, 2>> trace_border(const std::vector<int>& labels, int h, int w,
                                             int label, int sy, int sx) {
    auto fg = [&](int y, int x) {
        return y >= 0 && y < h && x >= 0 && x < w && labels[size_t(y) * w + x] == label;
    };
    std::vector<std::array<int, 2>> trace{{sy, sx}};
    std::unordered_set<uint64_t> seen;
    auto key = [&](int y, int x, int bdir) {
        return (uint64_t(uint32_t(y)) << 35) | (uint64_t(uint32_t(x)) << 3) | uint64_t(bdir);
    };
    int py = sy, px = sx, bdir = 0; // backtrack: west of start
    seen.insert(key(py, px, bdir));
    for (;;) {
        int found = -1;
        for (int i = 1; i <= 8; ++i) {
            int d = (bdir + i) % 8;
            if (fg(py + kDy[d], px + kDx[d])) {
                found = d;
                break;
            }
        }
        if (found < 0) break; // isolated pixel
        // Background cell checked just before the hit becomes the new backtrack.
        int pd = (found + 7) % 8;
        int by = py + kDy[pd], bx = px + kDx[pd];
        int ny = py + kDy[found], nx = px + kDx[found];
        int nbdir = dir_index(by - ny, bx - nx);
        if (!seen.insert(key(ny, nx, nbdir)).second) break;
        trace.push_back({ny, nx});
        py = ny;
        px = nx;
        bdir = nbdir;
    }
    return trace;
}

// Pixels enclosed by the component's outer border, holes included: flood the
// padded bounding box from its rim through non-component cells; whatever the
// flood cannot reach is enclosed.
long enclosed_area(const std::vector<int>& labels, int w, int label, int min_y, int min_x,
                   int max_y, int max_x, int img_h, int img_w) {
    const int lh = max_y - min_y + 3, lw = max_x - min_x + 3; // one-cell pad
    std::vector<uint8_t> open(size_t(lh) * lw, 0);
    for (int y = 0; y < lh; ++y)
        for (int x = 0; x < lw; ++x) {
            int gy = y + min_y - 1, gx = x + min_x - 1;
            bool wall = gy >= 0 && gy < img_h && gx >= 0 && gx < img_w &&
                        labels[size_t(gy) * img_w + gx] == label;
            open[size_t(y) * lw + x] = wall ? 0 : 1;
        }
    std::vector<std::array<int, 2>> stack{{0, 0}};
    std::vector<uint8_t> reached(size_t(lh) * lw, 0);
    reached[0] = 1;
    long flooded = 1;
    while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        constexpr int fy[4] = {-1, 1, 0, 0};
        constexpr int fx[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            int ny = y + fy[k], nx = x + fx[k];
            if (ny < 0 || ny >= lh || nx < 0 || nx >= lw) continue;
            size_t idx = size_t(ny) * lw + nx;
            if (!open[idx] || reached[idx]) continue;
            reached[idx] = 1;
            ++flooded;
            stack.push_back({ny, nx});
        }
    }
    return long(lh) * lw - flooded;
}

int64_t cross(const std::array<int64_t, 2>& o, const std::array<int64_t, 2>& a,
              const std::array<int64_t, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// Andrew's monotone chain; returns the hull counterclockwise (x right, y up
// algebraically), collinear points dropped.
std::vector<std::array<int64_t, 2>> convex_hull(std::vector<std::array<int64_t, 2>> pts) {
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const size_t n = pts.size();
    if (n <= 2) return pts;
    std::vector<std::array<int64_t, 2>> hull(2 * n);
    size_t k = 0;
    for (size_t i = 0; i < n; ++i) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    for (size_t i = n - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

} // namespace

ImageD normalize_and_activate(const ImageD& residual, double delta1) {
    if (residual.c != 1) throw std::runtime_error("normalize_and_activate: single channel expected");
    ImageD out(residual.h, residual.w, 1);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : residual.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!(hi > lo)) return out; // constant map
    const double inv = 1.0 / (hi - lo);
    for (size_t i = 0; i < out.data.size(); ++i) {
        double v = (residual.data[i] - lo) * inv;
        out.data[i] = v < delta1 ? 0.0 : v;
    }
    return out;
}

std::vector<Contour> find_contours(const ImageD& activated) {
    if (activated.c != 1) throw std::runtime_error("find_contours: single channel expected");
    const int h = activated.h, w = activated.w;
    std::vector<int> labels(size_t(h) * w, 0);
    std::vector<Contour> contours;
    int next = 0;
    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            if (activated.at(sy, sx, 0) <= 0.0 || labels[size_t(sy) * w + sx] != 0) continue;
            const int label = ++next;
            Contour c;
            c.min_y = c.max_y = sy;
            c.min_x = c.max_x = sx;
            std::vector<std::array<int, 2>> stack{{sy, sx}};
            labels[size_t(sy) * w + sx] = label;
            while (!stack.empty()) {
                auto [y, x] = stack.back();
                stack.pop_back();
                c.min_y = std::min(c.min_y, y);
                c.max_y = std::max(c.max_y, y);
                c.min_x = std::min(c.min_x, x);
                c.max_x = std::max(c.max_x, x);
                for (int d = 0; d < 8; ++d) {
                    int ny = y + kDy[d], nx = x + kDx[d];
                    if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
                    size_t idx = size_t(ny) * w + nx;
                    if (activated.data[idx] <= 0.0 || labels[idx] != 0) continue;
                    labels[idx] = label;
                    stack.push_back({ny, nx});
                }
            }
            c.points = trace_border(labels, h, w, label, sy, sx);
            c.area = enclosed_area(labels, w, label, c.min_y, c.min_x, c.max_y, c.max_x, h, w);
            contours.push_back(std::move(c));
        }
    }
    return contours;
}

std::vector<Contour> filter_contours(std::vector<Contour> contours, int h, int w,
                                     const MiningConfig& cfg) {
    const double min_area = cfg.delta2 * (double(h) * w) / (double(cfg.ref_h) * cfg.ref_w);
    const double sky_row = (1.0 - cfg.delta3) * h;
    std::vector<Contour> kept;
    for (Contour& c : contours) {
        if (double(c.area) < min_area) continue;
        if (double(c.max_y) < sky_row) continue;
        kept.push_back(std::move(c));
    }
    return kept;
}

std::vector<std::vector<int>> merge_contours(const std::vector<Contour>& contours,
                                             double delta4) {
    const int n = int(contours.size());
    std::vector<int> parent(n);
    for (int i = 0; i < n; ++i) parent[i] = i;
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    const double pad = delta4 / 2.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Contour& a = contours[i];
            const Contour& b = contours[j];
            bool touch_y = a.min_y - pad <= b.max_y + pad && b.min_y - pad <= a.max_y + pad;
            bool touch_x = a.min_x - pad <= b.max_x + pad && b.min_x - pad <= a.max_x + pad;
            if (touch_y && touch_x) parent[find(i)] = find(j);
        }
    }
    std::vector<std::vector<int>> groups;
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (slot[r] < 0) {
            slot[r] = int(groups.size());
            groups.emplace_back();
        }
        groups[slot[r]].push_back(i);
    }
    return groups;
}

MaskU8 hulls_to_mask(const std::vector<std::vector<int>>& groups,
                     const std::vector<Contour>& contours, int h, int w) {
    MaskU8 mask(h, w, 1);
    for (const std::vector<int>& group : groups) {
        std::vector<std::array<int64_t, 2>> pts;
        for (int ci : group)
            for (const auto& p : contours[size_t(ci)].points)
                pts.push_back({p[1], p[0]}); // (x, y)
        if (pts.empty()) continue;
        std::vector<std::array<int64_t, 2>> hull = convex_hull(std::move(pts));
        int64_t lo_x = hull[0][0], hi_x = hull[0][0], lo_y = hull[0][1], hi_y = hull[0][1];
        for (const auto& p : hull) {
            lo_x = std::min(lo_x, p[0]);
            hi_x = std::max(hi_x, p[0]);
            lo_y = std::min(lo_y, p[1]);
            hi_y = std::max(hi_y, p[1]);
        }
        lo_x = std::max<int64_t>(lo_x, 0);
        lo_y = std::max<int64_t>(lo_y, 0);
        hi_x = std::min<int64_t>(hi_x, w - 1);
        hi_y = std::min<int64_t>(hi_y, h - 1);
        const size_t m = hull.size();
        for (int64_t y = lo_y; y <= hi_y; ++y) {
            for (int64_t x = lo_x; x <= hi_x; ++x) {
                bool inside = true;
                for (size_t i = 0; i < m && inside; ++i)
                    inside = cross(hull[i], hull[(i + 1) % m], {x, y}) >= 0;
                if (inside) mask.at(int(y), int(x), 0) = 255;
            }
        }
    }
    return mask;
}

MaskU8 upsample_nearest(const MaskU8& mask, int out_h, int out_w) {
    if (mask.h == out_h && mask.w == out_w) return mask;
    MaskU8 out(out_h, out_w, 1);
    for (int y = 0; y < out_h; ++y) {
        int sy = std::min(int(int64_t(y) * mask.h / out_h), mask.h - 1);
        for (int x = 0; x < out_w; ++x) {
            int sx = std::min(int(int64_t(x) * mask.w / out_w), mask.w - 1);
            out.at(y, x, 0) = mask.at(sy, sx, 0);
        }
    }
    return out;
}

MaskU8 mine_mask(const ImageD& residual, int out_h, int out_w, const MiningConfig& cfg) {
    ImageD act = normalize_and_activate(residual, cfg.delta1);
    std::vector<Contour> contours =
        filter_contours(find_contours(act), residual.h, residual.w, cfg);
    std::vector<std::vector<int>> groups = merge_contours(contours, cfg.delta4);
    MaskU8 mask = hulls_to_mask(groups, contours, residual.h, residual.w);
    return upsample_nearest(mask, out_h, out_w);
}

std::vector<MaskU8> mine_masks(const std::vector<ImageD>& residuals, int out_h, int out_w,
                               const MiningConfig& cfg) {
    std::vector<MaskU8> masks;
    masks.reserve(residuals.size());
    for (const ImageD& r : residuals) masks.push_back(mine_mask(r, out_h, out_w, cfg));
    return masks;
}

} // namespace gsmap
