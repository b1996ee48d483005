#include "gsmap/render.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsmap/parallel.hpp"

namespace gsmap {

namespace {

constexpr double kWeightEps = 1e-8;  // depth normalizer floor

Mat23 proj_jacobian(const Vec3& t, const CameraIntrinsics& intr) {
    double iz = 1.0 / t.z();
    double iz2 = iz * iz;
    Mat23 J;
    J << intr.fx * iz, 0.0, -intr.fx * t.x() * iz2,
         0.0, intr.fy * iz, -intr.fy * t.y() * iz2;
    return J;
}

std::vector<Splat2D> prep_splats(const GaussianMap& map, const CameraPose& pose,
                                 const CameraIntrinsics& intr, const RenderConfig& cfg) {
    std::vector<Splat2D> splats;
    splats.reserve(map.size());
    Splat2D s;
    for (size_t i = 0; i < map.size(); ++i) {
        if (project(map[i], pose, intr, map.sh_degree, cfg, int(i), s))
            splats.push_back(s);
    }
    std::sort(splats.begin(), splats.end(), [](const Splat2D& a, const Splat2D& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.source_index < b.source_index;
    });
    return splats;
}

// Shared tiled rasterizer. nc is the blended channel count; the payload is
// splat color for the image pass and splat features otherwise. The naive
// path visits every splat at every pixel and disables skip and termination.
void rasterize(const std::vector<Splat2D>& splats, int h, int w, int nc, bool image_pass,
               bool naive, const RenderConfig& cfg, ImageD& chan, ImageD* depth,
               ImageD* opacity, BlendBuffer& blend) {
    const int ts = std::max(1, cfg.tile_size);
    const int tiles_x = (w + ts - 1) / ts;
    const int tiles_y = (h + ts - 1) / ts;
    const size_t n_tiles = size_t(tiles_x) * tiles_y;
    const double cutoff = cfg.coverage_sigma * cfg.coverage_sigma;
    const double skip = naive ? -1.0 : cfg.alpha_skip;
    const double min_t = naive ? -1.0 : cfg.min_transmittance;

    std::vector<std::vector<int32_t>> bins(n_tiles);
    if (naive) {
        std::vector<int32_t> all(splats.size());
        for (size_t i = 0; i < splats.size(); ++i) all[i] = int32_t(i);
        for (auto& b : bins) b = all;
    } else {
        for (size_t si = 0; si < splats.size(); ++si) {
            const Splat2D& s = splats[si];
            int x0 = std::max(0, int(std::floor(s.mean2d.x() - s.radius)));
            int x1 = std::min(w - 1, int(std::ceil(s.mean2d.x() + s.radius)));
            int y0 = std::max(0, int(std::floor(s.mean2d.y() - s.radius)));
            int y1 = std::min(h - 1, int(std::ceil(s.mean2d.y() + s.radius)));
            if (x0 > x1 || y0 > y1) continue;
            for (int ty = y0 / ts; ty <= y1 / ts; ++ty)
                for (int tx = x0 / ts; tx <= x1 / ts; ++tx)
                    bins[size_t(ty) * tiles_x + tx].push_back(int32_t(si));
        }
    }

    blend.offset.assign(size_t(h) * w, 0);
    blend.count.assign(size_t(h) * w, 0);
    blend.final_t.assign(size_t(h) * w, 1.0);
    std::vector<std::vector<BlendRecord>> tile_records(n_tiles);

    parallel_chunks(n_tiles, cfg.threads, [&](size_t tb, size_t te, size_t) {
        for (size_t tile = tb; tile < te; ++tile) {
            const auto& bin = bins[tile];
            auto& recs = tile_records[tile];
            const int px0 = int(tile % tiles_x) * ts;
            const int py0 = int(tile / tiles_x) * ts;
            const int px1 = std::min(px0 + ts, w);
            const int py1 = std::min(py0 + ts, h);
            for (int y = py0; y < py1; ++y) {
                for (int x = px0; x < px1; ++x) {
                    const size_t px = size_t(y) * w + x;
                    const Vec2 p(x + 0.5, y + 0.5);
                    double T = 1.0;
                    double wsum = 0.0;
                    size_t count0 = recs.size();
                    double* out_c = &chan.at(y, x, 0);
                    for (int32_t si : bin) {
                        const Splat2D& s = splats[si];
                        const Vec2 d = p - s.mean2d;
                        const double maha = d.dot(s.conic * d);
                        if (maha > cutoff) continue;
                        const double alpha =
                            std::min(s.opacity * std::exp(-0.5 * maha), cfg.alpha_clamp);
                        if (alpha < skip) continue;
                        const double wgt = alpha * T;
                        const double* payload =
                            image_pass ? s.color.data() : s.feat.data();
                        for (int ch = 0; ch < nc; ++ch) out_c[ch] += wgt * payload[ch];
                        if (image_pass) {
                            depth->data[px] += wgt * s.depth;
                            wsum += wgt;
                        }
                        recs.push_back({si, alpha, T});
                        T *= 1.0 - alpha;
                        if (T < min_t) break;
                    }
                    blend.count[px] = uint32_t(recs.size() - count0);
                    blend.final_t[px] = T;
                    if (image_pass) {
                        opacity->data[px] = wsum;
                        for (int ch = 0; ch < nc; ++ch)
                            out_c[ch] += T * cfg.background[ch];
                        depth->data[px] /= std::max(wsum, kWeightEps);
                    }
                }
            }
        }
    });

    // Concatenate tile arenas in tile order and point pixels at their slice.
    size_t total = 0;
    for (const auto& r : tile_records) total += r.size();
    blend.records.reserve(total);
    for (size_t tile = 0; tile < n_tiles; ++tile) {
        const int px0 = int(tile % tiles_x) * ts;
        const int py0 = int(tile / tiles_x) * ts;
        const int px1 = std::min(px0 + ts, w);
        const int py1 = std::min(py0 + ts, h);
        size_t run = blend.records.size();
        blend.records.insert(blend.records.end(), tile_records[tile].begin(),
                             tile_records[tile].end());
        for (int y = py0; y < py1; ++y) {
            for (int x = px0; x < px1; ++x) {
                const size_t px = size_t(y) * w + x;
                blend.offset[px] = uint32_t(run);
                run += blend.count[px];
            }
        }
    }
}

RenderOutput render_impl(const GaussianMap& map, const ViewGeometry& geom,
                         const RenderConfig& cfg, bool naive) {
    if (map.empty()) throw std::runtime_error("render: empty map");
    const int h = geom.intr.height, w = geom.intr.width;
    if (h <= 0 || w <= 0) throw std::runtime_error("render: empty view");

    RenderOutput out;
    out.rgb = ImageD(h, w, 3);
    out.depth = ImageD(h, w, 1);
    out.opacity = ImageD(h, w, 1);
    out.splats_rgb = prep_splats(map, geom.pose, geom.intr, cfg);
    rasterize(out.splats_rgb, h, w, 3, true, naive, cfg, out.rgb, &out.depth,
              &out.opacity, out.blend_rgb);

    if (geom.feat_h > 0 && geom.feat_w > 0 && map.feat_dim > 0) {
        const CameraIntrinsics fintr = geom.intr.scaled(geom.feat_w, geom.feat_h);
        out.feat = ImageD(geom.feat_h, geom.feat_w, map.feat_dim);
        out.splats_feat = prep_splats(map, geom.pose, fintr, cfg);
        rasterize(out.splats_feat, geom.feat_h, geom.feat_w, map.feat_dim, false,
                  naive, cfg, out.feat, nullptr, nullptr, out.blend_feat);
    }
    return out;
}

// Per-splat gradient accumulator for one pass; feature channels live in a
// separate flat array.
struct SplatAcc {
    double mean_x = 0, mean_y = 0;
    double conic00 = 0, conic01 = 0, conic11 = 0;
    double color[3] = {0, 0, 0};
    double depth = 0;
    double op = 0;
};

// d(rotation)/d(unit quaternion component) contracted with the incoming
// rotation gradient.
Vec4 quat_backward(const Vec4& q, const Mat3& gR) {
    const double n = q.norm();
    const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
    Mat3 dw, dx, dy, dz;
    dw << 0, -z, y, z, 0, -x, -y, x, 0;
    dx << 0, y, z, y, -2 * x, -w, z, w, -2 * x;
    dy << -2 * y, x, w, x, 0, z, -w, z, -2 * y;
    dz << -2 * z, -w, x, w, -2 * z, y, x, y, 0;
    Vec4 gq_hat(2.0 * (gR.array() * dw.array()).sum(),
                2.0 * (gR.array() * dx.array()).sum(),
                2.0 * (gR.array() * dy.array()).sum(),
                2.0 * (gR.array() * dz.array()).sum());
    const Vec4 q_hat(w, x, y, z);
    return (gq_hat - q_hat * q_hat.dot(gq_hat)) / n;
}

// Maps one splat's 2D gradients back to its Gaussian's parameters.
void chain_splat(const GaussianMap& map, const CameraPose& pose,
                 const CameraIntrinsics& intr, const Splat2D& s, const SplatAcc& a,
                 const double* gfeat, bool image_pass, GradientBuffer& grads) {
    const int i = s.source_index;
    const Gaussian3D& g = map[i];

    // Conic to 2D covariance: dA = -A dM A for A = M^-1.
    Mat2 gA;
    gA << a.conic00, a.conic01, a.conic01, a.conic11;
    const Mat2 gCov = -s.conic * gA * s.conic;

    const Vec3 t = pose.to_camera(g.mu);
    const Mat23 J = proj_jacobian(t, intr);
    const Mat23 T2 = J * pose.R;
    const Mat3 sigma = covariance(g);

    const Mat3 gSigma = T2.transpose() * gCov * T2;
    const Mat23 gT2 = (gCov + gCov.transpose()) * T2 * sigma;
    const Mat23 gJ = gT2 * pose.R.transpose();

    const double iz = 1.0 / t.z();
    const double iz2 = iz * iz;
    Vec3 gt = Vec3::Zero();
    gt.x() += gJ(0, 2) * (-intr.fx * iz2);
    gt.y() += gJ(1, 2) * (-intr.fy * iz2);
    gt.z() += gJ(0, 0) * (-intr.fx * iz2) + gJ(0, 2) * (2.0 * intr.fx * t.x() * iz2 * iz) +
              gJ(1, 1) * (-intr.fy * iz2) + gJ(1, 2) * (2.0 * intr.fy * t.y() * iz2 * iz);

    // Projected mean.
    gt.x() += a.mean_x * intr.fx * iz;
    gt.y() += a.mean_y * intr.fy * iz;
    gt.z() += -a.mean_x * intr.fx * t.x() * iz2 - a.mean_y * intr.fy * t.y() * iz2;

    // Blended depth is camera-frame z.
    gt.z() += a.depth;

    grads.mu[i] += pose.R.transpose() * gt;

    // Sigma = M M^T with M = R * diag(exp(log_s)).
    const Mat3 R = quat_to_rot(g.q);
    const Vec3 sv = g.log_s.array().exp();
    const Mat3 M = R * sv.asDiagonal();
    const Mat3 gM = (gSigma + gSigma.transpose()) * M;
    Mat3 gR;
    for (int axis = 0; axis < 3; ++axis) {
        grads.log_s[i][axis] += gM.col(axis).dot(R.col(axis)) * sv[axis];
        gR.col(axis) = gM.col(axis) * sv[axis];
    }
    grads.q[i] += quat_backward(g.q, gR);

    // View-dependent color; the [0,1] clamp gates the flow per channel.
    if (image_pass) {
        const Vec3 cam = pose.center();
        const Vec3 off = g.mu - cam;
        const double dist = off.norm();
        const Vec3 dir = dist > 0 ? Vec3(off / dist) : Vec3(0, 0, 1);
        Vec3 raw = kShC0 * g.sh[0] + Vec3::Constant(0.5);
        if (map.sh_degree >= 1)
            raw += kShC1 * (-dir.y() * g.sh[1] + dir.z() * g.sh[2] - dir.x() * g.sh[3]);
        Vec3 gdir = Vec3::Zero();
        for (int ch = 0; ch < 3; ++ch) {
            if (raw[ch] <= 0.0 || raw[ch] >= 1.0) continue;
            const double gc = a.color[ch];
            grads.sh[i][0][ch] += gc * kShC0;
            if (map.sh_degree >= 1) {
                grads.sh[i][1][ch] += gc * (-kShC1 * dir.y());
                grads.sh[i][2][ch] += gc * (kShC1 * dir.z());
                grads.sh[i][3][ch] += gc * (-kShC1 * dir.x());
                gdir.x() += gc * (-kShC1 * g.sh[3][ch]);
                gdir.y() += gc * (-kShC1 * g.sh[1][ch]);
                gdir.z() += gc * (kShC1 * g.sh[2][ch]);
            }
        }
        if (map.sh_degree >= 1 && dist > 0)
            grads.mu[i] += (gdir - dir * dir.dot(gdir)) / dist;
    }

    const double op = s.opacity;
    grads.alpha_logit[i] += a.op * op * (1.0 - op);

    if (gfeat) {
        for (int ch = 0; ch < g.feat.size(); ++ch) grads.feat[i][ch] += gfeat[ch];
    }

    grads.pos2d_ndc[i] += Vec2(a.mean_x * intr.width * 0.5, a.mean_y * intr.height * 0.5);
    grads.visible[i] = 1;
}

// Backward over one pass. chan_up carries the upstream gradient for the
// blended channels; depth_up/op_up apply to the image pass only.
void backward_pass(const GaussianMap& map, const CameraPose& pose,
                   const CameraIntrinsics& intr, const std::vector<Splat2D>& splats,
                   const BlendBuffer& blend, bool image_pass, int nc,
                   const ImageD* chan_up, const ImageD* depth_up, const ImageD* op_up,
                   const RenderConfig& cfg, GradientBuffer& grads) {
    if (splats.empty()) return;
    const int h = intr.height, w = intr.width;
    const size_t n_px = size_t(h) * w;
    const size_t n_splats = splats.size();
    const int workers = resolve_workers(cfg.threads);
    const size_t slots = std::min<size_t>(workers, n_px ? n_px : 1);

    std::vector<std::vector<SplatAcc>> acc(slots, std::vector<SplatAcc>(n_splats));
    std::vector<std::vector<double>> feat_acc;
    if (!image_pass)
        feat_acc.assign(slots, std::vector<double>(n_splats * nc, 0.0));

    parallel_chunks(n_px, int(slots), [&](size_t pb, size_t pe, size_t slot) {
        std::vector<SplatAcc>& sa = acc[slot];
        double* fa = image_pass ? nullptr : feat_acc[slot].data();
        std::vector<double> gc(nc);
        for (size_t px = pb; px < pe; ++px) {
            const uint32_t cnt = blend.count[px];
            const uint32_t off = blend.offset[px];

            bool any = false;
            if (chan_up && !chan_up->empty()) {
                for (int ch = 0; ch < nc; ++ch) {
                    gc[ch] = chan_up->data[px * nc + ch];
                    any = any || gc[ch] != 0.0;
                }
            } else {
                std::fill(gc.begin(), gc.end(), 0.0);
            }
            double gdepth = 0.0, gop = 0.0;
            if (image_pass) {
                if (depth_up && !depth_up->empty()) gdepth = depth_up->data[px];
                if (op_up && !op_up->empty()) gop = op_up->data[px];
                any = any || gdepth != 0.0 || gop != 0.0;
            }
            if (!any || cnt == 0) continue;

            // Recompute blended totals for the depth normalizer.
            double wsum = 0.0, draw = 0.0;
            if (image_pass) {
                for (uint32_t k = 0; k < cnt; ++k) {
                    const BlendRecord& r = blend.records[off + k];
                    const double wgt = r.alpha * r.transmittance;
                    wsum += wgt;
                    draw += wgt * splats[r.splat].depth;
                }
            }
            const double denom = std::max(wsum, kWeightEps);
            const double g_draw = gdepth / denom;
            const double g_wsum =
                gop - (wsum > kWeightEps ? gdepth * draw / (denom * denom) : 0.0);

            // Background contribution enters through the final transmittance
            // and shares the suffix form of the alpha gradient.
            double suffix = 0.0;
            if (image_pass) {
                double gbg = 0.0;
                for (int ch = 0; ch < nc; ++ch) gbg += gc[ch] * cfg.background[ch];
                suffix = gbg * blend.final_t[px];
            }

            const double pcx = double(px % w) + 0.5;
            const double pcy = double(px / w) + 0.5;
            for (uint32_t k = cnt; k-- > 0;) {
                const BlendRecord& r = blend.records[off + k];
                const Splat2D& s = splats[r.splat];
                const double* payload = image_pass ? s.color.data() : s.feat.data();
                double u = 0.0;
                for (int ch = 0; ch < nc; ++ch) u += gc[ch] * payload[ch];
                if (image_pass) u += g_draw * s.depth + g_wsum;

                const double wgt = r.alpha * r.transmittance;
                const double g_alpha = u * r.transmittance - suffix / (1.0 - r.alpha);
                suffix += u * wgt;

                SplatAcc& out = sa[r.splat];
                for (int ch = 0; ch < (image_pass ? 3 : 0); ++ch)
                    out.color[ch] += wgt * gc[ch];
                if (fa) {
                    double* f = fa + size_t(r.splat) * nc;
                    for (int ch = 0; ch < nc; ++ch) f[ch] += wgt * gc[ch];
                }
                if (image_pass) out.depth += g_draw * wgt;

                // The alpha clamp gates flow into opacity and falloff.
                if (r.alpha >= cfg.alpha_clamp) continue;
                const double falloff = r.alpha / s.opacity;
                out.op += g_alpha * falloff;
                const double g_power = g_alpha * s.opacity * falloff;
                const double dx = pcx - s.mean2d.x();
                const double dy = pcy - s.mean2d.y();
                const double adx = s.conic(0, 0) * dx + s.conic(0, 1) * dy;
                const double ady = s.conic(1, 0) * dx + s.conic(1, 1) * dy;
                out.mean_x += g_power * adx;
                out.mean_y += g_power * ady;
                out.conic00 += -0.5 * g_power * dx * dx;
                out.conic01 += -0.5 * g_power * dx * dy;
                out.conic11 += -0.5 * g_power * dy * dy;
            }
        }
    });

    // Fixed-order reduction keeps results identical across runs.
    for (size_t slot = 1; slot < slots; ++slot) {
        for (size_t si = 0; si < n_splats; ++si) {
            SplatAcc& d = acc[0][si];
            const SplatAcc& s = acc[slot][si];
            d.mean_x += s.mean_x;
            d.mean_y += s.mean_y;
            d.conic00 += s.conic00;
            d.conic01 += s.conic01;
            d.conic11 += s.conic11;
            for (int ch = 0; ch < 3; ++ch) d.color[ch] += s.color[ch];
            d.depth += s.depth;
            d.op += s.op;
        }
        if (!image_pass) {
            for (size_t j = 0; j < feat_acc[0].size(); ++j)
                feat_acc[0][j] += feat_acc[slot][j];
        }
    }

    parallel_chunks(n_splats, cfg.threads, [&](size_t sb, size_t se, size_t) {
        for (size_t si = sb; si < se; ++si) {
            const double* gfeat =
                image_pass ? nullptr : feat_acc[0].data() + si * nc;
            chain_splat(map, pose, intr, splats[si], acc[0][si], gfeat, image_pass, grads);
        }
    });
}

} // namespace

void GradientBuffer::resize(const GaussianMap& map) {
    const size_t n = map.size();
    mu.assign(n, Vec3::Zero());
    q.assign(n, Vec4::Zero());
    log_s.assign(n, Vec3::Zero());
    alpha_logit.assign(n, 0.0);
    sh.assign(n, {Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
    feat.assign(n, VecX::Zero(map.feat_dim));
    pos2d_ndc.assign(n, Vec2::Zero());
    visible.assign(n, 0);
}

void GradientBuffer::set_zero() {
    std::fill(mu.begin(), mu.end(), Vec3::Zero());
    std::fill(q.begin(), q.end(), Vec4::Zero());
    std::fill(log_s.begin(), log_s.end(), Vec3::Zero());
    std::fill(alpha_logit.begin(), alpha_logit.end(), 0.0);
    std::fill(sh.begin(), sh.end(),
              std::array<Vec3, kMaxShCoeffs>{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(), Vec3::Zero()});
    for (auto& f : feat) f.setZero();
    std::fill(pos2d_ndc.begin(), pos2d_ndc.end(), Vec2::Zero());
    std::fill(visible.begin(), visible.end(), 0);
}

long GradientBuffer::first_non_finite() const {
    for (size_t i = 0; i < mu.size(); ++i) {
        bool ok = mu[i].allFinite() && q[i].allFinite() && log_s[i].allFinite() &&
                  std::isfinite(alpha_logit[i]) && feat[i].allFinite();
        for (const Vec3& c : sh[i]) ok = ok && c.allFinite();
        if (!ok) return long(i);
    }
    return -1;
}

bool project(const Gaussian3D& g, const CameraPose& pose, const CameraIntrinsics& intr,
             int sh_degree, const RenderConfig& cfg, int source_index, Splat2D& out) {
    const Vec3 t = pose.to_camera(g.mu);
    if (t.z() <= cfg.near_clip) return false;

    // Frustum guard on the projected mean. The EWA Jacobian is linearized at
    // the mean, so splats far outside the view (grazing geometry beside the
    // camera) would otherwise blow up into image-wide smears.
    const double gx = cfg.frustum_margin * intr.width;
    const double gy = cfg.frustum_margin * intr.height;
    const double u0 = intr.fx * t.x() / t.z() + intr.cx;
    const double v0 = intr.fy * t.y() / t.z() + intr.cy;
    if (u0 < -gx || u0 > intr.width + gx || v0 < -gy || v0 > intr.height + gy) return false;

    const Mat23 T2 = proj_jacobian(t, intr) * pose.R;
    Mat2 cov = T2 * covariance(g) * T2.transpose();
    cov(0, 0) += cfg.dilation;
    cov(1, 1) += cfg.dilation;

    const double mid = 0.5 * (cov(0, 0) + cov(1, 1));
    const double disc = std::sqrt(std::max(
        0.25 * (cov(0, 0) - cov(1, 1)) * (cov(0, 0) - cov(1, 1)) + cov(0, 1) * cov(1, 0), 0.0));
    const double radius = cfg.coverage_sigma * std::sqrt(std::max(mid + disc, 0.0));

    const Vec2 mean(u0, v0);
    if (mean.x() < -radius || mean.x() > intr.width + radius ||
        mean.y() < -radius || mean.y() > intr.height + radius)
        return false;

    out.mean2d = mean;
    out.cov2d = cov;
    const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
    out.conic << cov(1, 1) / det, -cov(0, 1) / det, -cov(1, 0) / det, cov(0, 0) / det;
    out.depth = t.z();
    out.radius = radius;
    out.opacity = g.opacity();

    const Vec3 off = g.mu - pose.center();
    const double dist = off.norm();
    const Vec3 dir = dist > 0 ? Vec3(off / dist) : Vec3(0, 0, 1);
    out.color = sh_to_color(g, dir, sh_degree);
    out.feat = g.feat;
    out.source_index = source_index;
    return true;
}

double alpha_at(const Splat2D& s, const Vec2& p, const RenderConfig& cfg) {
    const Vec2 d = p - s.mean2d;
    const double maha = d.dot(s.conic * d);
    return std::min(s.opacity * std::exp(-0.5 * maha), cfg.alpha_clamp);
}

RenderOutput render(const GaussianMap& map, const ViewGeometry& geom, const RenderConfig& cfg) {
    return render_impl(map, geom, cfg, false);
}

RenderOutput render_naive(const GaussianMap& map, const ViewGeometry& geom,
                          const RenderConfig& cfg) {
    return render_impl(map, geom, cfg, true);
}

void render_backward(const GaussianMap& map, const ViewGeometry& geom,
                     const RenderOutput& out, const RenderGrads& upstream,
                     const RenderConfig& cfg, GradientBuffer& grads) {
    const int h = geom.intr.height, w = geom.intr.width;
    if (out.blend_rgb.offset.size() != size_t(h) * w)
        throw std::runtime_error("render_backward: forward pass required");
    const bool want_feat = !upstream.feat.empty();
    if (want_feat && out.blend_feat.empty())
        throw std::runtime_error("render_backward: forward pass required");

    if (!upstream.rgb.empty() && !(upstream.rgb.h == h && upstream.rgb.w == w && upstream.rgb.c == 3))
        throw std::runtime_error("render_backward: rgb gradient shape mismatch");
    if (!upstream.depth.empty() && !(upstream.depth.h == h && upstream.depth.w == w))
        throw std::runtime_error("render_backward: depth gradient shape mismatch");
    if (!upstream.opacity.empty() && !(upstream.opacity.h == h && upstream.opacity.w == w))
        throw std::runtime_error("render_backward: opacity gradient shape mismatch");
    if (want_feat && !(upstream.feat.h == out.feat.h && upstream.feat.w == out.feat.w &&
                       upstream.feat.c == map.feat_dim))
        throw std::runtime_error("render_backward: feature gradient shape mismatch");

    grads.resize(map);
    backward_pass(map, geom.pose, geom.intr, out.splats_rgb, out.blend_rgb, true, 3,
                  &upstream.rgb, &upstream.depth, &upstream.opacity, cfg, grads);
    if (want_feat) {
        const CameraIntrinsics fintr = geom.intr.scaled(geom.feat_w, geom.feat_h);
        backward_pass(map, geom.pose, fintr, out.splats_feat, out.blend_feat, false,
                      map.feat_dim, &upstream.feat, nullptr, nullptr, cfg, grads);
    }
}

} // namespace gsmap
