#include "gsmap/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gsmap/rng.hpp"

namespace gsmap {

namespace {

ViewGeometry frame_geometry(const Frame& f, bool with_feat) {
    ViewGeometry g;
    g.pose = f.pose;
    g.intr = f.intr;
    if (with_feat && !f.feat.empty()) {
        g.feat_h = f.feat.h;
        g.feat_w = f.feat.w;
    }
    return g;
}

// Shuffled epoch-by-epoch frame order.
class FrameSchedule {
public:
    FrameSchedule(size_t n, uint64_t seed) : rng_(seed), order_(n) {
        for (size_t i = 0; i < n; ++i) order_[i] = i;
        pos_ = n;  // force shuffle on first pull
    }
    size_t next() {
        if (pos_ >= order_.size()) {
            rng_.shuffle(order_);
            pos_ = 0;
        }
        return order_[pos_++];
    }

private:
    Rng rng_;
    std::vector<size_t> order_;
    size_t pos_ = 0;
};

void emit(const TrainConfig& cfg, const LossReport& r) {
    if (cfg.on_report) cfg.on_report(r);
}

void scale_plane(ImageD& plane, double s) {
    for (double& v : plane.data) v *= s;
}

} // namespace

std::string format_report(const LossReport& r) {
    char buf[256];
    std::snprintf(buf, sizeof(buf),
                  "step=%ld total=%.6g rgb=%.6g feat=%.6g depth=%.6g sky=%.6g gaussians=%zu",
                  r.step, r.total, r.rgb, r.feat, r.depth, r.sky, r.gaussians);
    return buf;
}

std::vector<ImageD> compute_residuals(const GaussianMap& map,
                                      const MultitraverseDataset& data,
                                      const RenderConfig& cfg) {
    std::vector<ImageD> residuals;
    residuals.reserve(data.frames.size());
    for (const Frame& f : data.frames) {
        if (f.feat.empty())
            throw std::runtime_error("compute_residuals: frame missing feature map");
        RenderOutput out = render(map, frame_geometry(f, true), cfg);
        ImageD residual;
        loss_feat_kl(out.feat, f.feat, nullptr, &residual);
        residuals.push_back(std::move(residual));
    }
    return residuals;
}

std::vector<ImageD> train_distill(GaussianMap& map, const MultitraverseDataset& data,
                                  const TrainConfig& cfg) {
    data.validate();
    if (map.empty()) throw std::runtime_error("train_distill: empty map");
    for (size_t i = 0; i < data.frames.size(); ++i)
        if (data.frames[i].feat.empty())
            throw std::runtime_error("train_distill: frame " + std::to_string(i) +
                                     " missing feature map");

    OptimizerState state;
    state.resize(map);
    GradientBuffer grads;
    FrameSchedule schedule(data.frames.size(), cfg.seed);

    std::vector<double> grad_accum(map.size(), 0.0);
    std::vector<long> seen(map.size(), 0);

    for (long step = 1; step <= cfg.steps; ++step) {
        const Frame& f = data.frames[schedule.next()];
        RenderOutput out = render(map, frame_geometry(f, true), cfg.render);

        RenderGrads up;
        LossReport rep;
        rep.step = step;
        rep.rgb = loss_rgb_l1(out.rgb, f.image, nullptr, &up.rgb);
        rep.feat = loss_feat_kl(out.feat, f.feat, &up.feat, nullptr);
        scale_plane(up.rgb, cfg.weights.rgb);
        scale_plane(up.feat, cfg.weights.feat);
        rep.total = cfg.weights.rgb * rep.rgb + cfg.weights.feat * rep.feat;

        render_backward(map, frame_geometry(f, true), out, up, cfg.render, grads);
        for (size_t i = 0; i < map.size(); ++i) {
            if (!grads.visible[i]) continue;
            grad_accum[i] += grads.pos2d_ndc[i].norm();
            seen[i] += 1;
        }

        adam_step(map, grads, state, cfg.adam, mu_lr_schedule(cfg.adam, step, cfg.steps));

        if (cfg.densify.interval > 0 && step % cfg.densify.interval == 0) {
            std::vector<double> mean_grad(map.size());
            for (size_t i = 0; i < map.size(); ++i)
                mean_grad[i] = seen[i] > 0 ? grad_accum[i] / double(seen[i]) : 0.0;
            densify_and_prune(map, state, mean_grad, cfg.densify);
            grad_accum.assign(map.size(), 0.0);
            seen.assign(map.size(), 0);
        }
        if (cfg.densify.opacity_reset_interval > 0 &&
            step % cfg.densify.opacity_reset_interval == 0 && step < cfg.steps) {
            reset_opacity(map, state, cfg.densify.opacity_reset_value);
        }

        rep.gaussians = map.size();
        if (step % std::max<long>(1, cfg.log_every) == 0 || step == cfg.steps)
            emit(cfg, rep);
    }

    return compute_residuals(map, data, cfg.render);
}

void train_env(GaussianMap& map, const MultitraverseDataset& data,
               const std::vector<MaskU8>& masks, const TrainConfig& cfg) {
    data.validate();
    if (map.empty()) throw std::runtime_error("train_env: empty map");
    if (masks.size() != data.frames.size())
        throw std::runtime_error("train_env: one mask per frame required");
    for (size_t i = 0; i < masks.size(); ++i) {
        if (masks[i].h != data.frames[i].image.h || masks[i].w != data.frames[i].image.w)
            throw std::runtime_error("train_env: mask size mismatch at frame " + std::to_string(i));
    }

    // Pixel weights: 1 on environment, 0 on ephemeral.
    std::vector<ImageD> weights(masks.size());
    for (size_t i = 0; i < masks.size(); ++i) {
        weights[i] = ImageD(masks[i].h, masks[i].w, 1);
        for (size_t j = 0; j < masks[i].data.size(); ++j)
            weights[i].data[j] = masks[i].data[j] ? 0.0 : 1.0;
    }

    OptimizerState state;
    state.resize(map);
    AdamConfig adam = cfg.adam;
    adam.lr_feat = 0.0;  // features frozen
    GradientBuffer grads;
    FrameSchedule schedule(data.frames.size(), cfg.seed);

    for (long step = 1; step <= cfg.steps; ++step) {
        const size_t fi = schedule.next();
        const Frame& f = data.frames[fi];
        RenderOutput out = render(map, frame_geometry(f, false), cfg.render);

        RenderGrads up;
        LossReport rep;
        rep.step = step;
        rep.rgb = loss_rgb_l1(out.rgb, f.image, &weights[fi], &up.rgb);
        scale_plane(up.rgb, cfg.weights.rgb);
        rep.total = cfg.weights.rgb * rep.rgb;

        if (cfg.use_depth_sky) {
            rep.depth = loss_depth_smooth(out.depth, f.image, &up.depth);
            scale_plane(up.depth, cfg.weights.depth);
            rep.total += cfg.weights.depth * rep.depth;
            if (!f.sky_mask.empty()) {
                rep.sky = loss_sky(out.opacity, f.sky_mask, &up.opacity);
                scale_plane(up.opacity, cfg.weights.sky);
                rep.total += cfg.weights.sky * rep.sky;
            }
        }

        render_backward(map, frame_geometry(f, false), out, up, cfg.render, grads);
        adam_step(map, grads, state, adam, mu_lr_schedule(adam, step, cfg.steps));

        if (cfg.densify.interval > 0 && step % cfg.densify.interval == 0)
            prune_transparent(map, state, cfg.densify.prune_opacity);

        rep.gaussians = map.size();
        if (step % std::max<long>(1, cfg.log_every) == 0 || step == cfg.steps)
            emit(cfg, rep);
    }
}

} // namespace gsmap
