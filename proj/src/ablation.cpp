#include "gsmap/ablation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "gsmap/metrics.hpp"

namespace gsmap {

namespace {

long residual_file_bytes(int h, int w) { return 16 + long(h) * w * 4; }

std::vector<int> iota_ids(int first, int count) {
    std::vector<int> ids(static_cast<size_t>(count));
    std::iota(ids.begin(), ids.end(), first);
    return ids;
}

} // namespace

std::string ablation_axis_name(AblationAxis axis) {
    switch (axis) {
        case AblationAxis::traversals: return "traversals";
        case AblationAxis::feat_dim: return "feat_dim";
        case AblationAxis::feat_res: return "feat_res";
    }
    throw std::runtime_error("ablation: bad axis");
}

AblationAxis ablation_axis_from_name(const std::string& name) {
    if (name == "traversals") return AblationAxis::traversals;
    if (name == "feat_dim") return AblationAxis::feat_dim;
    if (name == "feat_res") return AblationAxis::feat_res;
    throw std::runtime_error("ablation: unknown axis " + name);
}

double heldout_iou(const MultitraverseDataset& ds, const GroundTruthBundle& gt,
                   const std::vector<int>& train_ids, const TrainConfig& cfg,
                   const MiningConfig& mining) {
    if (gt.empty()) throw std::runtime_error("heldout_iou: ground truth required");
    MultitraverseDataset train_ds = ds.subset(train_ids);
    const int d = ds.frames.at(0).feat.c;
    GaussianMap map = init_from_points(ds.seed_points.points, ds.seed_points.colors, d, 0);
    train_distill(map, train_ds, cfg);

    MultitraverseDataset eval_ds = ds.subset({0});
    std::vector<ImageD> residuals = compute_residuals(map, eval_ds, cfg.render);

    double sum = 0;
    size_t n = 0;
    size_t eval_i = 0;
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        if (ds.frames[i].traversal != 0) continue;
        const Frame& f = eval_ds.frames.at(eval_i);
        const MaskU8 mask = mine_mask(residuals.at(eval_i), f.image.h, f.image.w, mining);
        sum += iou(mask, gt.transient_masks.at(i));
        ++n;
        ++eval_i;
    }
    if (n == 0) throw std::runtime_error("heldout_iou: no held-out frames");
    return sum / double(n);
}

std::vector<AblationRow> run_ablation(const AblationConfig& cfg, std::ostream* log) {
    if (cfg.values.empty()) throw std::runtime_error("ablation: no values");
    if (cfg.scene.traversals < 2)
        throw std::runtime_error("ablation: scene needs a held-out traversal plus training data");

    using clock = std::chrono::steady_clock;
    std::vector<AblationRow> rows;

    auto run_one = [&](double value, const MultitraverseDataset& ds,
                       const GroundTruthBundle& gt, const std::vector<int>& train_ids) {
        const auto t0 = clock::now();
        AblationRow row;
        row.value = value;
        row.iou = heldout_iou(ds, gt, train_ids, cfg.train, cfg.mining);
        row.runtime_sec = std::chrono::duration<double>(clock::now() - t0).count();
        const Frame& f = ds.frames.at(0);
        const long per_frame = residual_file_bytes(f.feat.h, f.feat.w);
        long train_frames = 0;
        for (const Frame& fr : ds.frames)
            if (std::find(train_ids.begin(), train_ids.end(), fr.traversal) != train_ids.end())
                ++train_frames;
        row.residual_bytes = per_frame * train_frames;
        rows.push_back(row);
        if (log)
            *log << "ablation " << ablation_axis_name(cfg.axis) << "=" << value
                 << " iou=" << row.iou << " runtime=" << row.runtime_sec << "s" << std::endl;
    };

    if (cfg.axis == AblationAxis::traversals) {
        int max_t = 0;
        for (double v : cfg.values) {
            if (v < 1 || v != std::floor(v))
                throw std::runtime_error("ablation: traversal counts must be positive integers");
            max_t = std::max(max_t, int(v));
        }
        SceneSpec spec = cfg.scene;
        spec.traversals = max_t + 1;
        auto [ds, gt] = generate_dataset(spec);
        for (double v : cfg.values) run_one(v, ds, gt, iota_ids(1, int(v)));
        return rows;
    }

    for (double v : cfg.values) {
        SceneSpec spec = cfg.scene;
        if (cfg.axis == AblationAxis::feat_dim) {
            if (v < 1 || v != std::floor(v))
                throw std::runtime_error("ablation: feature dimensions must be positive integers");
            spec.feat_dim = int(v);
        } else {
            if (v < 4 || v != std::floor(v))
                throw std::runtime_error("ablation: feature widths must be integers of at least 4");
            spec.feat_w = int(v);
            spec.feat_h = std::max(1, int(std::lround(v * double(cfg.scene.feat_h) /
                                                      double(cfg.scene.feat_w))));
        }
        auto [ds, gt] = generate_dataset(spec);
        run_one(v, ds, gt, iota_ids(1, spec.traversals - 1));
    }
    return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, AblationAxis axis,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("ablation: cannot open " + path);
    out << "axis,value,iou,runtime_sec,residual_bytes\n";
    char buf[96];
    for (const AblationRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.6f,%ld", r.value, r.iou, r.runtime_sec,
                      r.residual_bytes);
        out << ablation_axis_name(axis) << "," << buf << "\n";
    }
}

} // namespace gsmap
