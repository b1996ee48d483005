#include "gsmap/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gsmap/io.hpp"
#include "gsmap/metrics.hpp"

namespace gsmap {

namespace fs = std::filesystem;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string frame_file(const std::string& dir, const char* ext, size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "frame_%05zu%s", i, ext);
    return dir + "/" + buf;
}

MultitraverseDataset load_input(const PipelineConfig& cfg) {
    return load_dataset(cfg.dataset_dir, cfg.feat_dim);
}

TrainConfig train_config(const PipelineConfig& cfg, long steps, bool env_stage,
                         std::ostream* log, const char* tag, std::ofstream* file_log) {
    TrainConfig tc;
    tc.steps = steps;
    tc.seed = cfg.seed;
    tc.weights = cfg.weights;
    tc.adam = cfg.adam;
    tc.densify = cfg.densify;
    tc.render = cfg.render;
    tc.use_depth_sky = env_stage && cfg.use_depth_sky;
    tc.log_every = cfg.log_every;
    std::string prefix = tag;
    tc.on_report = [log, file_log, prefix](const LossReport& r) {
        const std::string line = prefix + " " + format_report(r);
        if (file_log && file_log->is_open()) *file_log << line << "\n";
        if (log) *log << line << std::endl;
    };
    return tc;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "1" || v == "true" || v == "on") return true;
    if (v == "0" || v == "false" || v == "off") return false;
    throw std::runtime_error("config: bad boolean for " + key + ": " + v);
}

} // namespace

void apply_option(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    auto d = [&] { return std::stod(value); };
    auto l = [&] { return std::stol(value); };
    if (key == "dataset_dir") cfg.dataset_dir = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "feat_dim") cfg.feat_dim = int(l());
    else if (key == "distill_steps") cfg.distill_steps = l();
    else if (key == "env_steps") cfg.env_steps = l();
    else if (key == "use_depth_sky") cfg.use_depth_sky = parse_bool(value, key);
    else if (key == "log_every") cfg.log_every = l();
    else if (key == "w_rgb") cfg.weights.rgb = d();
    else if (key == "w_feat") cfg.weights.feat = d();
    else if (key == "w_depth") cfg.weights.depth = d();
    else if (key == "w_sky") cfg.weights.sky = d();
    else if (key == "lr_mu") cfg.adam.lr_mu = d();
    else if (key == "lr_mu_final") cfg.adam.lr_mu_final = d();
    else if (key == "lr_q") cfg.adam.lr_q = d();
    else if (key == "lr_log_s") cfg.adam.lr_log_s = d();
    else if (key == "lr_alpha") cfg.adam.lr_alpha = d();
    else if (key == "lr_sh") cfg.adam.lr_sh = d();
    else if (key == "lr_feat") cfg.adam.lr_feat = d();
    else if (key == "densify_interval") cfg.densify.interval = int(l());
    else if (key == "densify_grad_threshold") cfg.densify.grad_threshold = d();
    else if (key == "scale_split_threshold") cfg.densify.scale_split_threshold = d();
    else if (key == "prune_opacity") cfg.densify.prune_opacity = d();
    else if (key == "opacity_reset_interval") cfg.densify.opacity_reset_interval = int(l());
    else if (key == "max_gaussians") cfg.densify.max_gaussians = size_t(l());
    else if (key == "coverage_sigma") cfg.render.coverage_sigma = d();
    else if (key == "threads") cfg.render.threads = int(l());
    else if (key == "background") {
        std::istringstream ss(value);
        std::string part;
        for (int i = 0; i < 3; ++i) {
            if (!std::getline(ss, part, ',')) throw std::runtime_error("config: background needs r,g,b");
            cfg.render.background[i] = std::stod(part);
        }
    }
    else if (key == "delta1") cfg.mining.delta1 = d();
    else if (key == "delta2") cfg.mining.delta2 = d();
    else if (key == "delta3") cfg.mining.delta3 = d();
    else if (key == "delta4") cfg.mining.delta4 = d();
    else if (key == "run_init") cfg.run_init = parse_bool(value, key);
    else if (key == "run_distill") cfg.run_distill = parse_bool(value, key);
    else if (key == "run_mine") cfg.run_mine = parse_bool(value, key);
    else if (key == "run_env") cfg.run_env = parse_bool(value, key);
    else if (key == "run_eval") cfg.run_eval = parse_bool(value, key);
    else throw std::runtime_error("config: unknown key " + key);
}

PipelineConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    PipelineConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t b = line.find_last_not_of(" \t\r");
        line = line.substr(a, b - a + 1);
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            size_t x = s.find_first_not_of(" \t");
            size_t y = s.find_last_not_of(" \t");
            s = x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        trim(key);
        trim(value);
        apply_option(cfg, key, value);
    }
    return cfg;
}

void stage_init(const PipelineConfig& cfg, std::ostream* log) {
    MultitraverseDataset ds = load_input(cfg);
    if (ds.seed_points.points.empty())
        throw std::runtime_error("init: dataset has no seed points");
    const int d = ds.frames[0].feat.empty() ? std::max(1, cfg.feat_dim) : ds.frames[0].feat.c;
    GaussianMap map = init_from_points(ds.seed_points.points, ds.seed_points.colors, d, 0);
    fs::create_directories(cfg.out_dir);
    save_gaussians(map, cfg.out_dir + "/init.ply");
    if (log) *log << "init: " << map.size() << " gaussians" << std::endl;
}

void stage_distill(const PipelineConfig& cfg, std::ostream* log) {
    MultitraverseDataset ds = load_input(cfg);
    GaussianMap map = load_gaussians(cfg.out_dir + "/init.ply");
    std::ofstream file_log(cfg.out_dir + "/distill.log");
    TrainConfig tc = train_config(cfg, cfg.distill_steps, false, log, "distill", &file_log);
    std::vector<ImageD> residuals = train_distill(map, ds, tc);
    save_gaussians(map, cfg.out_dir + "/distilled.ply");
    fs::create_directories(cfg.out_dir + "/residuals");
    for (size_t i = 0; i < residuals.size(); ++i)
        write_f32(frame_file(cfg.out_dir + "/residuals", ".f32", i), quantize_f32(residuals[i]));
    if (log) *log << "distill: " << map.size() << " gaussians" << std::endl;
}

void stage_mine(const PipelineConfig& cfg, std::ostream* log) {
    MultitraverseDataset ds = load_input(cfg);
    fs::create_directories(cfg.out_dir + "/masks");
    for (size_t i = 0; i < ds.frames.size(); ++i) {
        const ImageD residual = read_f32(frame_file(cfg.out_dir + "/residuals", ".f32", i));
        const MaskU8 mask =
            mine_mask(residual, ds.frames[i].image.h, ds.frames[i].image.w, cfg.mining);
        write_png(frame_file(cfg.out_dir + "/masks", ".png", i), mask);
    }
    if (log) *log << "mine: " << ds.frames.size() << " masks" << std::endl;
}

void stage_env(const PipelineConfig& cfg, std::ostream* log) {
    MultitraverseDataset ds = load_input(cfg);
    GaussianMap map = load_gaussians(cfg.out_dir + "/distilled.ply");
    std::vector<MaskU8> masks;
    masks.reserve(ds.frames.size());
    for (size_t i = 0; i < ds.frames.size(); ++i)
        masks.push_back(read_png_u8(frame_file(cfg.out_dir + "/masks", ".png", i)));
    std::ofstream file_log(cfg.out_dir + "/env.log");
    TrainConfig tc = train_config(cfg, cfg.env_steps, true, log, "env", &file_log);
    train_env(map, ds, masks, tc);
    save_gaussians(map, cfg.out_dir + "/environment.ply");
    if (log) *log << "env: " << map.size() << " gaussians" << std::endl;
}

void stage_eval(const PipelineConfig& cfg, std::ostream* log) {
    MultitraverseDataset ds = load_input(cfg);
    GaussianMap map = load_gaussians(cfg.out_dir + "/environment.ply");
    GroundTruthBundle gt;
    if (fs::exists(cfg.dataset_dir + "/gt/surface_samples.ply"))
        gt = load_ground_truth(cfg.dataset_dir);

    MetricReport iou_r{"iou", {}, false};
    MetricReport psnr_tr{"psnr_transient", {}, true};
    MetricReport psnr_env{"psnr_env", {}, true};
    MetricReport ssim_r{"ssim_env", {}, false};

    for (size_t i = 0; i < ds.frames.size(); ++i) {
        const Frame& f = ds.frames[i];
        ViewGeometry geom{f.pose, f.intr, 0, 0};
        RenderOutput out = render(map, geom, cfg.render);
        if (!gt.empty()) {
            const MaskU8 mask = read_png_u8(frame_file(cfg.out_dir + "/masks", ".png", i));
            iou_r.per_frame.push_back(iou(mask, gt.transient_masks[i]));
            // Transient regions judged against the environment behind them.
            MaskU8 keep_transient(mask.h, mask.w, 1);
            bool any = false;
            for (size_t p = 0; p < keep_transient.data.size(); ++p) {
                keep_transient.data[p] = gt.transient_masks[i].data[p] ? 0 : 255;
                any = any || gt.transient_masks[i].data[p];
            }
            if (any)
                psnr_tr.per_frame.push_back(psnr(out.rgb, gt.backgrounds[i], &keep_transient));
            psnr_env.per_frame.push_back(psnr(out.rgb, gt.backgrounds[i], &gt.transient_masks[i]));
            ssim_r.per_frame.push_back(ssim(out.rgb, gt.backgrounds[i]));
        }
    }

    std::ostringstream frames_csv;
    frames_csv << "frame,iou,psnr_env,ssim_env\n";
    for (size_t i = 0; i < iou_r.per_frame.size(); ++i)
        frames_csv << i << "," << g17(iou_r.per_frame[i]) << "," << g17(psnr_env.per_frame[i])
                   << "," << g17(ssim_r.per_frame[i]) << "\n";

    std::ostringstream csv;
    csv << "metric,value\n";
    csv << "gaussians," << map.size() << "\n";
    if (!gt.empty()) {
        csv << "iou," << g17(iou_r.aggregate()) << "\n";
        csv << "psnr_transient," << g17(psnr_tr.aggregate()) << "\n";
        csv << "psnr_env," << g17(psnr_env.aggregate()) << "\n";
        csv << "ssim_env," << g17(ssim_r.aggregate()) << "\n";
        std::vector<Vec3> centers;
        for (const Gaussian3D& g : map.gaussians)
            if (g.opacity() > 0.5) centers.push_back(g.mu);
        if (!centers.empty() && !gt.surface_samples.points.empty())
            csv << "chamfer," << g17(chamfer(centers, gt.surface_samples.points)) << "\n";
    }

    std::ofstream fcsv(cfg.out_dir + "/metrics_frames.csv");
    fcsv << frames_csv.str();
    std::ofstream mcsv(cfg.out_dir + "/metrics.csv");
    mcsv << csv.str();
    if (log) *log << "eval:\n" << csv.str() << std::flush;
}

void run_pipeline(const PipelineConfig& cfg, std::ostream* log) {
    if (cfg.out_dir.empty()) throw std::runtime_error("pipeline: out_dir not set");
    try {
        if (cfg.run_init) stage_init(cfg, log);
        if (cfg.run_distill) stage_distill(cfg, log);
        if (cfg.run_mine) stage_mine(cfg, log);
        if (cfg.run_env) stage_env(cfg, log);
        if (cfg.run_eval) stage_eval(cfg, log);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("pipeline: ") + e.what());
    }
}

} // namespace gsmap
