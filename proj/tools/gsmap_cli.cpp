#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gsmap/ablation.hpp"
#include "gsmap/io.hpp"
#include "gsmap/pipeline.hpp"
#include "gsmap/plot.hpp"
#include "gsmap/render.hpp"
#include "gsmap/synth.hpp"

namespace {

struct StageArgs {
    std::string config;
    std::string dataset;
    std::string out;
    std::vector<std::string> sets;
};

void add_stage_options(CLI::App* cmd, StageArgs& args) {
    cmd->add_option("--config", args.config, "key=value config file");
    cmd->add_option("--dataset", args.dataset, "dataset directory");
    cmd->add_option("--out", args.out, "output directory");
    cmd->add_option("--set", args.sets, "config override key=value (repeatable)");
}

gsmap::PipelineConfig build_config(const StageArgs& args) {
    gsmap::PipelineConfig cfg;
    if (!args.config.empty()) cfg = gsmap::config_from_file(args.config);
    if (!args.dataset.empty()) cfg.dataset_dir = args.dataset;
    if (!args.out.empty()) cfg.out_dir = args.out;
    for (const std::string& kv : args.sets) {
        const size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("--set expects key=value, got: " + kv);
        gsmap::apply_option(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (cfg.dataset_dir.empty()) throw std::runtime_error("dataset directory not set");
    if (cfg.out_dir.empty()) throw std::runtime_error("output directory not set");
    return cfg;
}

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> values;
    std::istringstream ss(csv);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty()) continue;
        values.push_back(std::stod(part));
    }
    return values;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D Gaussian mapping over multitraverse captures"};
    app.require_subcommand(1);

    // synth: generate a procedural multitraverse benchmark dataset.
    gsmap::SceneSpec spec;
    std::string synth_out;
    bool synth_no_gt = false;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
    synth->add_option("--out", synth_out, "dataset directory")->required();
    synth->add_option("--seed", spec.seed, "scene seed")->required();
    synth->add_option("--traversals", spec.traversals, "traversal count");
    synth->add_option("--frames", spec.frames_per_traversal, "frames per traversal");
    synth->add_option("--width", spec.width, "image width");
    synth->add_option("--height", spec.height, "image height");
    synth->add_option("--feat-width", spec.feat_w, "feature map width");
    synth->add_option("--feat-height", spec.feat_h, "feature map height");
    synth->add_option("--feat-dim", spec.feat_dim, "feature channels");
    synth->add_option("--min-transients", spec.min_transients, "min clusters per traversal");
    synth->add_option("--max-transients", spec.max_transients, "max clusters per traversal");
    synth->add_option("--static-transients", spec.static_transients,
                      "clusters repeated in every traversal");
    synth->add_option("--transient-min-size", spec.transient_min_size, "cluster extent lower bound");
    synth->add_option("--transient-max-size", spec.transient_max_size, "cluster extent upper bound");
    synth->add_option("--photometric", spec.photometric, "per-traversal brightness jitter");
    synth->add_option("--feat-drift", spec.feat_drift, "per-traversal feature shift sigma");
    synth->add_flag("--no-gt", synth_no_gt, "skip the ground-truth mirror");
    synth->callback([&] {
        auto [ds, gt] = gsmap::generate_dataset(spec);
        gsmap::write_dataset(ds, synth_out, synth_no_gt ? nullptr : &gt);
        std::cout << "wrote " << ds.frames.size() << " frames over " << ds.traversal_count
                  << " traversals to " << synth_out << "\n";
    });

    // Pipeline stages.
    StageArgs run_args, init_args, distill_args, mine_args, env_args, eval_args;
    CLI::App* run = app.add_subcommand("run", "run the enabled pipeline stages");
    add_stage_options(run, run_args);
    run->callback([&] { gsmap::run_pipeline(build_config(run_args), &std::cout); });

    CLI::App* init = app.add_subcommand("init", "seed a map from the dataset point cloud");
    add_stage_options(init, init_args);
    init->callback([&] { gsmap::stage_init(build_config(init_args), &std::cout); });

    CLI::App* distill = app.add_subcommand("distill", "joint photometric and feature training");
    add_stage_options(distill, distill_args);
    distill->callback([&] { gsmap::stage_distill(build_config(distill_args), &std::cout); });

    CLI::App* mine = app.add_subcommand("mine", "mine ephemerality masks from residuals");
    add_stage_options(mine, mine_args);
    mine->callback([&] { gsmap::stage_mine(build_config(mine_args), &std::cout); });

    CLI::App* env = app.add_subcommand("env", "masked environment refinement");
    add_stage_options(env, env_args);
    env->callback([&] { gsmap::stage_env(build_config(env_args), &std::cout); });

    CLI::App* eval = app.add_subcommand("eval", "score artifacts against ground truth");
    add_stage_options(eval, eval_args);
    eval->callback([&] { gsmap::stage_eval(build_config(eval_args), &std::cout); });

    // render: one frame of a saved map.
    std::string render_map, render_dataset, render_out, render_depth_out;
    int render_frame = 0, render_threads = 0;
    CLI::App* render_cmd = app.add_subcommand("render", "render a map at a dataset pose");
    render_cmd->add_option("--map", render_map, "gaussian map .ply")->required();
    render_cmd->add_option("--dataset", render_dataset, "dataset directory")->required();
    render_cmd->add_option("--frame", render_frame, "frame index");
    render_cmd->add_option("--out", render_out, "output PNG")->required();
    render_cmd->add_option("--depth-out", render_depth_out, "optional depth .f32");
    render_cmd->add_option("--threads", render_threads, "render workers, 0 = hardware");
    render_cmd->callback([&] {
        const gsmap::MultitraverseDataset ds = gsmap::load_dataset(render_dataset, 0);
        const gsmap::GaussianMap map = gsmap::load_gaussians(render_map);
        const gsmap::Frame& f = ds.frames.at(size_t(render_frame));
        gsmap::RenderConfig rc;
        rc.threads = render_threads;
        const gsmap::ViewGeometry geom{f.pose, f.intr, 0, 0};
        const gsmap::RenderOutput out = gsmap::render(map, geom, rc);
        gsmap::write_png(render_out, out.rgb);
        if (!render_depth_out.empty()) gsmap::write_f32(render_depth_out, out.depth);
        std::cout << "rendered frame " << render_frame << " to " << render_out << "\n";
    });

    // ablate: sweep one benchmark knob and chart held-out mask quality.
    gsmap::AblationConfig ab;
    ab.scene.traversals = 4;
    ab.scene.frames_per_traversal = 30;
    ab.train.steps = 1200;
    std::string ab_axis = "traversals", ab_values = "1,2,3", ab_out;
    CLI::App* ablate = app.add_subcommand("ablate", "sweep a benchmark knob");
    ablate->add_option("--axis", ab_axis, "traversals | feat_dim | feat_res");
    ablate->add_option("--values", ab_values, "comma separated axis values");
    ablate->add_option("--out", ab_out, "output directory")->required();
    ablate->add_option("--seed", ab.scene.seed, "scene seed");
    ablate->add_option("--traversals", ab.scene.traversals, "base traversal count");
    ablate->add_option("--frames", ab.scene.frames_per_traversal, "frames per traversal");
    ablate->add_option("--steps", ab.train.steps, "distillation steps per run");
    ablate->add_option("--threads", ab.train.render.threads, "render workers");
    ablate->callback([&] {
        ab.axis = gsmap::ablation_axis_from_name(ab_axis);
        ab.values = parse_values(ab_values);
        const std::vector<gsmap::AblationRow> rows = gsmap::run_ablation(ab, &std::cout);
        std::filesystem::create_directories(ab_out);
        const std::string stem = ab_out + "/ablation_" + ab_axis;
        gsmap::write_ablation_csv(rows, ab.axis, stem + ".csv");
        std::vector<double> xs, ys;
        for (const gsmap::AblationRow& r : rows) {
            xs.push_back(r.value);
            ys.push_back(r.iou);
        }
        gsmap::plot_curve(xs, ys, stem + ".png");
        std::cout << "wrote " << stem << ".csv and .png\n";
    });

    // plot: chart two columns of a CSV.
    std::string plot_csv, plot_out;
    int plot_xcol = 1, plot_ycol = 2;
    CLI::App* plot = app.add_subcommand("plot", "line chart from a CSV");
    plot->add_option("--csv", plot_csv, "input CSV with a header row")->required();
    plot->add_option("--out", plot_out, "output PNG")->required();
    plot->add_option("--xcol", plot_xcol, "x column index, 0 based");
    plot->add_option("--ycol", plot_ycol, "y column index, 0 based");
    plot->callback([&] {
        std::ifstream in(plot_csv);
        if (!in) throw std::runtime_error("cannot open " + plot_csv);
        std::string line;
        std::getline(in, line); // header
        std::vector<double> xs, ys;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            std::vector<std::string> cols;
            std::istringstream ss(line);
            std::string part;
            while (std::getline(ss, part, ',')) cols.push_back(part);
            if (plot_xcol >= int(cols.size()) || plot_ycol >= int(cols.size()))
                throw std::runtime_error("column out of range in " + plot_csv);
            xs.push_back(std::stod(cols[size_t(plot_xcol)]));
            ys.push_back(std::stod(cols[size_t(plot_ycol)]));
        }
        gsmap::plot_curve(xs, ys, plot_out);
        std::cout << "wrote " << plot_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
