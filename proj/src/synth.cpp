#include "gsmap/synth.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <stdexcept>

#include "gsmap/render.hpp"
#include "gsmap/rng.hpp"

namespace gsmap {

namespace {

// splitmix64 of a salted seed; decouples every random stream from the others
// so traversal content is independent of traversal count.
uint64_t mix(uint64_t seed, uint64_t salt) {
    uint64_t z = seed + salt * 0x9e3779b97f4a7c15ull + 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

Vec4 quat_about(const Vec3& axis, double angle) {
    Eigen::Quaterniond q(Eigen::AngleAxisd(angle, axis));
    return Vec4(q.w(), q.x(), q.y(), q.z());
}

double logit(double p) { return std::log(p / (1.0 - p)); }

Vec3 clamp01(Vec3 v) {
    for (int i = 0; i < 3; ++i) v[i] = std::min(1.0, std::max(0.0, v[i]));
    return v;
}

void set_albedo(Gaussian3D& g, const Vec3& albedo) {
    g.sh[0] = (clamp01(albedo) - Vec3::Constant(0.5)) / kShC0;
}

VecX noisy_embedding(int cls, const SceneSpec& spec, Rng& rng) {
    VecX f = class_embedding(cls, spec.feat_dim, spec.embed_scale);
    for (int i = 0; i < f.size(); ++i) f[i] += rng.normal(0.0, spec.feat_noise);
    return f;
}

void add_surface_gaussian(GaussianMap& map, const Vec3& mu, const Vec4& q, double tangent_sigma,
                          const Vec3& albedo, int cls, const SceneSpec& spec, Rng& rng) {
    Gaussian3D g;
    g.mu = mu;
    g.q = q;
    g.log_s = Vec3(std::log(tangent_sigma), std::log(tangent_sigma), std::log(0.02));
    g.alpha_logit = logit(0.95);
    set_albedo(g, albedo);
    g.feat = noisy_embedding(cls, spec, rng);
    map.gaussians.push_back(std::move(g));
}

double wall_height(const SceneSpec& spec, double z, int side) {
    double phase = side > 0 ? 1.7 : 0.4;
    double h = 2.1 + 1.2 * std::sin(0.33 * z + phase);
    return std::min(3.4, std::max(0.8, h));
}

GaussianMap build_environment(const SceneSpec& spec) {
    Rng rng(mix(spec.seed, 1));
    GaussianMap map;
    map.feat_dim = spec.feat_dim;
    map.sh_degree = 0;
    const double t_sigma = 0.5 * spec.cell;

    // Ground, material class 0. Local z maps to the world -y normal.
    const Vec4 q_ground = quat_about(Vec3::UnitX(), M_PI / 2.0);
    const Vec3 ground_base(0.45, 0.42, 0.38);
    const int nx = int(std::floor(2.0 * spec.ground_half_width / spec.cell));
    const int nz = int(std::floor((spec.z_max - spec.z_min) / spec.cell));
    for (int ix = 0; ix < nx; ++ix) {
        for (int iz = 0; iz < nz; ++iz) {
            const double x = -spec.ground_half_width + (ix + 0.5) * spec.cell;
            const double z = spec.z_min + (iz + 0.5) * spec.cell;
            const double checker = ((ix + iz) & 1) ? 0.05 : -0.05;
            Vec3 albedo = ground_base + Vec3::Constant(checker + 0.04 * std::sin(0.21 * z));
            for (int ch = 0; ch < 3; ++ch) albedo[ch] += rng.normal(0.0, 0.02);
            add_surface_gaussian(map, Vec3(x, 0.0, z), q_ground, t_sigma, albedo, 0, spec, rng);
        }
    }

    // Walls, material class 1. Local z maps to the world +-x normal.
    const Vec4 q_wall = quat_about(Vec3::UnitY(), M_PI / 2.0);
    const Vec3 wall_base(0.56, 0.50, 0.44);
    for (int side = -1; side <= 1; side += 2) {
        const double x = side * spec.street_half_width;
        for (int iz = 0; iz < nz; ++iz) {
            const double z = spec.z_min + (iz + 0.5) * spec.cell;
            const double h = wall_height(spec, z, side);
            for (int iy = 0; (iy + 0.5) * spec.cell < h; ++iy) {
                const double y = (iy + 0.5) * spec.cell;
                Vec3 albedo = wall_base + Vec3::Constant(0.05 * std::sin(1.9 * y) +
                                                         0.03 * std::sin(0.45 * z));
                for (int ch = 0; ch < 3; ++ch) albedo[ch] += rng.normal(0.0, 0.02);
                add_surface_gaussian(map, Vec3(x, y, z), q_wall, t_sigma, albedo, 1, spec, rng);
            }
        }
    }
    return map;
}

void append_cluster(GaussianMap& map, double x, double z, double size, int cls,
                    const SceneSpec& spec, Rng& rng) {
    const Vec3 center(x, 0.55 * size, z);
    const Vec3 base = cls == 2 ? Vec3(0.85, 0.16, 0.12) : Vec3(0.14, 0.22, 0.86);
    const int count = 14 + int(rng.index(6));
    for (int k = 0; k < count; ++k) {
        Gaussian3D g;
        Vec3 off(rng.normal(0.0, 0.33 * size), rng.normal(0.0, 0.26 * size),
                 rng.normal(0.0, 0.33 * size));
        g.mu = center + off;
        g.mu[1] = std::max(g.mu[1], 0.10);
        Vec4 q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
        if (q.norm() < 1e-9) q = Vec4(1, 0, 0, 0);
        g.q = q.normalized();
        const double base_log = std::log(0.26 * size);
        g.log_s = Vec3(base_log + rng.normal(0.0, 0.12), base_log + rng.normal(0.0, 0.12),
                       base_log + rng.normal(0.0, 0.12));
        g.alpha_logit = logit(0.97);
        Vec3 color = base;
        for (int ch = 0; ch < 3; ++ch) color[ch] += rng.normal(0.0, 0.05);
        set_albedo(g, color);
        g.feat = noisy_embedding(cls, spec, rng);
        map.gaussians.push_back(std::move(g));
    }
}

// Stratified placements along the street so transients spread over the path.
void place_clusters(GaussianMap& map, int count, const SceneSpec& spec, Rng& rng) {
    const double z0 = spec.path_z0 + 3.0;
    const double z1 = spec.z_max - 3.5;
    const double x_lo = 1.2;
    const double x_hi = spec.street_half_width - 1.8;
    if (z1 - z0 < 1.0 || x_hi <= x_lo)
        throw std::runtime_error("build_scene: transient placement region too small");
    const double seg = (z1 - z0) / double(count);
    for (int i = 0; i < count; ++i) {
        const double z = z0 + seg * (i + 0.15 + 0.7 * rng.uniform());
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const double x = sign * rng.uniform(x_lo, x_hi);
        const double size = rng.uniform(spec.transient_min_size, spec.transient_max_size);
        const int cls = 2 + int(rng.index(2));
        append_cluster(map, x, z, size, cls, spec, rng);
    }
}

void check_spec(const SceneSpec& spec) {
    if (spec.traversals < 1) throw std::runtime_error("SceneSpec: traversals must be >= 1");
    if (spec.width < 16 || spec.height < 16 || spec.feat_w < 8 || spec.feat_h < 8)
        throw std::runtime_error("SceneSpec: image or feature dims too small");
    if (spec.feat_dim < 1) throw std::runtime_error("SceneSpec: feat_dim must be >= 1");
    if (spec.cell <= 0.0) throw std::runtime_error("SceneSpec: cell must be positive");
    if (spec.min_transients < 0 || spec.max_transients < spec.min_transients)
        throw std::runtime_error("SceneSpec: bad transient count range");
}

} // namespace

VecX class_embedding(int cls, int d, double embed_scale) {
    VecX f = VecX::Zero(d);
    f[cls % d] = embed_scale;
    return f;
}

CameraIntrinsics scene_intrinsics(const SceneSpec& spec) {
    CameraIntrinsics intr;
    intr.width = spec.width;
    intr.height = spec.height;
    intr.fx = 0.5 * spec.width / std::tan(0.5 * spec.fov_deg * M_PI / 180.0);
    intr.fy = intr.fx;
    intr.cx = 0.5 * spec.width;
    intr.cy = 0.5 * spec.height;
    return intr;
}

CameraPose scene_base_pose(const SceneSpec& spec, int frame) {
    const int n = spec.frames_per_traversal;
    const double u = n <= 1 ? 0.0 : double(frame) / double(n - 1);
    const double z = spec.path_z0 + u * (spec.path_z1 - spec.path_z0);
    const Vec3 center(spec.sway * std::sin(0.18 * z), spec.cam_height, z);

    // Camera x right (world -x), y down, z forward (world +z), then pitched
    // toward the ground.
    Mat3 r0;
    r0 << -1, 0, 0, 0, -1, 0, 0, 0, 1;
    const double phi = spec.pitch_deg * M_PI / 180.0;
    Mat3 pitch;
    pitch << 1, 0, 0, 0, std::cos(phi), -std::sin(phi), 0, std::sin(phi), std::cos(phi);
    CameraPose pose;
    pose.R = pitch * r0;
    pose.t = -pose.R * center;
    return pose;
}

SceneBuild build_scene(const SceneSpec& spec) {
    check_spec(spec);
    SceneBuild out;
    out.environment = build_environment(spec);

    GaussianMap statics;
    statics.feat_dim = spec.feat_dim;
    statics.sh_degree = 0;
    if (spec.static_transients > 0) {
        Rng rng(mix(spec.seed, 50));
        place_clusters(statics, spec.static_transients, spec, rng);
    }

    out.transients.reserve(size_t(spec.traversals));
    for (int t = 0; t < spec.traversals; ++t) {
        Rng rng(mix(spec.seed, 100 + uint64_t(t)));
        GaussianMap m;
        m.feat_dim = spec.feat_dim;
        m.sh_degree = 0;
        const int span = spec.max_transients - spec.min_transients + 1;
        const int count = spec.min_transients + int(rng.index(uint64_t(span)));
        if (count > 0) place_clusters(m, count, spec, rng);
        for (const Gaussian3D& g : statics.gaussians) m.gaussians.push_back(g);
        out.transients.push_back(std::move(m));
    }
    return out;
}

std::pair<MultitraverseDataset, GroundTruthBundle> generate_dataset(const SceneSpec& spec) {
    SceneBuild scene = build_scene(spec);
    const CameraIntrinsics intr = scene_intrinsics(spec);

    MultitraverseDataset ds;
    ds.traversal_count = spec.traversals;
    GroundTruthBundle gt;

    RenderConfig rc;
    rc.background = spec.sky;

    for (int t = 0; t < spec.traversals; ++t) {
        GaussianMap merged = scene.environment;
        for (const Gaussian3D& g : scene.transients[size_t(t)].gaussians)
            merged.gaussians.push_back(g);

        Rng pose_rng(mix(spec.seed, 10000 + uint64_t(t)));
        Rng photo_rng(mix(spec.seed, 20000 + uint64_t(t)));
        const double factor = 1.0 + spec.photometric * photo_rng.uniform(-1.0, 1.0);

        // Per-traversal feature drift, the feature-space analog of the
        // photometric factor: a real extractor shifts with capture conditions,
        // so consensus targets carry a small irreducible residual floor.
        Rng drift_rng(mix(spec.seed, 30000 + uint64_t(t)));
        std::vector<double> drift(size_t(spec.feat_dim));
        for (double& v : drift) v = drift_rng.normal(0.0, spec.feat_drift);

        for (int j = 0; j < spec.frames_per_traversal; ++j) {
            CameraPose pose = scene_base_pose(spec, j);
            const Vec3 center = pose.center() + Vec3(pose_rng.normal(0.0, spec.jitter_t),
                                                     pose_rng.normal(0.0, spec.jitter_t),
                                                     pose_rng.normal(0.0, spec.jitter_t));
            Vec3 axis(pose_rng.normal(), pose_rng.normal(), pose_rng.normal());
            if (axis.norm() < 1e-9) axis = Vec3::UnitY();
            const double angle = pose_rng.normal(0.0, spec.jitter_r_deg * M_PI / 180.0);
            pose.R = pose.R * Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
            pose.t = -pose.R * center;

            ViewGeometry geom{pose, intr, spec.feat_h, spec.feat_w};
            ViewGeometry geom_rgb{pose, intr, 0, 0};
            RenderOutput full = render(merged, geom, rc);
            RenderOutput env = render(scene.environment, geom_rgb, rc);

            MaskU8 tmask(spec.height, spec.width, 1);
            if (!scene.transients[size_t(t)].empty()) {
                RenderOutput tr = render(scene.transients[size_t(t)], geom_rgb, rc);
                for (size_t i = 0; i < tmask.data.size(); ++i)
                    tmask.data[i] = tr.opacity.data[i] > 0.5 ? 255 : 0;
            }
            MaskU8 sky(spec.height, spec.width, 1);
            for (size_t i = 0; i < sky.data.size(); ++i)
                sky.data[i] = full.opacity.data[i] < 0.05 ? 255 : 0;

            ImageD image = full.rgb;
            ImageD background = env.rgb;
            for (double& v : image.data) v = std::min(1.0, std::max(0.0, v * factor));
            for (double& v : background.data) v = std::min(1.0, std::max(0.0, v * factor));
            image = quantize_image(image);
            background = quantize_image(background);
            // Transients are deleted only where they dominate, so background
            // equals the captured image everywhere the mask is false.
            for (int y = 0; y < spec.height; ++y)
                for (int x = 0; x < spec.width; ++x)
                    if (!tmask.at(y, x, 0))
                        for (int ch = 0; ch < 3; ++ch)
                            background.at(y, x, ch) = image.at(y, x, ch);

            Frame frame;
            frame.image = std::move(image);
            // Drift scales with coverage: the extractor responds to scene
            // content, so empty sky keeps its featureless embedding.
            ImageD feat = full.feat;
            for (int y = 0; y < spec.feat_h; ++y) {
                const int ys = ((2 * y + 1) * spec.height) / (2 * spec.feat_h);
                for (int x = 0; x < spec.feat_w; ++x) {
                    const int xs = ((2 * x + 1) * spec.width) / (2 * spec.feat_w);
                    const double w = full.opacity.at(ys, xs, 0);
                    for (int c = 0; c < spec.feat_dim; ++c)
                        feat.at(y, x, c) += w * drift[size_t(c)];
                }
            }
            frame.feat = quantize_f32(feat);
            frame.pose = pose;
            frame.intr = intr;
            frame.traversal = t;
            frame.sky_mask = sky;
            ds.frames.push_back(std::move(frame));

            gt.transient_masks.push_back(std::move(tmask));
            gt.depths.push_back(quantize_f32(full.depth));
            gt.backgrounds.push_back(std::move(background));
            gt.sky_masks.push_back(std::move(sky));
        }
    }

    Rng point_rng(mix(spec.seed, 3));
    const std::vector<Gaussian3D>& env_g = scene.environment.gaussians;
    for (size_t i = 0; i < env_g.size(); i += size_t(spec.surface_sample_stride))
        gt.surface_samples.points.push_back(env_g[i].mu);
    for (size_t i = 0; i < env_g.size(); i += size_t(spec.seed_point_stride)) {
        Vec3 p = env_g[i].mu + Vec3(point_rng.normal(0.0, spec.seed_noise),
                                    point_rng.normal(0.0, spec.seed_noise),
                                    point_rng.normal(0.0, spec.seed_noise));
        ds.seed_points.points.push_back(p);
        ds.seed_points.colors.push_back(clamp01(kShC0 * env_g[i].sh[0] + Vec3::Constant(0.5)));
    }
    gt.seed_points = ds.seed_points;
    return {std::move(ds), std::move(gt)};
}

} // namespace gsmap
