#pragma once

// Differentiable splat rasterizer: EWA projection of 3D Gaussians, front to
// back alpha blending over 16x16 tiles, and an analytic backward pass. A
// naive per-pixel reference path without thresholds backs the tests.

#include <array>
#include <vector>

#include "gsmap/camera.hpp"
#include "gsmap/gaussian.hpp"
#include "gsmap/image.hpp"

namespace gsmap {

struct RenderConfig {
    double near_clip = 0.05;          // camera-frame z at or below this is culled
    double dilation = 0.3;            // variance floor added to cov2d diagonal, px^2
    double alpha_clamp = 0.99;
    double alpha_skip = 1.0 / 255.0;  // tiled path skips fainter contributions
    double min_transmittance = 1e-4;  // tiled path stops a pixel below this
    double coverage_sigma = 3.0;      // splats are evaluated within this extent
    double frustum_margin = 0.3;      // mean may project this far outside, image fractions
    int tile_size = 16;
    Vec3 background = Vec3::Zero();
    int threads = 0;                  // 0 = hardware default
};

// One render target: pose, image-resolution intrinsics, and the feature
// buffer grid. feat_h = feat_w = 0 disables the feature pass.
struct ViewGeometry {
    CameraPose pose;
    CameraIntrinsics intr;
    int feat_h = 0, feat_w = 0;
};

struct Splat2D {
    Vec2 mean2d = Vec2::Zero();
    Mat2 cov2d = Mat2::Zero();
    Mat2 conic = Mat2::Zero();  // inverse of cov2d
    double depth = 0;           // camera-frame z
    double radius = 0;          // 3 sigma extent in pixels
    Vec3 color = Vec3::Zero();
    VecX feat;
    double opacity = 0;
    int source_index = -1;
};

struct BlendRecord {
    int32_t splat;         // into the pass splat array
    double alpha;          // contribution, after the alpha clamp
    double transmittance;  // before this contribution
};

// Pixel-major blend records for one pass; offset/count index per pixel.
struct BlendBuffer {
    std::vector<BlendRecord> records;
    std::vector<uint32_t> offset;
    std::vector<uint32_t> count;
    std::vector<double> final_t;

    bool empty() const { return offset.empty(); }
};

struct RenderOutput {
    ImageD rgb;      // h x w x 3
    ImageD depth;    // h x w, blend-weight normalized
    ImageD opacity;  // h x w, sum of blend weights
    ImageD feat;     // feat_h x feat_w x d, empty when the pass is disabled
    std::vector<Splat2D> splats_rgb, splats_feat;
    BlendBuffer blend_rgb, blend_feat;
};

// Upstream d(loss)/d(buffer); an empty plane means zero.
struct RenderGrads {
    ImageD rgb, depth, opacity, feat;
};

struct GradientBuffer {
    std::vector<Vec3> mu;
    std::vector<Vec4> q;
    std::vector<Vec3> log_s;
    std::vector<double> alpha_logit;
    std::vector<std::array<Vec3, kMaxShCoeffs>> sh;
    std::vector<VecX> feat;
    std::vector<Vec2> pos2d_ndc;    // screen-space mean gradient in ndc units
    std::vector<uint8_t> visible;   // splatted into at least one pass

    void resize(const GaussianMap& map);
    void set_zero();
    // Index of the first gaussian with a non-finite gradient, or -1.
    long first_non_finite() const;
};

// EWA projection of one Gaussian. Returns false when culled by the near
// plane or by the image bounds expanded by the 3 sigma radius.
bool project(const Gaussian3D& g, const CameraPose& pose, const CameraIntrinsics& intr,
             int sh_degree, const RenderConfig& cfg, int source_index, Splat2D& out);

// Gaussian falloff alpha at a pixel center, clamped to alpha_clamp.
double alpha_at(const Splat2D& s, const Vec2& p, const RenderConfig& cfg);

// Tiled forward render. Throws std::runtime_error on an empty map.
RenderOutput render(const GaussianMap& map, const ViewGeometry& geom,
                    const RenderConfig& cfg = {});

// Reference forward path: global depth sort, every pixel visits every splat
// within its 3 sigma ellipse, no skip threshold, no early termination.
RenderOutput render_naive(const GaussianMap& map, const ViewGeometry& geom,
                          const RenderConfig& cfg = {});

// Analytic gradients of the upstream-weighted outputs with respect to every
// Gaussian parameter. Requires the blend records produced by render; throws
// std::runtime_error("forward pass required") when they are missing.
void render_backward(const GaussianMap& map, const ViewGeometry& geom,
                     const RenderOutput& out, const RenderGrads& upstream,
                     const RenderConfig& cfg, GradientBuffer& grads);

} // namespace gsmap
