#pragma once

#include <span>
#include <vector>

#include "nerfocus/encoding.hpp"
#include "nerfocus/field.hpp"
#include "nerfocus/image.hpp"
#include "nerfocus/lens.hpp"
#include "nerfocus/rng.hpp"

namespace nerfocus {

struct Camera {
    Mat3 c2w_rot;  // camera-to-world; camera looks along -z, +x right, +y up
    Vec3 c2w_trans;
    int width = 0, height = 0;
    double focal_px = 0;
    double near = 0, far = 0;
    LensConfig lens;

    // Validates orthonormality (1e-6), 0 < near < far, and caps the field of
    // view at 120 degrees so depth-to-axis conversion stays well conditioned.
    static Camera make(const Mat3& rot, const Vec3& trans, int width, int height,
                       double focal_px, double near, double far,
                       const LensConfig& lens);

    // Receptive diameter of one pixel on the sensor: pitch * 2/sqrt(3).
    double pixel_receptive_diameter() const;
};

// Composite cone of a pixel: origin at the pixel center on the sensor plane,
// axis through the lens center, in world coordinates. `scale` is the
// p-training diameter multiplier k.
CompositeCone pixel_cone(const Camera& cam, int px, int py, double scale = 1);

// N depths, one per uniform bin over [near, far]: bin midpoints when rng is
// null (evaluation mode), one jittered sample per bin otherwise.
std::vector<double> stratified_depths(double near, double far, int n, Rng* rng);

// Inverse-CDF resampling of n sorted depths from the piecewise-constant PDF
// over [edges[0], edges.back()] proportional to the coarse weights after a
// 1-tap max-blur and a uniform floor of 0.01 per bin. rng == null uses CDF
// midpoints (deterministic). All-zero weights degrade to uniform sampling.
std::vector<double> importance_depths(std::span<const double> weights,
                                      std::span<const double> edges, int n,
                                      Rng* rng);

struct RenderSample {
    double sigma = 0;   // density per unit length along the cone axis
    Vec3 rgb;
    double delta = 0;   // axial extent of the frustum
    double z_mid = 0;   // depth used for the expectation
};

struct CompositeResult {
    Vec3 rgb;
    double depth = 0;    // weight-averaged depth
    double opacity = 0;  // sum of weights
    std::vector<double> weights;
};

// Volume compositing: w_i = T_i (1 - exp(-sigma_i delta_i)) with
// T_i = exp(-sum_{j<i} sigma_j delta_j); black background.
CompositeResult composite(std::span<const RenderSample> samples);

// Scalar-generic kernels shared by the double test path and the float
// training path. Colors are passed as three length-n column pointers.
template <typename Scalar>
struct CompositeOut {
    Scalar rgb[3] = {0, 0, 0};
    Scalar opacity = 0;
    double depth = 0;
    std::vector<Scalar> weights;
};

template <typename Scalar>
void composite_n(int n, const Scalar* sigma, const Scalar* cr, const Scalar* cg,
                 const Scalar* cb, const double* delta, const double* zmid,
                 CompositeOut<Scalar>& out) {
    out.weights.assign(n, Scalar(0));
    Scalar log_t = 0;  // running -sum sigma*delta
    Scalar rgb[3] = {0, 0, 0};
    Scalar wsum = 0;
    double zsum = 0;
    for (int i = 0; i < n; ++i) {
        Scalar sd = sigma[i] * Scalar(delta[i]);
        Scalar trans = std::exp(-log_t);
        Scalar alpha = Scalar(1) - std::exp(-sd);
        Scalar w = trans * alpha;
        out.weights[i] = w;
        rgb[0] += w * cr[i];
        rgb[1] += w * cg[i];
        rgb[2] += w * cb[i];
        wsum += w;
        zsum += double(w) * zmid[i];
        log_t += sd;
    }
    out.rgb[0] = rgb[0];
    out.rgb[1] = rgb[1];
    out.rgb[2] = rgb[2];
    out.opacity = wsum;
    out.depth = zsum / std::max(double(wsum), 1e-12);
}

// Adjoints of grad_rgb . composed_color with respect to per-sample density
// and color. Accumulates into dsigma / dcr / dcg / dcb (length n each).
template <typename Scalar>
void composite_backward_n(int n, const Scalar* sigma, const Scalar* cr,
                          const Scalar* cg, const Scalar* cb, const double* delta,
                          const Scalar grad_rgb[3], Scalar* dsigma, Scalar* dcr,
                          Scalar* dcg, Scalar* dcb) {
    // Recompute transmittances, then per-sample weights and the suffix sums
    // that carry the occlusion term of d/dsigma.
    std::vector<Scalar> w(n), gc(n), t_after(n);
    Scalar log_t = 0;
    for (int i = 0; i < n; ++i) {
        Scalar sd = sigma[i] * Scalar(delta[i]);
        Scalar trans = std::exp(-log_t);
        Scalar e = std::exp(-sd);
        w[i] = trans * (Scalar(1) - e);
        t_after[i] = trans * e;
        gc[i] = grad_rgb[0] * cr[i] + grad_rgb[1] * cg[i] + grad_rgb[2] * cb[i];
        log_t += sd;
    }
    Scalar suffix = 0;  // sum_{j>i} w_j (g . c_j)
    for (int i = n - 1; i >= 0; --i) {
        dsigma[i] += Scalar(delta[i]) * (t_after[i] * gc[i] - suffix);
        dcr[i] += w[i] * grad_rgb[0];
        dcg[i] += w[i] * grad_rgb[1];
        dcb[i] += w[i] * grad_rgb[2];
        suffix += w[i] * gc[i];
    }
}

// Field abstraction for the analytic-field harness and oracle comparisons.
class FrustumField {
 public:
    virtual ~FrustumField() = default;
    virtual FieldOutput eval(const FrustumGaussian& g, const Vec3& dir) const = 0;
};

struct RenderOptions {
    int n_coarse = 64;  // frustums per coarse pass
    int n_fine = 64;
    bool deterministic = true;  // bin midpoints / CDF midpoints
};

struct ConeRenderResult {
    Vec3 coarse_rgb, fine_rgb;
    double fine_depth = 0, fine_opacity = 0;
    std::vector<double> coarse_weights;
    std::vector<double> coarse_edges, fine_edges;
};

// Two-pass (coarse uniform + fine importance) rendering of one cone against
// an arbitrary frustum field. near/far are depths along the optical axis.
ConeRenderResult render_cone(const FrustumField& field, const CompositeCone& cone,
                             double near, double far, const RenderOptions& opts,
                             Rng* rng = nullptr);

// Batched MLP rendering of many cones (shared camera near/far). All pixels of
// render_image go through this path, so per-pixel and whole-image renders
// agree to float round-off (GEMM reduction order varies with batch shape).
std::vector<ConeRenderResult> render_cones_mlp(const FieldParams& params,
                                               std::span<const CompositeCone> cones,
                                               double near, double far,
                                               const RenderOptions& opts,
                                               Rng* rng = nullptr);

struct LensOverrides {
    double aperture = -1;  // < 0 keeps the camera value
    double focus = -1;
    double scale = 1;  // cone diameter multiplier k
};

Vec3 render_pixel(const Camera& cam, int px, int py, const FieldParams& params,
                  const LensOverrides& ov = {}, const RenderOptions& opts = {});

Image render_image(const Camera& cam, const FieldParams& params,
                   const LensOverrides& ov = {}, const RenderOptions& opts = {});

}  // namespace nerfocus
