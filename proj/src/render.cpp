#include "nerfocus/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "nerfocus/pipeline.hpp"

namespace nerfocus {

Camera Camera::make(const Mat3& rot, const Vec3& trans, int width, int height,
                    double focal_px, double near, double far,
                    const LensConfig& lens) {
    if (rot.orthonormality_error() > 1e-6)
        throw std::invalid_argument("Camera: rotation is not orthonormal");
    if (!(near > 0 && near < far))
        throw std::invalid_argument("Camera: need 0 < near < far");
    if (width <= 0 || height <= 0 || focal_px <= 0)
        throw std::invalid_argument("Camera: bad intrinsics");
    // Field-of-view cap: the corner ray must stay within 60 degrees of the
    // optical axis so that depth-to-axis conversion is well conditioned.
    double cu = 0.5 * width / focal_px;
    double cv = 0.5 * height / focal_px;
    double corner_cos = 1.0 / std::sqrt(1.0 + cu * cu + cv * cv);
    if (corner_cos < 0.5)
        throw std::invalid_argument("Camera: field of view exceeds 120 degrees");
    Camera cam;
    cam.c2w_rot = rot;
    cam.c2w_trans = trans;
    cam.width = width;
    cam.height = height;
    cam.focal_px = focal_px;
    cam.near = near;
    cam.far = far;
    cam.lens = lens;
    return cam;
}

double Camera::pixel_receptive_diameter() const {
    return lens.image_dist / focal_px * (2.0 / std::sqrt(3.0));
}

CompositeCone pixel_cone(const Camera& cam, int px, int py, double scale) {
    if (px < 0 || px >= cam.width || py < 0 || py >= cam.height)
        throw std::out_of_range("pixel_cone: pixel outside image bounds");
    double u = (px + 0.5) - 0.5 * cam.width;
    double v = (py + 0.5) - 0.5 * cam.height;
    // Camera space: looks along -z, +x right, +y up; image rows grow downward.
    Vec3 dir_cam{u / cam.focal_px, -v / cam.focal_px, -1.0};
    double inv_norm = 1.0 / dir_cam.norm();
    double cos_axis = inv_norm;  // |z| component of the unit axis
    Vec3 axis = (cam.c2w_rot * dir_cam) * inv_norm;
    Vec3 lens_center = cam.c2w_trans;
    Vec3 sensor_origin = lens_center - axis * (cam.lens.image_dist / cos_axis);
    LensConfig lens = cam.lens;
    lens.pixel_diameter = cam.pixel_receptive_diameter();
    return CompositeCone(sensor_origin, lens_center, axis, cos_axis, lens, scale);
}

std::vector<double> stratified_depths(double near, double far, int n, Rng* rng) {
    if (n < 1) throw std::invalid_argument("stratified_depths: n must be >= 1");
    std::vector<double> out(n);
    double step = (far - near) / n;
    for (int i = 0; i < n; ++i) {
        double jitter = rng ? rng->uniform() : 0.5;
        out[i] = near + (i + jitter) * step;
    }
    return out;
}

std::vector<double> importance_depths(std::span<const double> weights,
                                      std::span<const double> edges, int n,
                                      Rng* rng) {
    if (edges.size() != weights.size() + 1 || weights.empty())
        throw std::invalid_argument("importance_depths: edges must bracket weights");
    if (n < 1) throw std::invalid_argument("importance_depths: n must be >= 1");
    const int nb = static_cast<int>(weights.size());

    // 1-tap max-blur plus a small uniform floor; all-zero input becomes a
    // uniform PDF over the full range.
    std::vector<double> w(nb);
    for (int i = 0; i < nb; ++i) {
        double m = weights[i];
        if (i > 0) m = std::max(m, weights[i - 1]);
        if (i + 1 < nb) m = std::max(m, weights[i + 1]);
        if (m < 0) throw std::invalid_argument("importance_depths: negative weight");
        w[i] = m + 0.01;
    }
    std::vector<double> cdf(nb + 1, 0.0);
    for (int i = 0; i < nb; ++i) cdf[i + 1] = cdf[i] + w[i];
    double total = cdf[nb];
    for (double& c : cdf) c /= total;
    cdf[nb] = 1.0;

    std::vector<double> u(n);
    if (rng) {
        for (double& x : u) x = rng->uniform();
        std::sort(u.begin(), u.end());
    } else {
        for (int i = 0; i < n; ++i) u[i] = (i + 0.5) / n;
    }

    std::vector<double> out(n);
    int bin = 0;
    for (int i = 0; i < n; ++i) {
        while (bin + 1 < nb && cdf[bin + 1] <= u[i]) ++bin;
        double lo = cdf[bin], hi = cdf[bin + 1];
        double frac = hi > lo ? (u[i] - lo) / (hi - lo) : 0.5;
        out[i] = edges[bin] + frac * (edges[bin + 1] - edges[bin]);
    }
    // Guard against duplicate samples so downstream partitions stay strict.
    for (int i = 1; i < n; ++i)
        if (out[i] <= out[i - 1])
            out[i] = std::nextafter(out[i - 1], std::numeric_limits<double>::infinity());
    return out;
}

CompositeResult composite(std::span<const RenderSample> samples) {
    const int n = static_cast<int>(samples.size());
    std::vector<double> sigma(n), cr(n), cg(n), cb(n), delta(n), zmid(n);
    for (int i = 0; i < n; ++i) {
        if (samples[i].delta <= 0)
            throw std::invalid_argument("composite: deltas must be > 0");
        sigma[i] = samples[i].sigma;
        cr[i] = samples[i].rgb.x;
        cg[i] = samples[i].rgb.y;
        cb[i] = samples[i].rgb.z;
        delta[i] = samples[i].delta;
        zmid[i] = samples[i].z_mid;
    }
    CompositeOut<double> out;
    composite_n(n, sigma.data(), cr.data(), cg.data(), cb.data(), delta.data(),
                zmid.data(), out);
    CompositeResult res;
    res.rgb = {out.rgb[0], out.rgb[1], out.rgb[2]};
    res.depth = out.depth;
    res.opacity = out.opacity;
    res.weights = std::move(out.weights);
    return res;
}

namespace {

std::vector<RenderSample> eval_frustums(const FrustumField& field,
                                        const CompositeCone& cone,
                                        std::span<const double> edges) {
    auto frustums = partition_cone(cone, edges);
    std::vector<RenderSample> samples(frustums.size());
    for (size_t i = 0; i < frustums.size(); ++i) {
        FrustumGaussian g = frustum_moments(frustums[i]);
        FieldOutput o = field.eval(g, cone.axis);
        samples[i].sigma = o.density;
        samples[i].rgb = o.radiance;
        samples[i].delta = frustums[i].t_far - frustums[i].t_near;
        samples[i].z_mid = 0.5 * (frustums[i].z_near + frustums[i].z_far);
    }
    return samples;
}

}  // namespace

ConeRenderResult render_cone(const FrustumField& field, const CompositeCone& cone,
                             double near, double far, const RenderOptions& opts,
                             Rng* rng) {
    Rng* jitter = opts.deterministic ? nullptr : rng;
    ConeRenderResult res;
    res.coarse_edges = stratified_depths(near, far, opts.n_coarse + 1, jitter);
    auto coarse = eval_frustums(field, cone, res.coarse_edges);
    CompositeResult cc = composite(coarse);
    res.coarse_rgb = cc.rgb;
    res.coarse_weights = cc.weights;

    res.fine_edges =
        importance_depths(cc.weights, res.coarse_edges, opts.n_fine + 1, jitter);
    auto fine = eval_frustums(field, cone, res.fine_edges);
    CompositeResult fc = composite(fine);
    res.fine_rgb = fc.rgb;
    res.fine_depth = fc.depth;
    res.fine_opacity = fc.opacity;
    return res;
}

std::vector<ConeRenderResult> render_cones_mlp(const FieldParams& params,
                                               std::span<const CompositeCone> cones,
                                               double near, double far,
                                               const RenderOptions& opts, Rng* rng) {
    Rng* jitter = opts.deterministic ? nullptr : rng;
    const int B = static_cast<int>(cones.size());
    std::vector<std::vector<double>> coarse_edges(B);
    for (int b = 0; b < B; ++b)
        coarse_edges[b] = stratified_depths(near, far, opts.n_coarse + 1, jitter);

    ConePass<float> coarse;
    run_pass(params, cones, std::move(coarse_edges), coarse);
    auto fine_edges = fine_edges_from_pass(coarse, opts.n_fine, jitter);
    ConePass<float> fine;
    run_pass(params, cones, std::move(fine_edges), fine);

    std::vector<ConeRenderResult> out(B);
    for (int b = 0; b < B; ++b) {
        ConeRenderResult& r = out[b];
        r.coarse_rgb = {coarse.comp[b].rgb[0], coarse.comp[b].rgb[1],
                        coarse.comp[b].rgb[2]};
        r.fine_rgb = {fine.comp[b].rgb[0], fine.comp[b].rgb[1], fine.comp[b].rgb[2]};
        r.fine_depth = fine.comp[b].depth;
        r.fine_opacity = fine.comp[b].opacity;
        r.coarse_weights.assign(coarse.comp[b].weights.begin(),
                                coarse.comp[b].weights.end());
        r.coarse_edges = coarse.edges[b];
        r.fine_edges = fine.edges[b];
    }
    return out;
}

namespace {

Camera with_overrides(const Camera& cam, const LensOverrides& ov) {
    Camera c = cam;
    if (ov.aperture >= 0) c.lens = c.lens.with_aperture(ov.aperture);
    if (ov.focus > 0) c.lens = c.lens.with_focus(ov.focus);
    return c;
}

}  // namespace

Vec3 render_pixel(const Camera& cam, int px, int py, const FieldParams& params,
                  const LensOverrides& ov, const RenderOptions& opts) {
    Camera c = with_overrides(cam, ov);
    CompositeCone cone = pixel_cone(c, px, py, ov.scale);
    auto res = render_cones_mlp(params, std::span(&cone, 1), c.near, c.far, opts);
    return res[0].fine_rgb;
}

Image render_image(const Camera& cam, const FieldParams& params,
                   const LensOverrides& ov, const RenderOptions& opts) {
    Camera c = with_overrides(cam, ov);
    Image img(c.width, c.height);
    // Chunked so feature matrices stay cache-resident.
    const int chunk = 256;
    std::vector<CompositeCone> cones;
    cones.reserve(chunk);
    int total = c.width * c.height;
    for (int start = 0; start < total; start += chunk) {
        int count = std::min(chunk, total - start);
        cones.clear();
        for (int i = 0; i < count; ++i) {
            int px = (start + i) % c.width;
            int py = (start + i) / c.width;
            cones.push_back(pixel_cone(c, px, py, ov.scale));
        }
        auto res = render_cones_mlp(params, cones, c.near, c.far, opts);
        for (int i = 0; i < count; ++i) {
            int px = (start + i) % c.width;
            int py = (start + i) / c.width;
            img.set(px, py, res[i].fine_rgb);
        }
    }
    return img;
}

}  // namespace nerfocus
