#include "nerfocus/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "nerfocus/encoding.hpp"
#include "nerfocus/pipeline.hpp"
#include "nerfocus/scene.hpp"

namespace nerfocus {

namespace {

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), format, a, b, c);
    return buf;
}

}  // namespace

SuiteResult verify_ipe(double tol_scale) {
    // Closed-form E[sin(2^k v)], E[cos(2^k v)] for v ~ N(mu, var) against a
    // 1e5-sample Monte-Carlo mean, within 3 standard errors and 1e-2 absolute.
    Rng rng(20250811);
    const int n_trials = 100, n_samples = 100000;
    double worst_abs = 0, worst_z = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        double mu = rng.uniform(-4.0, 4.0);
        double sd = rng.uniform(0.0, 1.5);
        int k = static_cast<int>(rng.below(9));
        auto [es, ec] = expected_component(mu, sd * sd, k);
        double freq = std::ldexp(1.0, k);
        double sum_s = 0, sum_c = 0, sq_s = 0, sq_c = 0;
        for (int i = 0; i < n_samples; ++i) {
            double v = freq * (mu + sd * rng.normal());
            double s = std::sin(v), c = std::cos(v);
            sum_s += s;
            sq_s += s * s;
            sum_c += c;
            sq_c += c * c;
        }
        double ms = sum_s / n_samples, mc = sum_c / n_samples;
        double se_s = std::sqrt(std::max(sq_s / n_samples - ms * ms, 0.0) / n_samples);
        double se_c = std::sqrt(std::max(sq_c / n_samples - mc * mc, 0.0) / n_samples);
        worst_abs = std::max({worst_abs, std::abs(es - ms), std::abs(ec - mc)});
        worst_z = std::max({worst_z, std::abs(es - ms) / std::max(se_s, 1e-12),
                            std::abs(ec - mc) / std::max(se_c, 1e-12)});
    }
    bool pass = worst_abs <= 1e-2 * tol_scale && worst_z <= 3.0 * tol_scale;
    return {"ipe", pass,
            fmt("max |closed-MC| %.3e (tol 1e-2), max z-score %.2f (tol 3)",
                worst_abs, worst_z)};
}

SuiteResult verify_moments(double tol_scale) {
    // Analytic frustum centroid / per-axis variances against uniform
    // rejection sampling of the solid, 1e6 accepted points per frustum.
    Rng rng(20250812);
    const int n_trials = 100, n_samples = 1000000;
    double worst = 0;
    for (int trial = 0; trial < n_trials; ++trial) {
        // Frustum sizes stay pixel-scale (diameters well under ~0.5) so the
        // 1e6-sample Monte-Carlo noise floor sits comfortably below the
        // 1e-3 absolute tolerance; the analytic result is exact regardless.
        LensConfig lens = LensConfig::make(rng.uniform(0.0, 0.2), 0.1,
                                           rng.uniform(2.0, 5.0),
                                           rng.uniform(0.0002, 0.0005));
        // Random unit axis with a forward-ish z so cos_axis stays sane.
        Vec3 axis{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5),
                  rng.uniform(0.8, 1.2)};
        axis = axis / axis.norm();
        double cos_axis = rng.uniform(0.75, 1.0);
        Vec3 lens_center{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
        const double kernel_scales[4] = {1.0, 3.0, 7.0, 15.0};
        double scale = kernel_scales[rng.below(4)];
        CompositeCone cone(lens_center - axis * (lens.image_dist / cos_axis),
                           lens_center, axis, cos_axis, lens, scale);

        double z_near = rng.uniform(1.0, 3.5);
        double z_far = z_near + rng.uniform(0.05, 0.25);
        auto frustums = partition_cone(cone, std::vector<double>{z_near, z_far});
        FrustumGaussian analytic = frustum_moments(frustums[0]);

        // Orthonormal radial frame.
        Vec3 helper = std::abs(axis.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
        Vec3 e1 = axis.cross(helper);
        e1 = e1 / e1.norm();
        Vec3 e2 = axis.cross(e1);

        double t_near = cone.t_of_depth(z_near), t_far = cone.t_of_depth(z_far);
        auto radius_at = [&](double t) {
            return 0.5 * cone.diameter_at(t * cos_axis);
        };
        double r_max = std::max(radius_at(t_near), radius_at(t_far));
        double t_kink = cone.t_of_depth(lens.focus);
        if (t_kink > t_near && t_kink < t_far)
            r_max = std::max(r_max, radius_at(t_kink));

        Vec3 sum{}, sumsq{};
        int accepted = 0;
        while (accepted < n_samples) {
            double t = rng.uniform(t_near, t_far);
            double r = radius_at(t);
            double ratio = r / r_max;
            if (rng.uniform() >= ratio * ratio) continue;
            double rad = r * std::sqrt(rng.uniform());
            double ang = rng.uniform(0.0, 2.0 * M_PI);
            Vec3 p = cone.lens_center + axis * t + e1 * (rad * std::cos(ang)) +
                     e2 * (rad * std::sin(ang));
            sum = sum + p;
            sumsq = sumsq + Vec3{p.x * p.x, p.y * p.y, p.z * p.z};
            ++accepted;
        }
        Vec3 mean = sum / double(n_samples);
        for (int a = 0; a < 3; ++a) {
            double var = sumsq[a] / n_samples - mean[a] * mean[a];
            worst = std::max({worst, std::abs(mean[a] - analytic.mean[a]),
                              std::abs(var - analytic.var[a])});
        }
    }
    bool pass = worst <= 1e-3 * tol_scale;
    return {"moments", pass,
            fmt("max |analytic-sampled| %.3e over centroid+variances (tol 1e-3)",
                worst)};
}

SuiteResult verify_lens(double tol_scale) {
    Rng rng(20250813);
    // (a) Zero defocus on the focal plane, exactly.
    bool exact_zero = true;
    for (int i = 0; i < 100; ++i) {
        LensConfig lens = LensConfig::make(rng.uniform(0.01, 0.5), 0.1,
                                           rng.uniform(0.5, 8.0),
                                           rng.uniform(0.001, 0.01));
        if (coc_diameter_scene_point(lens, lens.focus) != 0.0) exact_zero = false;
        if (bicone_diameter(lens, lens.focus) != 0.0) exact_zero = false;
    }
    // (b) A = 0 collapses the composite diameter onto the axis-cone term.
    double worst_a0 = 0;
    for (int i = 0; i < 1000; ++i) {
        LensConfig lens = LensConfig::make(0.0, rng.uniform(0.05, 0.3),
                                           rng.uniform(0.5, 8.0),
                                           rng.uniform(0.001, 0.01));
        double scale = 1.0 + rng.below(51);
        double z = rng.uniform(0.1, 10.0);
        worst_a0 = std::max(worst_a0,
                            std::abs(composite_diameter(lens, z, scale) -
                                     axis_cone_diameter(lens, z, scale)));
    }
    // (c) Aperture monotonicity on a depth grid.
    bool monotone = true;
    const double apertures[] = {0.0, 0.02, 0.05, 0.1, 0.2, 0.5};
    for (int i = 0; i < 50 && monotone; ++i) {
        double focal = rng.uniform(0.05, 0.3);
        double focus = rng.uniform(0.5, 8.0);
        double d0 = rng.uniform(0.001, 0.01);
        double scale = 1.0 + rng.below(51);
        for (int gi = 1; gi <= 40; ++gi) {
            double z = 0.25 * gi;
            double prev = -1;
            for (double a : apertures) {
                LensConfig lens = LensConfig::make(a, focal, focus, d0);
                double d = composite_diameter(lens, z, scale);
                if (d < prev) monotone = false;
                prev = d;
            }
        }
    }
    bool pass = exact_zero && worst_a0 <= 0.0 * tol_scale && monotone;
    return {"lens", pass,
            fmt("focal-plane CoC exact %g, max |composite-axis| at A=0: %.3e, "
                "dd/dA>=0: %g",
                exact_zero ? 1.0 : 0.0, worst_a0, monotone ? 1.0 : 0.0)};
}

FieldOutput AnalyticField::eval_point(const Vec3& p, const Vec3& dir) const {
    FieldOutput out;
    out.density =
        density_scale_ * (1.0 + 0.9 * std::sin(1.3 * p.x + 0.7 * p.y - 0.9 * p.z));
    out.radiance = {0.5 + 0.4 * std::sin(0.9 * p.x + 0.3 * dir.x),
                    0.5 + 0.4 * std::sin(1.1 * p.y - 0.4 * dir.y + 1.0),
                    0.5 + 0.4 * std::cos(0.8 * p.z + 0.5 * dir.z)};
    return out;
}

SuiteResult verify_composite(double tol_scale) {
    // Fine-pass renders of an analytic field against a 1e4-point Riemann
    // quadrature of the continuous volume-rendering integral along the axis.
    Rng rng(20250814);
    AnalyticField field;
    double worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
        LensConfig lens = LensConfig::make(rng.uniform(0.0, 0.1), 0.1,
                                           rng.uniform(2.0, 5.0),
                                           rng.uniform(0.001, 0.005));
        Vec3 axis{rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3), 1.0};
        axis = axis / axis.norm();
        double cos_axis = rng.uniform(0.9, 1.0);
        Vec3 lens_center{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), 0.0};
        CompositeCone cone(lens_center - axis * (lens.image_dist / cos_axis),
                           lens_center, axis, cos_axis, lens, 1.0);
        double z_near = rng.uniform(0.5, 1.5);
        double z_far = z_near + rng.uniform(1.0, 2.5);

        RenderOptions opts;
        opts.n_coarse = 2048;
        opts.n_fine = 2048;
        opts.deterministic = true;
        ConeRenderResult res = render_cone(field, cone, z_near, z_far, opts);

        // Midpoint Riemann quadrature in axis distance t.
        const int nq = 10000;
        double t0 = cone.t_of_depth(z_near), t1 = cone.t_of_depth(z_far);
        double dt = (t1 - t0) / nq;
        double tau = 0;  // accumulated optical depth
        Vec3 color{};
        for (int i = 0; i < nq; ++i) {
            double t = t0 + (i + 0.5) * dt;
            FieldOutput f = field.eval_point(cone.lens_center + axis * t, axis);
            double trans = std::exp(-tau - 0.5 * f.density * dt);
            double w = trans * f.density * dt;
            color = color + f.radiance * w;
            tau += f.density * dt;
        }
        for (int c = 0; c < 3; ++c)
            worst = std::max(worst, std::abs(res.fine_rgb[c] - color[c]));
    }
    bool pass = worst <= 1e-3 * tol_scale;
    return {"composite", pass,
            fmt("max per-channel |render-quadrature| %.3e (tol 1e-3)", worst)};
}

namespace {

// Central finite difference of a scalar function of the parameters.
template <typename Loss>
double fd_gradient(FieldParamsT<double>& params, Eigen::MatrixXd& block,
                   Eigen::Index r, Eigen::Index c, double h, const Loss& loss) {
    double saved = block(r, c);
    block(r, c) = saved + h;
    double lp = loss(params);
    block(r, c) = saved - h;
    double lm = loss(params);
    block(r, c) = saved;
    return (lp - lm) / (2 * h);
}

struct GradCheck {
    double worst_rel = 0;
    int checked = 0;
};

template <typename Loss>
void check_blocks(FieldParamsT<double>& params, const FieldParamsT<double>& grads,
                  Rng& rng, int per_block, double h, const Loss& loss,
                  GradCheck& out) {
    auto pb = params.blocks();
    auto gb = grads.blocks();
    for (size_t bi = 0; bi < pb.size(); ++bi) {
        Eigen::MatrixXd& block = *pb[bi];
        for (int s = 0; s < per_block; ++s) {
            Eigen::Index r = Eigen::Index(rng.below(uint64_t(block.rows())));
            Eigen::Index c = Eigen::Index(rng.below(uint64_t(block.cols())));
            double fd = fd_gradient(params, block, r, c, h, loss);
            double an = (*gb[bi])(r, c);
            double rel = std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6});
            out.worst_rel = std::max(out.worst_rel, rel);
            ++out.checked;
        }
    }
}

}  // namespace

SuiteResult verify_gradients(double tol_scale) {
    Rng rng(20250815);
    FieldArch arch;
    arch.num_pos_freqs = 4;
    arch.num_dir_freqs = 2;
    arch.width = 8;
    arch.depth = 3;
    arch.skip = 1;

    // (a) MLP-only: random heads adjoint, analytic vs FD, < 1e-4 relative.
    FieldParamsT<double> params;
    init_params(params, arch, 7);
    const int B = 4;
    FieldWorkspace<double> ws;
    ws.xpos.setZero(B, arch.pos_dim());
    ws.xdir.setZero(B, arch.dir_dim());
    for (Eigen::Index i = 0; i < ws.xpos.size(); ++i)
        ws.xpos.data()[i] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < ws.xdir.size(); ++i)
        ws.xdir.data()[i] = rng.uniform(-1.0, 1.0);
    Eigen::VectorXd a_sig(B);
    Eigen::MatrixXd a_rgb(B, 3);
    for (Eigen::Index i = 0; i < B; ++i) a_sig(i) = rng.uniform(-1.0, 1.0);
    for (Eigen::Index i = 0; i < a_rgb.size(); ++i)
        a_rgb.data()[i] = rng.uniform(-1.0, 1.0);

    auto mlp_loss = [&](FieldParamsT<double>& p) {
        FieldWorkspace<double> w;
        w.xpos = ws.xpos;
        w.xdir = ws.xdir;
        forward_batch(p, w);
        return a_sig.dot(w.sigma) + (a_rgb.array() * w.rgb.array()).sum();
    };
    FieldParamsT<double> grads;
    grads.resize(arch);
    forward_batch(params, ws);
    backward_batch(params, ws, a_sig, a_rgb, grads);
    GradCheck mlp;
    check_blocks(params, grads, rng, 6, 1e-6, mlp_loss, mlp);

    // (b) End-to-end loss through encoding -> MLP -> compositing -> MSE with
    // both depth sets fixed (the function the trainer differentiates).
    std::vector<CompositeCone> cones;
    std::vector<Vec3> targets;
    LensConfig lens = LensConfig::make(0.0, 0.1, 4.0, 0.004);
    for (int i = 0; i < 2; ++i) {
        Vec3 axis{0.1 * i, -0.05, 1.0};
        axis = axis / axis.norm();
        cones.emplace_back(Vec3{0, 0, -lens.image_dist}, Vec3{0, 0, 0}, axis,
                           1.0 / std::sqrt(1.0 + 0.01 * i * i + 0.0025), lens,
                           7.0);
        targets.push_back({0.3, 0.6, 0.2});
    }
    std::vector<std::vector<double>> coarse_edges(2), fine_edges(2);
    for (int b = 0; b < 2; ++b) {
        coarse_edges[b] = stratified_depths(1.0, 5.0, 9, &rng);
        coarse_edges[b].insert(coarse_edges[b].begin(), 1.0);
        coarse_edges[b].push_back(5.0);
        fine_edges[b] = stratified_depths(1.2, 4.8, 9, &rng);
        fine_edges[b].insert(fine_edges[b].begin(), 1.2);
        fine_edges[b].push_back(4.8);
        std::sort(coarse_edges[b].begin(), coarse_edges[b].end());
        std::sort(fine_edges[b].begin(), fine_edges[b].end());
    }
    auto e2e_loss = [&](FieldParamsT<double>& p) {
        return loss_fixed_depths<double>(p, cones, targets, coarse_edges, fine_edges,
                                         0.1, nullptr);
    };
    FieldParamsT<double> e2e_grads;
    e2e_grads.resize(arch);
    loss_fixed_depths<double>(params, cones, targets, coarse_edges, fine_edges, 0.1,
                              &e2e_grads);
    GradCheck e2e;
    check_blocks(params, e2e_grads, rng, 6, 1e-5, e2e_loss, e2e);

    bool pass = mlp.worst_rel <= 1e-4 * tol_scale && e2e.worst_rel <= 1e-3 * tol_scale;
    return {"grad", pass,
            fmt("MLP max rel err %.3e (tol 1e-4, %.0f probes); end-to-end %.3e "
                "(tol 1e-3)",
                mlp.worst_rel, double(mlp.checked), e2e.worst_rel)};
}

Camera canonical_front_camera(int size, double distance, double near, double far,
                              const LensConfig& lens) {
    Mat3 rot = Mat3::from_cols({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
    return Camera::make(rot, {0, 0, distance}, size, size, double(size), near, far,
                        lens);
}

SuiteResult verify_oracle(double tol_scale) {
    Scene scene = make_scene_preset("two-planes");
    const int size = 48;
    double pitch = image_distance(0.1, 4.0) / size;
    LensConfig pin = LensConfig::make(0.0, 0.1, 4.0, pitch * 2.0 / std::sqrt(3.0));
    Camera cam_pin = canonical_front_camera(size, 4.0, 1.5, 7.5, pin);
    Image img_pin = render_oracle_pinhole(scene, cam_pin);

    // (a) A = 0 thin-lens tracing degenerates to the pinhole path, bitwise.
    Image img_a0 = render_oracle_thinlens(scene, cam_pin, 32, 11);
    bool bitwise = img_a0.data == img_pin.data;

    // (b) Monte-Carlo self-consistency: two seeds at 256 lens samples.
    LensConfig wide = pin.with_aperture(0.1).with_focus(2.0);  // near plane z=2
    Camera cam_wide = canonical_front_camera(size, 4.0, 1.5, 7.5, wide);
    Image s1 = render_oracle_thinlens(scene, cam_wide, 256, 101);
    Image s2 = render_oracle_thinlens(scene, cam_wide, 256, 202);
    double mae = 0;
    for (size_t i = 0; i < s1.data.size(); ++i)
        mae += std::abs(double(s1.data[i]) - s2.data[i]);
    mae /= double(s1.data.size());

    // (c) Focused near plane (left half) stays sharp; far plane (right half)
    // blurs relative to the pinhole image.
    int h = size / 2;
    double near_pin = mean_abs_laplacian(img_pin, 2, h - 2, 2, size - 2);
    double far_pin = mean_abs_laplacian(img_pin, h + 2, size - 2, 2, size - 2);
    double near_tl = mean_abs_laplacian(s1, 2, h - 2, 2, size - 2);
    double far_tl = mean_abs_laplacian(s1, h + 2, size - 2, 2, size - 2);
    double near_ratio = near_tl / std::max(near_pin, 1e-12);
    double far_ratio = far_tl / std::max(far_pin, 1e-12);

    bool pass = bitwise && mae <= 0.01 * tol_scale &&
                far_ratio <= 0.7 * tol_scale && near_ratio >= far_ratio + 0.15;
    return {"oracle", pass,
            fmt("A=0 bitwise-pinhole %g; MC seed MAE %.2e (tol 1e-2); "
                "near/far sharpness ratios %.2f",
                bitwise ? 1.0 : 0.0, mae, near_ratio / std::max(far_ratio, 1e-12))};
}

std::vector<SuiteResult> run_verify(const std::string& suite, double tol_scale) {
    std::vector<SuiteResult> out;
    auto want = [&](const char* name) { return suite.empty() || suite == name; };
    bool any = false;
    if (want("ipe")) out.push_back(verify_ipe(tol_scale)), any = true;
    if (want("moments")) out.push_back(verify_moments(tol_scale)), any = true;
    if (want("lens")) out.push_back(verify_lens(tol_scale)), any = true;
    if (want("composite")) out.push_back(verify_composite(tol_scale)), any = true;
    if (want("grad")) out.push_back(verify_gradients(tol_scale)), any = true;
    if (want("oracle")) out.push_back(verify_oracle(tol_scale)), any = true;
    if (!any) throw std::invalid_argument("run_verify: unknown suite " + suite);
    return out;
}

}  // namespace nerfocus
