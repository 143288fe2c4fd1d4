#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nerfocus/render.hpp"
#include "nerfocus/verify.hpp"

using namespace nerfocus;

namespace {

Camera test_camera(double aperture = 0.0, int size = 8) {
    double pitch = image_distance(0.1, 4.0) / size;
    LensConfig lens =
        LensConfig::make(aperture, 0.1, 4.0, pitch * 2.0 / std::sqrt(3.0));
    return canonical_front_camera(size, 4.0, 1.5, 7.5, lens);
}

}  // namespace

TEST_CASE("stratified_depths: midpoints when deterministic, bins when jittered") {
    auto mids = stratified_depths(2.0, 6.0, 4, nullptr);
    REQUIRE(mids.size() == 4);
    CHECK(mids[0] == doctest::Approx(2.5));
    CHECK(mids[3] == doctest::Approx(5.5));

    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto d = stratified_depths(2.0, 6.0, 8, &rng);
        REQUIRE(d.size() == 8);
        for (int i = 0; i < 8; ++i) {
            CHECK(d[i] >= 2.0 + 0.5 * i);
            CHECK(d[i] <= 2.0 + 0.5 * (i + 1));
        }
        CHECK(std::is_sorted(d.begin(), d.end()));
    }
}

TEST_CASE("importance_depths concentrates mass in heavy bins") {
    // Weights (0, 1, 0, 0) over 4 bins with the 0.01 floor: at least 90%
    // of deterministic samples land in the heavy bin.
    std::vector<double> weights = {0.0, 1.0, 0.0, 0.0};
    std::vector<double> edges = {1.0, 2.0, 3.0, 4.0, 5.0};
    auto depths = importance_depths(weights, edges, 100, nullptr);
    REQUIRE(depths.size() == 100);
    int heavy = 0, spread = 0;
    for (double z : depths) {
        CHECK(z >= 1.0);
        CHECK(z <= 5.0);
        if (z >= 2.0 && z < 3.0) ++heavy;
        if (z < 4.0) ++spread;  // max blur reaches the two neighbour bins
    }
    // Blurred+floored weights are (1.01, 1.01, 1.01, 0.01): the heavy bin
    // keeps about a third of the mass, the spread region nearly all of it.
    CHECK(heavy >= 30);
    CHECK(spread >= 98);
    CHECK(std::is_sorted(depths.begin(), depths.end()));
}

TEST_CASE("importance_depths with all-zero weights degrades to uniform") {
    std::vector<double> weights(8, 0.0);
    std::vector<double> edges = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    auto depths = importance_depths(weights, edges, 16, nullptr);
    for (size_t i = 0; i < depths.size(); ++i)
        CHECK(depths[i] == doctest::Approx(8.0 * (i + 0.5) / 16).epsilon(1e-9));
}

TEST_CASE("importance_depths random draws follow the target CDF (KS test)") {
    std::vector<double> weights = {1.0, 3.0, 2.0, 0.5};
    std::vector<double> edges = {0.0, 1.0, 2.0, 3.0, 4.0};
    // Build the target CDF: max-blurred weights + 0.01 floor.
    std::vector<double> w = {3.01, 3.01, 3.01, 2.01};  // 1-tap max blur + floor
    double total = w[0] + w[1] + w[2] + w[3];

    Rng rng(2);
    const int n = 20000;
    std::vector<double> samples;
    for (int rep = 0; rep < n / 100; ++rep) {
        auto d = importance_depths(weights, edges, 100, &rng);
        samples.insert(samples.end(), d.begin(), d.end());
    }
    std::sort(samples.begin(), samples.end());
    auto cdf = [&](double z) {
        double acc = 0;
        for (int b = 0; b < 4; ++b) {
            double lo = edges[b], hi = edges[b + 1];
            if (z >= hi) {
                acc += w[b];
            } else if (z > lo) {
                acc += w[b] * (z - lo) / (hi - lo);
                break;
            } else {
                break;
            }
        }
        return acc / total;
    };
    double ks = 0;
    for (size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        ks = std::max(ks, std::abs(f - double(i) / samples.size()));
        ks = std::max(ks, std::abs(f - double(i + 1) / samples.size()));
    }
    // Stratified inverse-CDF sampling is *more* uniform than iid draws, so
    // the iid 1% critical value 1.63/sqrt(n) is a conservative bound.
    CHECK(ks < 1.63 / std::sqrt(double(samples.size())));
}

TEST_CASE("composite hand values: two segments of optical depth ln 2") {
    std::vector<RenderSample> s(2);
    s[0] = {std::log(2.0), {1, 0, 0}, 1.0, 2.0};
    s[1] = {std::log(2.0), {0, 1, 0}, 1.0, 3.0};
    CompositeResult r = composite(s);
    CHECK(r.weights[0] == doctest::Approx(0.5));
    CHECK(r.weights[1] == doctest::Approx(0.25));
    CHECK(r.opacity == doctest::Approx(0.75));
    CHECK(r.rgb.x == doctest::Approx(0.5));
    CHECK(r.rgb.y == doctest::Approx(0.25));
    CHECK(r.rgb.z == doctest::Approx(0.0));
    CHECK(r.depth == doctest::Approx((0.5 * 2 + 0.25 * 3) / 0.75));
}

TEST_CASE("composite weights are non-negative, sum below 1, transmittance decays") {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + int(rng.below(32));
        std::vector<RenderSample> s(n);
        double z = 1;
        for (auto& smp : s) {
            smp.sigma = rng.uniform(0.0, 3.0);
            smp.rgb = {rng.uniform(), rng.uniform(), rng.uniform()};
            smp.delta = rng.uniform(0.01, 0.3);
            smp.z_mid = z;
            z += smp.delta;
        }
        CompositeResult r = composite(s);
        double sum = 0;
        for (double w : r.weights) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(sum == doctest::Approx(r.opacity));
        CHECK(r.opacity <= 1.0 + 1e-12);
        for (int c = 0; c < 3; ++c) {
            CHECK(r.rgb[c] >= 0.0);
            CHECK(r.rgb[c] <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("composite_n matches composite and its backward matches FD") {
    Rng rng(4);
    const int n = 12;
    std::vector<double> sigma(n), cr(n), cg(n), cb(n), delta(n), zmid(n);
    std::vector<RenderSample> samples(n);
    double z = 1;
    for (int i = 0; i < n; ++i) {
        sigma[i] = rng.uniform(0.0, 2.0);
        cr[i] = rng.uniform();
        cg[i] = rng.uniform();
        cb[i] = rng.uniform();
        delta[i] = rng.uniform(0.02, 0.3);
        zmid[i] = z;
        z += delta[i];
        samples[i] = {sigma[i], {cr[i], cg[i], cb[i]}, delta[i], zmid[i]};
    }
    CompositeOut<double> out;
    composite_n<double>(n, sigma.data(), cr.data(), cg.data(), cb.data(),
                        delta.data(), zmid.data(), out);
    CompositeResult ref = composite(samples);
    for (int c = 0; c < 3; ++c)
        CHECK(out.rgb[c] == doctest::Approx(ref.rgb[c]).epsilon(1e-12));
    CHECK(out.opacity == doctest::Approx(ref.opacity).epsilon(1e-12));

    double g[3] = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    std::vector<double> ds(n, 0), dr(n, 0), dg(n, 0), db(n, 0);
    composite_backward_n<double>(n, sigma.data(), cr.data(), cg.data(), cb.data(),
                                 delta.data(), g, ds.data(), dr.data(), dg.data(),
                                 db.data());
    auto value = [&]() {
        CompositeOut<double> o;
        composite_n<double>(n, sigma.data(), cr.data(), cg.data(), cb.data(),
                            delta.data(), zmid.data(), o);
        return g[0] * o.rgb[0] + g[1] * o.rgb[1] + g[2] * o.rgb[2];
    };
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
        for (auto [buf, grad] : {std::pair{&sigma, &ds}, {&cr, &dr}, {&cg, &dg},
                                 {&cb, &db}}) {
            double saved = (*buf)[i];
            (*buf)[i] = saved + h;
            double vp = value();
            (*buf)[i] = saved - h;
            double vm = value();
            (*buf)[i] = saved;
            double fd = (vp - vm) / (2 * h);
            CHECK((*grad)[i] == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
    }
}

TEST_CASE("zero-density segments are transparent; bad deltas are rejected") {
    std::vector<RenderSample> s(2);
    s[0] = {0.0, {1, 1, 1}, 0.5, 1.0};
    s[1] = {1.0, {1, 0, 0}, 1.0, 3.0};
    CompositeResult r = composite(s);
    CHECK(r.weights[0] == 0.0);
    CHECK(r.weights[1] == doctest::Approx(1.0 - std::exp(-1.0)));

    s[0].delta = 0.0;
    CHECK_THROWS_AS(composite(s), std::invalid_argument);
}

TEST_CASE("render_cone against quadrature on the analytic field") {
    AnalyticField field;
    LensConfig lens = LensConfig::make(0.05, 0.1, 3.0, 0.003);
    CompositeCone cone({0, 0, -lens.image_dist}, {0, 0, 0}, {0, 0, 1}, 1.0, lens,
                       1.0);
    RenderOptions opts;
    opts.n_coarse = 256;
    opts.n_fine = 256;
    ConeRenderResult res = render_cone(field, cone, 1.0, 3.5, opts);

    const int nq = 20000;
    double dt = 2.5 / nq, tau = 0;
    Vec3 color{};
    for (int i = 0; i < nq; ++i) {
        double t = 1.0 + (i + 0.5) * dt;
        FieldOutput f = field.eval_point(cone.point_at_depth(t), cone.axis);
        double w = std::exp(-tau - 0.5 * f.density * dt) * f.density * dt;
        color = color + f.radiance * w;
        tau += f.density * dt;
    }
    for (int c = 0; c < 3; ++c) CHECK(std::abs(res.fine_rgb[c] - color[c]) < 6e-3);
}

TEST_CASE("camera construction validates pose and frustum") {
    LensConfig lens = LensConfig::make(0.0, 0.1, 4.0, 0.004);
    Mat3 rot = Mat3::from_cols({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
    CHECK_NOTHROW(Camera::make(rot, {0, 0, 4}, 8, 8, 8.0, 1.5, 7.5, lens));
    Mat3 bad = Mat3::from_cols({2, 0, 0}, {0, 1, 0}, {0, 0, 1});
    CHECK_THROWS(Camera::make(bad, {0, 0, 4}, 8, 8, 8.0, 1.5, 7.5, lens));
    CHECK_THROWS(Camera::make(rot, {0, 0, 4}, 8, 8, 8.0, 7.5, 1.5, lens));
    CHECK_THROWS(Camera::make(rot, {0, 0, 4}, 8, 8, 8.0, 0.0, 7.5, lens));
    // Focal so short the corner rays exceed the 120-degree cap.
    CHECK_THROWS(Camera::make(rot, {0, 0, 4}, 64, 64, 8.0, 1.5, 7.5, lens));
}

TEST_CASE("pixel cones pass through the lens center with unit axes") {
    Camera cam = test_camera(0.1);
    for (int px : {0, 3, 7}) {
        for (int py : {0, 4, 7}) {
            CompositeCone cone = pixel_cone(cam, px, py, 3.0);
            CHECK(cone.axis.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(cone.scale == 3.0);
            // Sensor origin sits behind the lens center by l' along the axis.
            Vec3 diff = cone.lens_center - cone.sensor_origin;
            CHECK(diff.norm() ==
                  doctest::Approx(cam.lens.image_dist / cone.cos_axis).epsilon(1e-9));
        }
    }
    // The central pixel's cone is nearly axial for an even-sized sensor.
    CompositeCone c = pixel_cone(cam, 3, 3, 1.0);
    CHECK(c.cos_axis > 0.99);
}

TEST_CASE("render_pixel equals the matching render_image pixel") {
    FieldParams params;
    init_params(params, FieldArch{2, 1, 8, 2, 1}, 5);
    Camera cam = test_camera(0.05);
    RenderOptions opts;
    opts.n_coarse = 16;
    opts.n_fine = 16;
    LensOverrides ov;
    ov.scale = 3.0;
    Image img = render_image(cam, params, ov, opts);
    for (int px : {0, 2, 5}) {
        for (int py : {1, 6}) {
            Vec3 c = render_pixel(cam, px, py, params, ov, opts);
            Vec3 p = img.get(px, py);
            // GEMM reduction order varies with batch shape, so agreement is
            // to float round-off, not bitwise.
            for (int ch = 0; ch < 3; ++ch)
                CHECK(std::abs(c[ch] - p[ch]) < 1e-5);
        }
    }
}

TEST_CASE("lens overrides change defocus without moving the camera") {
    FieldParams params;
    init_params(params, FieldArch{2, 1, 8, 2, 1}, 6);
    Camera cam = test_camera(0.0);
    RenderOptions opts;
    opts.n_coarse = 16;
    opts.n_fine = 16;
    LensOverrides a0, a1;
    a1.aperture = 0.2;
    Vec3 p0 = render_pixel(cam, 1, 1, params, a0, opts);
    Vec3 p1 = render_pixel(cam, 1, 1, params, a1, opts);
    // A random small field gives slightly different cone footprints; the
    // renders must differ once the aperture opens.
    double diff = std::abs(p0.x - p1.x) + std::abs(p0.y - p1.y) +
                  std::abs(p0.z - p1.z);
    CHECK(diff > 0.0);
}
