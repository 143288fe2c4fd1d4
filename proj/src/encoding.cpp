#include "nerfocus/encoding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nerfocus {

EncodedFeature positional_encode(const Vec3& x, int num_freqs) {
    if (num_freqs < 1)
        throw std::invalid_argument("positional_encode: num_freqs must be >= 1");
    EncodedFeature f;
    f.num_freqs = num_freqs;
    f.values.resize(6 * static_cast<size_t>(num_freqs));
    size_t idx = 0;
    for (int axis = 0; axis < 3; ++axis) {
        double v = x[axis];
        for (int k = 0; k < num_freqs; ++k) {
            double s = std::ldexp(v, k);  // 2^k * v
            f.values[idx++] = std::sin(s);
            f.values[idx++] = std::cos(s);
        }
    }
    return f;
}

std::pair<double, double> expected_component(double mu, double var, int k) {
    if (var < 0) throw std::domain_error("expected_component: var must be >= 0");
    double w = std::ldexp(mu, k);
    double scale = std::ldexp(1.0, k);
    // exp underflow flushes to zero, the correct low-pass limit.
    double att = std::exp(-0.5 * scale * scale * var);
    return {std::sin(w) * att, std::cos(w) * att};
}

EncodedFeature integrated_positional_encode(const FrustumGaussian& g,
                                            int num_freqs) {
    if (num_freqs < 1)
        throw std::invalid_argument("integrated_positional_encode: num_freqs must be >= 1");
    EncodedFeature f;
    f.num_freqs = num_freqs;
    f.values.resize(6 * static_cast<size_t>(num_freqs));
    size_t idx = 0;
    for (int axis = 0; axis < 3; ++axis) {
        for (int k = 0; k < num_freqs; ++k) {
            auto [s, c] = expected_component(g.mean[axis], g.var[axis], k);
            f.values[idx++] = s;
            f.values[idx++] = c;
        }
    }
    return f;
}

namespace {

// Accumulated integrals of the cross-section-weighted axial density over one
// linear-radius piece r(s) = a + b*s, s in [sa, sb] (s is the axial
// coordinate relative to the frustum midpoint).
struct MomentAccum {
    double m0 = 0;  // integral r^2
    double m1 = 0;  // integral s r^2
    double m2 = 0;  // integral s^2 r^2
    double m4 = 0;  // integral r^4

    void add_piece(double a, double b, double sa, double sb) {
        auto ipow = [](double v, int n) {
            double r = 1;
            for (int i = 0; i < n; ++i) r *= v;
            return r;
        };
        // r^2 = a^2 + 2ab s + b^2 s^2
        double c0 = a * a, c1 = 2 * a * b, c2 = b * b;
        m0 += c0 * (sb - sa) + c1 * (ipow(sb, 2) - ipow(sa, 2)) / 2 +
              c2 * (ipow(sb, 3) - ipow(sa, 3)) / 3;
        m1 += c0 * (ipow(sb, 2) - ipow(sa, 2)) / 2 +
              c1 * (ipow(sb, 3) - ipow(sa, 3)) / 3 +
              c2 * (ipow(sb, 4) - ipow(sa, 4)) / 4;
        m2 += c0 * (ipow(sb, 3) - ipow(sa, 3)) / 3 +
              c1 * (ipow(sb, 4) - ipow(sa, 4)) / 4 +
              c2 * (ipow(sb, 5) - ipow(sa, 5)) / 5;
        // r^4 = (a + b s)^4
        double q0 = a * a * a * a, q1 = 4 * a * a * a * b, q2 = 6 * a * a * b * b,
               q3 = 4 * a * b * b * b, q4 = b * b * b * b;
        m4 += q0 * (sb - sa) + q1 * (ipow(sb, 2) - ipow(sa, 2)) / 2 +
              q2 * (ipow(sb, 3) - ipow(sa, 3)) / 3 +
              q3 * (ipow(sb, 4) - ipow(sa, 4)) / 4 +
              q4 * (ipow(sb, 5) - ipow(sa, 5)) / 5;
    }
};

}  // namespace

FrustumGaussian frustum_moments(const ConicalFrustum& fr) {
    if (fr.cone == nullptr)
        throw std::invalid_argument("frustum_moments: frustum has no cone");
    const CompositeCone& cone = *fr.cone;
    if (!(fr.t_far > fr.t_near))
        throw std::domain_error("frustum_moments: degenerate frustum");

    double tc = 0.5 * (fr.t_near + fr.t_far);
    auto radius = [&](double t) { return 0.5 * cone.diameter_at(t * cone.cos_axis); };

    // The diameter law is piecewise linear in depth with a kink where d_e
    // pinches to zero at z = l; split there if it falls inside the slice.
    std::vector<double> knots = {fr.t_near, fr.t_far};
    if (!cone.defocus_disabled && cone.lens.aperture > 0) {
        double t_kink = cone.t_of_depth(cone.lens.focus);
        if (t_kink > fr.t_near && t_kink < fr.t_far)
            knots.insert(knots.begin() + 1, t_kink);
    }

    MomentAccum acc;
    for (size_t i = 0; i + 1 < knots.size(); ++i) {
        double ta = knots[i], tb = knots[i + 1];
        double ra = radius(ta), rb = radius(tb);
        double sa = ta - tc, sb = tb - tc;
        double b = (rb - ra) / (tb - ta);
        double a = ra - b * sa;
        acc.add_piece(a, b, sa, sb);
    }

    double t_mean, var_t, var_r;
    if (acc.m0 <= 0) {
        // Zero-radius beam: fall back to uniform-segment moments.
        double len = fr.t_far - fr.t_near;
        t_mean = tc;
        var_t = len * len / 12.0;
        var_r = 0;
    } else {
        double mu_s = acc.m1 / acc.m0;
        t_mean = tc + mu_s;
        var_t = std::max(0.0, acc.m2 / acc.m0 - mu_s * mu_s);
        var_r = acc.m4 / (4.0 * acc.m0);
    }

    FrustumGaussian g;
    g.mean = cone.lens_center + cone.axis * t_mean;
    for (int i = 0; i < 3; ++i) {
        double ai = cone.axis[i];
        g.var[i] = var_t * ai * ai + var_r * (1.0 - ai * ai);
    }
    return g;
}

}  // namespace nerfocus
