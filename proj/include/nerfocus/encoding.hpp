#pragma once

#include <utility>
#include <vector>

#include "nerfocus/lens.hpp"
#include "nerfocus/vec.hpp"

namespace nerfocus {

// Diagonal Gaussian approximating a conical frustum's mass distribution,
// expressed in the world frame.
struct FrustumGaussian {
    Vec3 mean;
    Vec3 var;  // per-axis variances, >= 0
};

struct EncodedFeature {
    std::vector<double> values;  // layout: per axis, per frequency, sin then cos
    int num_freqs = 0;
};

// Plain positional encoding of Eq.-1 form: sin(2^k v), cos(2^k v) for each
// axis and k = 0..num_freqs-1. Output length 6*num_freqs.
EncodedFeature positional_encode(const Vec3& x, int num_freqs);

// (E[sin(2^k v)], E[cos(2^k v)]) for v ~ N(mu, var):
// attenuation exp(-4^k var / 2) applied to sin/cos of the mean.
std::pair<double, double> expected_component(double mu, double var, int k);

// Expected positional encoding under the frustum Gaussian. With zero
// variances this reduces to positional_encode(mean).
EncodedFeature integrated_positional_encode(const FrustumGaussian& g,
                                            int num_freqs);

// Centroid and per-axis variances of a uniform mass distribution over the
// conical frustum. Computed in the cone's axial/radial frame (cross-section
// area weights the axial density) and projected onto the world axes, keeping
// the diagonal only. Throws std::domain_error for a degenerate frustum.
FrustumGaussian frustum_moments(const ConicalFrustum& frustum);

// Fast path used by the batched renderer: writes the 6*num_freqs IPE values
// of one Gaussian into `out` using sin/cos doubling recurrences (one libm
// sincos + one exp per axis). Layout matches integrated_positional_encode.
template <typename Out>
inline void ipe_into(const FrustumGaussian& g, int num_freqs, Out* out) {
    for (int axis = 0; axis < 3; ++axis) {
        double s = std::sin(g.mean[axis]);
        double c = std::cos(g.mean[axis]);
        double att = std::exp(-0.5 * g.var[axis]);
        Out* o = out + axis * 2 * num_freqs;
        for (int k = 0; k < num_freqs; ++k) {
            o[2 * k] = static_cast<Out>(s * att);
            o[2 * k + 1] = static_cast<Out>(c * att);
            double s2 = 2.0 * s * c;    // sin(2x)
            double c2 = c * c - s * s;  // cos(2x)
            s = s2;
            c = c2;
            double a2 = att * att;
            att = a2 * a2;  // exponent scales by 4 per octave
        }
    }
}

// Same recurrence-based fast path for plain PE of a direction.
template <typename Out>
inline void pe_into(const Vec3& x, int num_freqs, Out* out) {
    for (int axis = 0; axis < 3; ++axis) {
        double s = std::sin(x[axis]);
        double c = std::cos(x[axis]);
        Out* o = out + axis * 2 * num_freqs;
        for (int k = 0; k < num_freqs; ++k) {
            o[2 * k] = static_cast<Out>(s);
            o[2 * k + 1] = static_cast<Out>(c);
            double s2 = 2.0 * s * c;
            double c2 = c * c - s * s;
            s = s2;
            c = c2;
        }
    }
}

}  // namespace nerfocus
