#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace nerfocus {

// Thin wrapper over mt19937_64 with hand-rolled conversions so that the
// stream of draws is independent of the standard library's distribution
// implementations.
class Rng {
 public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    uint64_t below(uint64_t n) {
        // Modulo bias is negligible for n << 2^64 (image/pixel indices).
        return gen_() % n;
    }

    // Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    // Index drawn from a categorical distribution. Weights need not be
    // normalized; assumed non-negative with positive sum.
    int categorical(std::span<const double> probs) {
        double total = 0;
        for (double p : probs) total += p;
        double u = uniform() * total;
        double acc = 0;
        for (size_t i = 0; i + 1 < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return static_cast<int>(i);
        }
        return static_cast<int>(probs.size()) - 1;
    }

    // Uniform point on the unit disk (rejection sampling).
    void in_unit_disk(double& dx, double& dy) {
        do {
            dx = uniform(-1.0, 1.0);
            dy = uniform(-1.0, 1.0);
        } while (dx * dx + dy * dy > 1.0);
    }

 private:
    std::mt19937_64 gen_;
};

}  // namespace nerfocus
