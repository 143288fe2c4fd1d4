#pragma once

#include <span>
#include <vector>

#include "nerfocus/image.hpp"
#include "nerfocus/rng.hpp"

namespace nerfocus {

// Normalized 1D Gaussian taps for an odd kernel size s: sigma = s/4, radius
// (s-1)/2, truncated and renormalized to sum 1. Size 1 is the identity.
std::vector<double> gaussian_kernel(int size);

// Separable convolution with edge-clamped boundaries. Size 1 returns the
// input bitwise.
Image gaussian_blur(const Image& img, int size);

// The m blur kernels, their selection probabilities, and the pre-blurred
// dataset variants D_j.
struct BlurBank {
    std::vector<int> sizes;                     // odd, ascending by convention
    std::vector<double> probs;                  // sum to 1
    std::vector<std::vector<double>> kernels;   // taps per size
    std::vector<std::vector<Image>> datasets;   // datasets[j][img]

    int count() const { return static_cast<int>(sizes.size()); }
};

// Blurs every image with every kernel. Throws std::invalid_argument for even
// or non-positive sizes, or for an invalid probability vector.
BlurBank build_blur_bank(const std::vector<Image>& images, std::span<const int> sizes,
                         std::span<const double> probs);

// Kernel index drawn from the bank's selection probabilities.
int sample_scale(Rng& rng, const BlurBank& bank);

}  // namespace nerfocus
