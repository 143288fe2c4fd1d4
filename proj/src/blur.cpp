#include "nerfocus/blur.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nerfocus {

std::vector<double> gaussian_kernel(int size) {
    if (size < 1 || size % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: size must be odd and positive");
    if (size == 1) return {1.0};
    int radius = (size - 1) / 2;
    double sigma = size / 4.0;
    std::vector<double> taps(size);
    double sum = 0;
    for (int i = -radius; i <= radius; ++i) {
        double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        taps[i + radius] = v;
        sum += v;
    }
    for (double& t : taps) t /= sum;
    return taps;
}

namespace {

// Horizontal pass with clamped edges; transposed use gives the vertical pass.
void convolve_rows(const Image& src, Image& dst, const std::vector<double>& taps) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                int xi = std::clamp(x + i, 0, src.width - 1);
                const float* p = src.pixel(xi, y);
                double w = taps[i + radius];
                acc[0] += w * p[0];
                acc[1] += w * p[1];
                acc[2] += w * p[2];
            }
            float* q = dst.pixel(x, y);
            q[0] = float(acc[0]);
            q[1] = float(acc[1]);
            q[2] = float(acc[2]);
        }
}

void convolve_cols(const Image& src, Image& dst, const std::vector<double>& taps) {
    int radius = (static_cast<int>(taps.size()) - 1) / 2;
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x) {
            double acc[3] = {0, 0, 0};
            for (int i = -radius; i <= radius; ++i) {
                int yi = std::clamp(y + i, 0, src.height - 1);
                const float* p = src.pixel(x, yi);
                double w = taps[i + radius];
                acc[0] += w * p[0];
                acc[1] += w * p[1];
                acc[2] += w * p[2];
            }
            float* q = dst.pixel(x, y);
            q[0] = float(acc[0]);
            q[1] = float(acc[1]);
            q[2] = float(acc[2]);
        }
}

}  // namespace

Image gaussian_blur(const Image& img, int size) {
    if (size == 1) return img;
    auto taps = gaussian_kernel(size);
    Image tmp(img.width, img.height), out(img.width, img.height);
    convolve_rows(img, tmp, taps);
    convolve_cols(tmp, out, taps);
    return out;
}

BlurBank build_blur_bank(const std::vector<Image>& images, std::span<const int> sizes,
                         std::span<const double> probs) {
    if (sizes.empty() || sizes.size() != probs.size())
        throw std::invalid_argument("build_blur_bank: sizes/probs length mismatch");
    double psum = 0;
    for (double p : probs) {
        if (p < 0) throw std::invalid_argument("build_blur_bank: negative probability");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-9)
        throw std::invalid_argument("build_blur_bank: probabilities must sum to 1");

    BlurBank bank;
    bank.sizes.assign(sizes.begin(), sizes.end());
    bank.probs.assign(probs.begin(), probs.end());
    bank.kernels.reserve(sizes.size());
    bank.datasets.reserve(sizes.size());
    for (int s : sizes) {
        bank.kernels.push_back(gaussian_kernel(s));  // validates oddness
        std::vector<Image> blurred;
        blurred.reserve(images.size());
        for (const Image& img : images) blurred.push_back(gaussian_blur(img, s));
        bank.datasets.push_back(std::move(blurred));
    }
    return bank;
}

int sample_scale(Rng& rng, const BlurBank& bank) {
    return rng.categorical(bank.probs);
}

}  // namespace nerfocus
