#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nerfocus/vec.hpp"

namespace nerfocus {

// Interleaved RGB float image, values nominally in [0, 1].
struct Image {
    int width = 0, height = 0;
    std::vector<float> data;  // 3 * width * height

    Image() = default;
    Image(int w, int h) : width(w), height(h), data(size_t(3) * w * h, 0.f) {}

    float* pixel(int x, int y) { return data.data() + 3 * (size_t(y) * width + x); }
    const float* pixel(int x, int y) const {
        return data.data() + 3 * (size_t(y) * width + x);
    }
    void set(int x, int y, const Vec3& c) {
        float* p = pixel(x, y);
        p[0] = float(c.x);
        p[1] = float(c.y);
        p[2] = float(c.z);
    }
    Vec3 get(int x, int y) const {
        const float* p = pixel(x, y);
        return {p[0], p[1], p[2]};
    }
};

// 8-bit quantization used by every writer: round(clamp(v,0,1)*255).
uint8_t quantize8(float v);

void write_png(const std::string& path, const Image& img);
Image read_png(const std::string& path);

// Binary PPM (P6); the golden-test format.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

// PSNR in dB over [0,1] floats; identical images give +inf.
double psnr(const Image& a, const Image& b);

// Mean absolute 4-neighbor Laplacian of luminance over [x0,x1) x [y0,y1),
// skipping a 1-pixel border. A simple sharpness/high-frequency-energy metric.
double mean_abs_laplacian(const Image& img, int x0, int x1, int y0, int y1);

}  // namespace nerfocus
