#include "nerfocus/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <stdexcept>

namespace nerfocus {

uint8_t quantize8(float v) {
    float c = std::clamp(v, 0.f, 1.f);
    return static_cast<uint8_t>(std::lround(c * 255.f));
}

void write_png(const std::string& path, const Image& img) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "wb"), std::fclose);
    if (!fp) throw std::runtime_error("write_png: cannot open " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("write_png: libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw std::runtime_error("write_png: libpng error writing " + path);
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    std::vector<uint8_t> row(size_t(3) * img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float* p = img.pixel(x, y);
            row[3 * x + 0] = quantize8(p[0]);
            row[3 * x + 1] = quantize8(p[1]);
            row[3 * x + 2] = quantize8(p[2]);
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::string& path) {
    std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.c_str(), "rb"), std::fclose);
    if (!fp) throw std::runtime_error("read_png: cannot open " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    if (!png || !info) throw std::runtime_error("read_png: libpng init failed");
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw std::runtime_error("read_png: libpng error reading " + path);
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);
    // Normalize everything to 8-bit RGB.
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_palette_to_rgb(png);
    png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
        png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    Image img(int(png_get_image_width(png, info)), int(png_get_image_height(png, info)));
    std::vector<uint8_t> row(size_t(3) * img.width);
    for (int y = 0; y < img.height; ++y) {
        png_read_row(png, row.data(), nullptr);
        for (int x = 0; x < img.width; ++x) {
            float* p = img.pixel(x, y);
            p[0] = row[3 * x + 0] / 255.f;
            p[1] = row[3 * x + 1] / 255.f;
            p[2] = row[3 * x + 2] / 255.f;
        }
    }
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_ppm(const std::string& path, const Image& img) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("write_ppm: cannot open " + path);
    os << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(size_t(3) * img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const float* p = img.pixel(x, y);
            row[3 * x + 0] = quantize8(p[0]);
            row[3 * x + 1] = quantize8(p[1]);
            row[3 * x + 2] = quantize8(p[2]);
        }
        os.write(reinterpret_cast<const char*>(row.data()), row.size());
    }
    if (!os) throw std::runtime_error("write_ppm: write failed for " + path);
}

Image read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("read_ppm: cannot open " + path);
    std::string magic;
    int w, h, maxval;
    is >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0)
        throw std::runtime_error("read_ppm: unsupported PPM " + path);
    is.get();  // single whitespace after header
    Image img(w, h);
    std::vector<uint8_t> row(size_t(3) * w);
    for (int y = 0; y < h; ++y) {
        is.read(reinterpret_cast<char*>(row.data()), row.size());
        for (int x = 0; x < w; ++x) {
            float* p = img.pixel(x, y);
            p[0] = row[3 * x + 0] / 255.f;
            p[1] = row[3 * x + 1] / 255.f;
            p[2] = row[3 * x + 2] / 255.f;
        }
    }
    if (!is) throw std::runtime_error("read_ppm: truncated file " + path);
    return img;
}

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("psnr: image size mismatch");
    double mse = 0;
    for (size_t i = 0; i < a.data.size(); ++i) {
        double d = double(a.data[i]) - double(b.data[i]);
        mse += d * d;
    }
    mse /= double(a.data.size());
    if (mse == 0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

double mean_abs_laplacian(const Image& img, int x0, int x1, int y0, int y1) {
    auto luma = [&](int x, int y) {
        const float* p = img.pixel(x, y);
        return 0.2126 * p[0] + 0.7152 * p[1] + 0.0722 * p[2];
    };
    x0 = std::max(x0, 1);
    y0 = std::max(y0, 1);
    x1 = std::min(x1, img.width - 1);
    y1 = std::min(y1, img.height - 1);
    double sum = 0;
    int n = 0;
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
            double l = 4 * luma(x, y) - luma(x - 1, y) - luma(x + 1, y) -
                       luma(x, y - 1) - luma(x, y + 1);
            sum += std::abs(l);
            ++n;
        }
    return n > 0 ? sum / n : 0.0;
}

}  // namespace nerfocus
