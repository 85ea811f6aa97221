// Copyright Contributors to the hravatar project
// SPDX-License-Identifier: Apache-2.0
//
#include "hra/raster.hpp"
#include "hra/parallel.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace hra {

namespace {

Eigen::Matrix2d covariance2d(const Vec3d &pv, const Mat3f &basis, const Camera &camera) {
    const double z = pv.z();
    Eigen::Matrix<double, 2, 3> j;
    j << camera.fx / z, 0.0, -camera.fx * pv.x() / (z * z), 0.0, camera.fy / z, -camera.fy * pv.y() / (z * z);
    const Eigen::Matrix<double, 2, 3> m = j * camera.rotation.cast<double>() * basis.cast<double>();
    Eigen::Matrix2d cov = m * m.transpose();
    cov(0, 0) += kLowPassDilation;
    cov(1, 1) += kLowPassDilation;
    return cov;
}

} // namespace

Eigen::Matrix2f projected_covariance(const Vec3f &mean, const Mat3f &basis, const Camera &camera) {
    return covariance2d(camera.to_view(mean).cast<double>(), basis, camera).cast<float>();
}

std::optional<ProjectedSplat> project_splat(const Vec3f &mean, const Mat3f &basis, const Camera &camera,
                                            float radius_cutoff) {
    const Vec3d pv = (camera.rotation.cast<double>() * mean.cast<double>() + camera.translation.cast<double>());
    if (!(pv.z() >= camera.near)) return std::nullopt;
    const Eigen::Matrix2d cov = covariance2d(pv, basis, camera);
    const double a = cov(0, 0), b = cov(0, 1), c = cov(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0)) return std::nullopt;
    const double mid    = 0.5 * (a + c);
    const double lambda = mid + std::sqrt(std::max(0.0, mid * mid - det));
    ProjectedSplat p;
    p.mean    = Vec2f(float(camera.fx * pv.x() / pv.z() + camera.cx), float(camera.fy * pv.y() / pv.z() + camera.cy));
    p.conic_a = float(c / det);
    p.conic_b = float(-b / det);
    p.conic_c = float(a / det);
    p.radius  = float(radius_cutoff * std::sqrt(lambda));
    p.depth   = float(pv.z());
    p.color   = Vec3f::Zero();
    p.opacity = 0.0f;
    return p;
}

Image composite(std::span<const ProjectedSplat> sorted, std::uint32_t width, std::uint32_t height,
                const CompositeOptions &options) {
    Image img(width, height);
    if (width == 0 || height == 0) return img;
    const std::uint32_t ts = std::max<std::uint32_t>(1, options.tile_size);
    const std::uint32_t tx = (width + ts - 1) / ts, ty = (height + ts - 1) / ts;

    // Stable binning: each tile list keeps the global order.
    std::vector<std::vector<std::uint32_t>> tiles(std::size_t(tx) * ty);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto &s = sorted[i];
        const float x0 = std::ceil(s.mean.x() - s.radius), x1 = std::floor(s.mean.x() + s.radius);
        const float y0 = std::ceil(s.mean.y() - s.radius), y1 = std::floor(s.mean.y() + s.radius);
        if (!(x1 >= 0.0f && y1 >= 0.0f && x0 <= float(width - 1) && y0 <= float(height - 1)) || x0 > x1 || y0 > y1)
            continue;
        const auto px0 = std::uint32_t(std::max(0.0f, x0)), px1 = std::uint32_t(std::min(float(width - 1), x1));
        const auto py0 = std::uint32_t(std::max(0.0f, y0)), py1 = std::uint32_t(std::min(float(height - 1), y1));
        for (std::uint32_t by = py0 / ts; by <= py1 / ts; ++by)
            for (std::uint32_t bx = px0 / ts; bx <= px1 / ts; ++bx)
                tiles[std::size_t(by) * tx + bx].push_back(static_cast<std::uint32_t>(i));
    }

    // Splat-major within a tile: each splat touches only the pixels of its box.
    // Every pixel still sees the tile list in order, so the result matches a
    // pixel-major loop bit for bit.
    parallel_for(options.threads, tiles.size(), [&](std::size_t b, std::size_t e, unsigned) {
        std::vector<float> trans(std::size_t(ts) * ts);
        std::vector<Vec3f> color(std::size_t(ts) * ts);
        for (std::size_t tile = b; tile < e; ++tile) {
            const auto &list = tiles[tile];
            const std::uint32_t bx = std::uint32_t(tile % tx), by = std::uint32_t(tile / tx);
            const std::uint32_t x0 = bx * ts, y0 = by * ts;
            const std::uint32_t xe = std::min(width, x0 + ts), ye = std::min(height, y0 + ts);
            const std::uint32_t tw = xe - x0;
            std::size_t live = std::size_t(tw) * (ye - y0);
            std::fill(trans.begin(), trans.end(), 1.0f);
            std::fill(color.begin(), color.end(), Vec3f::Zero());
            for (auto idx : list) {
                const auto &s = sorted[idx];
                // One pixel of slack; the exact box test below decides.
                const long sx0 = std::max<long>(x0, long(std::floor(s.mean.x() - s.radius)) - 1);
                const long sx1 = std::min<long>(xe - 1, long(std::ceil(s.mean.x() + s.radius)) + 1);
                const long sy0 = std::max<long>(y0, long(std::floor(s.mean.y() - s.radius)) - 1);
                const long sy1 = std::min<long>(ye - 1, long(std::ceil(s.mean.y() + s.radius)) + 1);
                for (long y = sy0; y <= sy1; ++y) {
                    const float dy = s.mean.y() - float(y);
                    if (std::abs(dy) > s.radius) continue;
                    for (long x = sx0; x <= sx1; ++x) {
                        const std::size_t k = std::size_t(y - y0) * tw + std::size_t(x - x0);
                        float &t            = trans[k];
                        if (t < kMinTransmittance) continue;
                        const float dx = s.mean.x() - float(x);
                        if (std::abs(dx) > s.radius) continue;
                        const float power = -0.5f * (s.conic_a * dx * dx + s.conic_c * dy * dy) - s.conic_b * dx * dy;
                        if (power > 0.0f) continue;
                        const float alpha = std::min(kMaxAlpha, s.opacity * std::exp(power));
                        if (alpha < kMinAlpha) continue;
                        color[k] += (t * alpha) * s.color;
                        t *= 1.0f - alpha;
                        if (t < kMinTransmittance) --live;
                    }
                }
                if (live == 0) break;
            }
            for (std::uint32_t y = y0; y < ye; ++y)
                for (std::uint32_t x = x0; x < xe; ++x) {
                    const std::size_t k = std::size_t(y - y0) * tw + (x - x0);
                    std::uint8_t *p     = img.rgba.data() + (std::size_t(y) * width + x) * 4;
                    p[0] = to_unorm8(color[k].x());
                    p[1] = to_unorm8(color[k].y());
                    p[2] = to_unorm8(color[k].z());
                    p[3] = to_unorm8(1.0f - trans[k]);
                }
        }
    });
    return img;
}

std::vector<std::uint8_t> encode_ppm(const Image &image) {
    const std::string header = "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + std::size_t(image.width) * image.height * 3);
    for (std::size_t i = 0; i < std::size_t(image.width) * image.height; ++i)
        out.insert(out.end(), image.rgba.begin() + i * 4, image.rgba.begin() + i * 4 + 3);
    return out;
}

void write_ppm(const Image &image, const std::filesystem::path &path) {
    const auto bytes = encode_ppm(image);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char *>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path &path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::string magic;
    std::uint32_t w = 0, h = 0, maxval = 0;
    f >> magic >> w >> h >> maxval;
    if (magic != "P6" || maxval != 255 || !f) throw FormatError("unsupported PPM: " + path.string());
    f.get();
    Image img(w, h);
    std::vector<char> rgb(std::size_t(w) * h * 3);
    f.read(rgb.data(), std::streamsize(rgb.size()));
    if (!f) throw FormatError("truncated PPM: " + path.string());
    for (std::size_t i = 0; i < std::size_t(w) * h; ++i) {
        for (int c = 0; c < 3; ++c) img.rgba[i * 4 + c] = std::uint8_t(rgb[i * 3 + c]);
        img.rgba[i * 4 + 3] = 255;
    }
    return img;
}

void write_png(const Image &image, const std::filesystem::path &path) {
    std::unique_ptr<FILE, int (*)(FILE *)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
    if (!fp) throw IoError("cannot open " + path.string() + " for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info  = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, nullptr);
        throw std::runtime_error("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png write failed: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::uint32_t y = 0; y < image.height; ++y)
        png_write_row(png, const_cast<png_bytep>(image.rgba.data() + std::size_t(y) * image.width * 4));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path &path) {
    png_image img{};
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.string().c_str())) {
        const std::string msg = img.message;
        png_image_free(&img);
        if (!std::filesystem::exists(path)) throw IoError("cannot open " + path.string());
        throw FormatError("unreadable PNG " + path.string() + ": " + msg);
    }
    img.format = PNG_FORMAT_RGBA;
    Image out(img.width, img.height);
    if (!png_image_finish_read(&img, nullptr, out.rgba.data(), 0, nullptr)) {
        const std::string msg = img.message;
        png_image_free(&img);
        throw FormatError("unreadable PNG " + path.string() + ": " + msg);
    }
    return out;
}

double psnr(const Image &a, const Image &b) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("psnr: image sizes differ");
    double se = 0.0;
    const std::size_t n = std::size_t(a.width) * a.height;
    for (std::size_t i = 0; i < n; ++i)
        for (int c = 0; c < 3; ++c) {
            const double d = double(a.rgba[i * 4 + c]) - double(b.rgba[i * 4 + c]);
            se += d * d;
        }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    const double mse = se / double(n * 3);
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

PixelDiff pixel_diff(const Image &a, const Image &b, int threshold) {
    if (a.width != b.width || a.height != b.height) throw std::invalid_argument("pixel_diff: image sizes differ");
    PixelDiff d;
    const std::size_t n = std::size_t(a.width) * a.height;
    std::size_t within  = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int m = 0;
        for (int c = 0; c < 4; ++c) m = std::max(m, std::abs(int(a.rgba[i * 4 + c]) - int(b.rgba[i * 4 + c])));
        d.max_abs = std::max(d.max_abs, m);
        if (m <= threshold) ++within;
    }
    d.fraction_within = n ? double(within) / double(n) : 1.0;
    return d;
}

} // namespace hra
