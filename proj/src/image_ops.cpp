#include "wind/image_ops.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace wind {

void rotate_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w, double degrees) {
    const double th = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(th), s = std::sin(th);
    const double cy = (double(h) - 1.0) / 2.0;
    const double cx = (double(w) - 1.0) / 2.0;
    for (std::uint32_t i = 0; i < h; ++i) {
        double yr = double(i) - cy;
        for (std::uint32_t j = 0; j < w; ++j) {
            double xr = double(j) - cx;
            // inverse map: source position that lands on (i, j)
            double sy = cy + c * yr + s * xr;
            double sx = cx - s * yr + c * xr;
            double out = 0.0;
            double fy = std::floor(sy), fx = std::floor(sx);
            int y0 = int(fy), x0 = int(fx);
            double wy = sy - fy, wx = sx - fx;
            for (int dy = 0; dy <= 1; ++dy) {
                int yy = y0 + dy;
                if (yy < 0 || yy >= int(h)) continue;
                double wyv = dy ? wy : 1.0 - wy;
                for (int dx = 0; dx <= 1; ++dx) {
                    int xx = x0 + dx;
                    if (xx < 0 || xx >= int(w)) continue;
                    out += wyv * (dx ? wx : 1.0 - wx) * src[std::size_t(yy) * w + xx];
                }
            }
            dst[std::size_t(i) * w + j] = float(out);
        }
    }
}

void resample_grid(const float* src, std::uint32_t sh, std::uint32_t sw, float* dst,
                   std::uint32_t oh, std::uint32_t ow, double step_y, double step_x, double oy,
                   double ox) {
    for (std::uint32_t i = 0; i < oh; ++i) {
        double sy = oy + double(i) * step_y;
        for (std::uint32_t j = 0; j < ow; ++j) {
            double sx = ox + double(j) * step_x;
            double out = 0.0;
            double fy = std::floor(sy), fx = std::floor(sx);
            int y0 = int(fy), x0 = int(fx);
            double wy = sy - fy, wx = sx - fx;
            for (int dy = 0; dy <= 1; ++dy) {
                int yy = y0 + dy;
                if (yy < 0 || yy >= int(sh)) continue;
                double wyv = dy ? wy : 1.0 - wy;
                for (int dx = 0; dx <= 1; ++dx) {
                    int xx = x0 + dx;
                    if (xx < 0 || xx >= int(sw)) continue;
                    out += wyv * (dx ? wx : 1.0 - wx) * src[std::size_t(yy) * sw + xx];
                }
            }
            dst[std::size_t(i) * ow + j] = float(out);
        }
    }
}

void box_blur_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w,
                   std::uint32_t k) {
    if (k == 0) throw std::invalid_argument("box_blur: kernel must be >= 1");
    auto reflect = [](int idx, int n) {
        // reflect-101-free simple mirror: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
        while (idx < 0 || idx >= n) {
            if (idx < 0) idx = -idx - 1;
            if (idx >= n) idx = 2 * n - idx - 1;
        }
        return idx;
    };
    const int pad = int(k) / 2;
    const double inv = 1.0 / (double(k) * k);
    // separable: horizontal pass then vertical
    std::vector<double> tmp(std::size_t(h) * w, 0.0);
    for (std::uint32_t i = 0; i < h; ++i) {
        for (std::uint32_t j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int d = -pad; d < int(k) - pad; ++d)
                acc += src[std::size_t(i) * w + reflect(int(j) + d, int(w))];
            tmp[std::size_t(i) * w + j] = acc;
        }
    }
    for (std::uint32_t i = 0; i < h; ++i) {
        for (std::uint32_t j = 0; j < w; ++j) {
            double acc = 0.0;
            for (int d = -pad; d < int(k) - pad; ++d)
                acc += tmp[std::size_t(reflect(int(i) + d, int(h))) * w + j];
            dst[std::size_t(i) * w + j] = float(acc * inv);
        }
    }
}

namespace {

// Orthonormal 8-point DCT-II basis, row r sampled at n.
struct Dct8 {
    double basis[8][8];
    Dct8() {
        for (int r = 0; r < 8; ++r) {
            double a = r == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int n = 0; n < 8; ++n)
                basis[r][n] = a * std::cos(std::numbers::pi * (2 * n + 1) * r / 16.0);
        }
    }
};
const Dct8 kDct8;

} // namespace

void dct_quantize_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w,
                       double step) {
    if (step <= 0) throw std::invalid_argument("dct_quantize: step must be positive");
    for (std::uint32_t by = 0; by < h; by += 8) {
        for (std::uint32_t bx = 0; bx < w; bx += 8) {
            std::uint32_t bh = std::min<std::uint32_t>(8, h - by);
            std::uint32_t bw = std::min<std::uint32_t>(8, w - bx);
            double blk[8][8] = {};
            for (std::uint32_t i = 0; i < bh; ++i)
                for (std::uint32_t j = 0; j < bw; ++j)
                    blk[i][j] = src[std::size_t(by + i) * w + (bx + j)];
            double coef[8][8] = {};
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    double acc = 0.0;
                    for (int i = 0; i < 8; ++i)
                        for (int j = 0; j < 8; ++j)
                            acc += kDct8.basis[u][i] * kDct8.basis[v][j] * blk[i][j];
                    coef[u][v] = std::round(acc / step) * step;
                }
            for (std::uint32_t i = 0; i < bh; ++i)
                for (std::uint32_t j = 0; j < bw; ++j) {
                    double acc = 0.0;
                    for (int u = 0; u < 8; ++u)
                        for (int v = 0; v < 8; ++v)
                            acc += kDct8.basis[u][i] * kDct8.basis[v][j] * coef[u][v];
                    dst[std::size_t(by + i) * w + (bx + j)] = float(acc);
                }
        }
    }
}

namespace {

template <typename GridOp>
LatentTensor per_channel(const LatentTensor& t, GridOp&& op) {
    LatentTensor out(t.shape);
    for (std::uint32_t c = 0; c < t.shape.c; ++c) op(t.channel(c), out.channel(c));
    return out;
}

} // namespace

LatentTensor rotate_tensor(const LatentTensor& t, double degrees) {
    return per_channel(t, [&](const float* s, float* d) {
        rotate_grid(s, d, t.shape.h, t.shape.w, degrees);
    });
}

LatentTensor box_blur_tensor(const LatentTensor& t, std::uint32_t k) {
    return per_channel(t, [&](const float* s, float* d) {
        box_blur_grid(s, d, t.shape.h, t.shape.w, k);
    });
}

LatentTensor dct_quantize_tensor(const LatentTensor& t, double step) {
    return per_channel(t, [&](const float* s, float* d) {
        dct_quantize_grid(s, d, t.shape.h, t.shape.w, step);
    });
}

LatentTensor crop_upscale_tensor(const LatentTensor& t, std::uint32_t s, std::uint32_t oy,
                                 std::uint32_t ox) {
    const std::uint32_t h = t.shape.h, w = t.shape.w;
    if (s < 2 || s > h || s > w || oy + s > h || ox + s > w)
        throw std::invalid_argument("crop_upscale: window out of bounds");
    LatentTensor out(t.shape);
    std::vector<float> crop(std::size_t(s) * s);
    for (std::uint32_t c = 0; c < t.shape.c; ++c) {
        const float* src = t.channel(c);
        for (std::uint32_t i = 0; i < s; ++i)
            for (std::uint32_t j = 0; j < s; ++j)
                crop[std::size_t(i) * s + j] = src[std::size_t(oy + i) * w + (ox + j)];
        resample_grid(crop.data(), s, s, out.channel(c), h, w, double(s - 1) / double(h - 1),
                      double(s - 1) / double(w - 1));
    }
    return out;
}

LatentTensor downscale_paste_tensor(const LatentTensor& t, std::uint32_t s, std::uint32_t oy,
                                    std::uint32_t ox) {
    const std::uint32_t h = t.shape.h, w = t.shape.w;
    if (s < 2 || s > h || s > w || oy + s > h || ox + s > w)
        throw std::invalid_argument("downscale_paste: window out of bounds");
    LatentTensor out(t.shape);
    std::vector<float> down(std::size_t(s) * s);
    for (std::uint32_t c = 0; c < t.shape.c; ++c) {
        resample_grid(t.channel(c), h, w, down.data(), s, s, double(h - 1) / double(s - 1),
                      double(w - 1) / double(s - 1));
        float* dst = out.channel(c);
        for (std::uint32_t i = 0; i < s; ++i)
            for (std::uint32_t j = 0; j < s; ++j)
                dst[std::size_t(oy + i) * w + (ox + j)] = down[std::size_t(i) * s + j];
    }
    return out;
}

} // namespace wind
