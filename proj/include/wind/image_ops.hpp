#pragma once

#include <cstdint>

#include "wind/tensor.hpp"

namespace wind {

/// Per-grid 2-D kernels shared by the attack battery and the detector's
/// alignment search. All act on one H x W float grid unless noted.

/// Bilinear rotation about the grid center ((H-1)/2, (W-1)/2), zero fill.
void rotate_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w, double degrees);

/// Resample src (sh x sw) onto an oh x ow grid: dst[i,j] = src(oy + i*step_y, ox + j*step_x),
/// bilinear, zero outside.
void resample_grid(const float* src, std::uint32_t sh, std::uint32_t sw, float* dst,
                   std::uint32_t oh, std::uint32_t ow, double step_y, double step_x,
                   double oy = 0.0, double ox = 0.0);

/// k x k box filter, reflect padding.
void box_blur_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w, std::uint32_t k);

/// Blockwise 8x8 orthonormal DCT, quantize every coefficient with a flat step,
/// inverse DCT. Grid dims need not be multiples of 8; edge blocks are clamped.
void dct_quantize_grid(const float* src, float* dst, std::uint32_t h, std::uint32_t w, double step);

// Tensor-level wrappers applying the grid op to every channel.
LatentTensor rotate_tensor(const LatentTensor& t, double degrees);
LatentTensor box_blur_tensor(const LatentTensor& t, std::uint32_t k);
LatentTensor dct_quantize_tensor(const LatentTensor& t, double step);

/// Zoom-in: take the s x s region at (oy, ox) and rescale it to the full grid.
LatentTensor crop_upscale_tensor(const LatentTensor& t, std::uint32_t s, std::uint32_t oy,
                                 std::uint32_t ox);
/// Inverse layout of crop_upscale: shrink the full grid to s x s, paste at
/// (oy, ox), zero elsewhere.
LatentTensor downscale_paste_tensor(const LatentTensor& t, std::uint32_t s, std::uint32_t oy,
                                    std::uint32_t ox);

} // namespace wind
