#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace wind {

struct TensorShape {
    std::uint32_t c = 0, h = 0, w = 0;

    std::size_t elems() const { return std::size_t(c) * h * w; }
    bool operator==(const TensorShape&) const = default;
};

/// Real-valued C x H x W array: the working domain for noises, latent "images"
/// and reconstructions. Flat layout is channel-major, then row-major (h, w).
struct LatentTensor {
    TensorShape shape;
    std::vector<float> data;

    LatentTensor() = default;
    explicit LatentTensor(TensorShape s) : shape(s), data(s.elems(), 0.0f) {}

    float& at(std::uint32_t c, std::uint32_t h, std::uint32_t w) {
        return data[(std::size_t(c) * shape.h + h) * shape.w + w];
    }
    float at(std::uint32_t c, std::uint32_t h, std::uint32_t w) const {
        return data[(std::size_t(c) * shape.h + h) * shape.w + w];
    }
    /// Pointer to the start of one channel's HxW grid.
    float* channel(std::uint32_t c) { return data.data() + std::size_t(c) * shape.h * shape.w; }
    const float* channel(std::uint32_t c) const {
        return data.data() + std::size_t(c) * shape.h * shape.w;
    }

    std::size_t size() const { return data.size(); }
};

double tensor_mean(const LatentTensor& t);
/// Population standard deviation over all elements.
double tensor_std(const LatentTensor& t);
bool tensor_finite(const LatentTensor& t);

double tensor_dot(const LatentTensor& a, const LatentTensor& b);
double tensor_norm(const LatentTensor& t);
/// Cosine over flattened tensors; throws on zero norm.
double tensor_cosine(const LatentTensor& a, const LatentTensor& b);
double tensor_l2(const LatentTensor& a, const LatentTensor& b);

inline void require_same_shape(const LatentTensor& a, const LatentTensor& b) {
    if (!(a.shape == b.shape)) throw std::invalid_argument("tensor shape mismatch");
}

/// Latent-coordinate "generated image"; same layout as the noise it came from.
using ChannelImage = LatentTensor;

} // namespace wind
