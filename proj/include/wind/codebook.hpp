#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wind/chacha20.hpp"
#include "wind/tensor.hpp"

namespace wind {

using Seed32 = std::array<std::uint8_t, 32>;

constexpr std::size_t kMinSaltLen = 32;

/// Reproducible noise family: N seeds derived from a secret salt, M groups.
struct CodebookSpec {
    std::uint64_t n = 0;
    std::uint64_t m = 0;
    std::vector<std::uint8_t> salt;
    TensorShape shape;

    void validate() const;
    /// Number of indices i in [0, n) with i % m == g.
    std::uint64_t group_size(std::uint64_t g) const { return (n - g + m - 1) / m; }
};

/// seed = SHA-256(LE64(i) || salt). Deterministic; throws on bad index/salt.
Seed32 derive_seed(std::uint64_t i, std::span<const std::uint8_t> salt, std::uint64_t n);

/// Seed derivation for internal randomness streams: SHA-256(tag || LE64 parts).
/// Distinct tags keep channel, attack and projection streams independent.
Seed32 tagged_seed(std::string_view tag, std::initializer_list<std::uint64_t> parts);

/// Deterministic standard-normal stream: ChaCha20 keystream -> LE u64 words ->
/// uniforms u = ((w >> 11) + 1) * 2^-53 in (0, 1] -> Box-Muller pairs.
class GaussianStream {
public:
    explicit GaussianStream(const Seed32& seed) : ks_(seed) {}

    double next();
    double next_uniform();
    /// Uniform integer in [0, k).
    std::uint64_t next_below(std::uint64_t k);

private:
    ChaCha20Stream ks_;
    double pending_ = 0.0;
    bool has_pending_ = false;
};

/// Fill a tensor from the stream construction above, channel-major then (h, w)
/// row-major; a trailing unused Box-Muller partner is discarded.
LatentTensor sample_noise(const Seed32& seed, TensorShape shape);

std::uint64_t group_of(std::uint64_t i, std::uint64_t m);

/// First eight seed bytes as a little-endian integer; handy for deriving
/// plain 64-bit sub-seeds from the tagged stream.
inline std::uint64_t seed_to_u64(const Seed32& s) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | s[std::size_t(i)];
    return v;
}

/// Streams (i, noise) for every index of one group, ascending, constant memory.
/// Sharding: stride/offset partitions the group deterministically.
class GroupStream {
public:
    GroupStream(const CodebookSpec& spec, std::uint64_t g, std::uint64_t shard = 0,
                std::uint64_t n_shards = 1);

    bool next(std::uint64_t& index, LatentTensor& noise);

private:
    const CodebookSpec& spec_;
    std::uint64_t next_i_;
    std::uint64_t step_;
};

} // namespace wind
