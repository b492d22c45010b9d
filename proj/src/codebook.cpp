#include "wind/codebook.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "wind/sha256.hpp"

namespace wind {

void CodebookSpec::validate() const {
    if (n == 0) throw std::invalid_argument("codebook: n must be positive");
    if (m == 0 || m > n) throw std::invalid_argument("codebook: need 1 <= m <= n");
    if (salt.size() < kMinSaltLen) throw std::invalid_argument("codebook: salt shorter than 32 bytes");
    if (shape.c == 0 || shape.h == 0 || shape.w == 0)
        throw std::invalid_argument("codebook: shape dims must be positive");
}

namespace {

void append_le64(Sha256& h, std::uint64_t v) {
    std::uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = std::uint8_t(v >> (8 * i));
    h.update(b, 8);
}

} // namespace

Seed32 derive_seed(std::uint64_t i, std::span<const std::uint8_t> salt, std::uint64_t n) {
    if (i >= n) throw std::out_of_range("derive_seed: index out of range");
    if (salt.size() < kMinSaltLen) throw std::invalid_argument("derive_seed: salt shorter than 32 bytes");
    Sha256 h;
    append_le64(h, i);
    h.update(salt);
    return h.finish();
}

Seed32 tagged_seed(std::string_view tag, std::initializer_list<std::uint64_t> parts) {
    Sha256 h;
    h.update(tag.data(), tag.size());
    for (std::uint64_t p : parts) append_le64(h, p);
    return h.finish();
}

double GaussianStream::next_uniform() {
    std::uint64_t w = ks_.next_u64();
    return double((w >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (has_pending_) {
        has_pending_ = false;
        return pending_;
    }
    double u1 = next_uniform();
    double u2 = next_uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * std::numbers::pi * u2;
    pending_ = r * std::sin(a);
    has_pending_ = true;
    return r * std::cos(a);
}

std::uint64_t GaussianStream::next_below(std::uint64_t k) {
    auto v = std::uint64_t(next_uniform() * double(k));
    return v >= k ? k - 1 : v;
}

LatentTensor sample_noise(const Seed32& seed, TensorShape shape) {
    if (shape.elems() == 0) throw std::invalid_argument("sample_noise: empty shape");
    LatentTensor t(shape);
    GaussianStream gs(seed);
    std::size_t n = t.size();
    std::size_t i = 0;
    for (; i + 1 < n; i += 2) {
        double u1 = gs.next_uniform();
        double u2 = gs.next_uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        t.data[i] = float(r * std::cos(a));
        t.data[i + 1] = float(r * std::sin(a));
    }
    if (i < n) {
        double u1 = gs.next_uniform();
        double u2 = gs.next_uniform();
        t.data[i] = float(std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2));
    }
    return t;
}

std::uint64_t group_of(std::uint64_t i, std::uint64_t m) { return i % m; }

GroupStream::GroupStream(const CodebookSpec& spec, std::uint64_t g, std::uint64_t shard,
                         std::uint64_t n_shards)
    : spec_(spec), next_i_(g + shard * spec.m), step_(spec.m * n_shards) {
    if (g >= spec.m) throw std::out_of_range("stream_group: group out of range");
    if (n_shards == 0 || shard >= n_shards) throw std::invalid_argument("stream_group: bad shard");
}

bool GroupStream::next(std::uint64_t& index, LatentTensor& noise) {
    if (next_i_ >= spec_.n) return false;
    index = next_i_;
    noise = sample_noise(derive_seed(next_i_, spec_.salt, spec_.n), spec_.shape);
    next_i_ += step_;
    return true;
}

} // namespace wind
