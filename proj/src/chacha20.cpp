#include "wind/chacha20.hpp"

#include <cstring>

namespace wind {

namespace {

inline std::uint32_t rotl(std::uint32_t x, int n) { return (x << n) | (x >> (32 - n)); }

inline void quarter_round(std::uint32_t& a, std::uint32_t& b, std::uint32_t& c, std::uint32_t& d) {
    a += b; d ^= a; d = rotl(d, 16);
    c += d; b ^= c; b = rotl(b, 12);
    a += b; d ^= a; d = rotl(d, 8);
    c += d; b ^= c; b = rotl(b, 7);
}

inline std::uint32_t load_le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
           (std::uint32_t(p[3]) << 24);
}

} // namespace

ChaCha20Stream::ChaCha20Stream(const std::array<std::uint8_t, 32>& key) {
    state_[0] = 0x61707865; // "expa"
    state_[1] = 0x3320646e; // "nd 3"
    state_[2] = 0x79622d32; // "2-by"
    state_[3] = 0x6b206574; // "te k"
    for (int i = 0; i < 8; ++i) state_[4 + i] = load_le32(key.data() + 4 * i);
    state_[12] = 0;              // block counter
    state_[13] = state_[14] = state_[15] = 0; // zero nonce
}

void ChaCha20Stream::refill() {
    std::uint32_t w[16];
    std::memcpy(w, state_.data(), sizeof(w));
    for (int r = 0; r < 10; ++r) {
        quarter_round(w[0], w[4], w[8], w[12]);
        quarter_round(w[1], w[5], w[9], w[13]);
        quarter_round(w[2], w[6], w[10], w[14]);
        quarter_round(w[3], w[7], w[11], w[15]);
        quarter_round(w[0], w[5], w[10], w[15]);
        quarter_round(w[1], w[6], w[11], w[12]);
        quarter_round(w[2], w[7], w[8], w[13]);
        quarter_round(w[3], w[4], w[9], w[14]);
    }
    for (int i = 0; i < 16; ++i) {
        std::uint32_t v = w[i] + state_[i];
        block_[4 * i] = std::uint8_t(v);
        block_[4 * i + 1] = std::uint8_t(v >> 8);
        block_[4 * i + 2] = std::uint8_t(v >> 16);
        block_[4 * i + 3] = std::uint8_t(v >> 24);
    }
    state_[12] += 1;
    pos_ = 0;
}

std::uint64_t ChaCha20Stream::next_u64() {
    if (pos_ + 8 > 64) refill();
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | block_[pos_ + i];
    pos_ += 8;
    return v;
}

void ChaCha20Stream::fill(std::uint8_t* out, std::size_t len) {
    while (len > 0) {
        if (pos_ == 64) refill();
        std::size_t take = std::min(len, std::size_t(64) - pos_);
        std::memcpy(out, block_.data() + pos_, take);
        out += take;
        pos_ += take;
        len -= take;
    }
}

} // namespace wind
