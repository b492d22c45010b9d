#pragma once

#include <array>
#include <cstdint>

namespace wind {

/// ChaCha20 keystream (RFC 8439): 32-byte key, 12-byte zero nonce, 32-bit block
/// counter starting at 0. Only the keystream is needed here, never encryption.
class ChaCha20Stream {
public:
    explicit ChaCha20Stream(const std::array<std::uint8_t, 32>& key);

    /// Next keystream byte-chunk as a little-endian 64-bit word.
    std::uint64_t next_u64();

    void fill(std::uint8_t* out, std::size_t len);

private:
    void refill();

    std::array<std::uint32_t, 16> state_;
    std::array<std::uint8_t, 64> block_{};
    std::size_t pos_ = 64;
};

} // namespace wind
