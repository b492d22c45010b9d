#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace wind {

/// Streaming SHA-256 (FIPS 180-4).
class Sha256 {
public:
    using Digest = std::array<std::uint8_t, 32>;

    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    void update(std::span<const std::uint8_t> data) { update(data.data(), data.size()); }
    Digest finish();

    static Digest hash(std::span<const std::uint8_t> data) {
        Sha256 h;
        h.update(data);
        return h.finish();
    }

private:
    void process_block(const std::uint8_t* block);

    std::array<std::uint32_t, 8> state_{};
    std::array<std::uint8_t, 64> buffer_{};
    std::uint64_t total_len_ = 0;
    std::size_t buffer_len_ = 0;
};

std::string hex_encode(std::span<const std::uint8_t> bytes);

} // namespace wind
