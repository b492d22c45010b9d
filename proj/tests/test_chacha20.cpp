#include <doctest.h>

#include <array>
#include <cstdint>
#include <vector>

#include "wind/chacha20.hpp"
#include "wind/sha256.hpp"

using namespace wind;

TEST_CASE("RFC 8439 A.1 keystream, zero key and nonce") {
    std::array<std::uint8_t, 32> key{};
    ChaCha20Stream ks(key);
    std::vector<std::uint8_t> block(64);
    ks.fill(block.data(), block.size());
    CHECK(hex_encode(block) ==
          "76b8e0ada0f13d90405d6ae55386bd28bdd219b8a08ded1aa836efcc8b770dc7"
          "da41597c5157488d7724e03fb8d84a376a43b8f41518a11cc387b669b2ee6586");
    // second block continues the counter
    ks.fill(block.data(), block.size());
    CHECK(hex_encode(std::span(block).subspan(0, 32)) ==
          "9f07e7be5551387a98ba977c732d080dcb0f29a048e3656912c6533e32ee7aed");
}

TEST_CASE("RFC 8439 A.1 test vector #2, key with one set bit") {
    std::array<std::uint8_t, 32> key{};
    key[31] = 1; // last key byte = 1
    ChaCha20Stream ks(key);
    std::vector<std::uint8_t> block(64);
    ks.fill(block.data(), block.size()); // counter 0
    ks.fill(block.data(), block.size()); // counter 1 = the published vector
    CHECK(hex_encode(std::span(block).subspan(0, 32)) ==
          "3aeb5224ecf849929b9d828db1ced4dd832025e8018b8160b82284f3c949aa5a");
}

TEST_CASE("u64 consumption is byte-identical to the little-endian keystream") {
    std::array<std::uint8_t, 32> key{};
    for (int i = 0; i < 32; ++i) key[std::size_t(i)] = std::uint8_t(i * 3 + 1);
    ChaCha20Stream a(key), b(key);
    std::vector<std::uint8_t> bytes(160);
    a.fill(bytes.data(), bytes.size());
    for (std::size_t w = 0; w < bytes.size() / 8; ++w) {
        std::uint64_t expect = 0;
        for (int i = 7; i >= 0; --i) expect = (expect << 8) | bytes[w * 8 + std::size_t(i)];
        CHECK(b.next_u64() == expect);
    }
}
