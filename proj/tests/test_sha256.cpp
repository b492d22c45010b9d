#include <doctest.h>

#include <openssl/sha.h>

#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "wind/sha256.hpp"

using namespace wind;

namespace {

std::string hash_hex(const std::string& msg) {
    Sha256 h;
    h.update(msg.data(), msg.size());
    return hex_encode(h.finish());
}

} // namespace

TEST_CASE("FIPS 180-4 reference vectors") {
    CHECK(hash_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hash_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(hash_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
          "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
    CHECK(hash_hex(std::string(1000000, 'a')) ==
          "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST_CASE("streaming equals one-shot across chunk boundaries") {
    std::string msg(300, '\0');
    for (std::size_t i = 0; i < msg.size(); ++i) msg[i] = char(i * 7 + 1);
    auto whole = hash_hex(msg);
    for (std::size_t split : {1u, 55u, 56u, 63u, 64u, 65u, 128u, 299u}) {
        Sha256 h;
        h.update(msg.data(), split);
        h.update(msg.data() + split, msg.size() - split);
        CHECK(hex_encode(h.finish()) == whole);
    }
}

TEST_CASE("agrees with an independent implementation on random inputs") {
    std::mt19937_64 rng(42);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::uint8_t> msg(rng() % 500);
        for (auto& b : msg) b = std::uint8_t(rng());
        unsigned char ref[32];
        SHA256(msg.data(), msg.size(), ref);
        auto ours = Sha256::hash(msg);
        CHECK(std::memcmp(ours.data(), ref, 32) == 0);
    }
}
