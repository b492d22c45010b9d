#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "wind/channel.hpp"
#include "wind/codebook.hpp"
#include "wind/fft2d.hpp"
#include "wind/group_identifier.hpp"
#include "wind/image_ops.hpp"

using namespace wind;

namespace {

const TensorShape kShape{4, 64, 64};

LatentTensor noise(std::uint64_t k) {
    return sample_noise(tagged_seed("test.gid", {k}), kShape);
}

SearchConfig no_search() {
    SearchConfig s;
    s.enable_rotation = false;
    s.enable_window = false;
    return s;
}

} // namespace

TEST_CASE("ring count covers the group count") {
    CHECK(rings_for_groups(1) == 0);
    CHECK(rings_for_groups(2) == 1);
    CHECK(rings_for_groups(32) == 5);
    CHECK(rings_for_groups(128) == 7);
    CHECK(rings_for_groups(2048) == 11);
    CHECK(rings_for_groups(1000) == 10);
}

TEST_CASE("clean round trip recovers every group, M = 32") {
    RingGeometry geo = RingGeometry::for_groups(32);
    for (std::uint64_t g = 0; g < 32; ++g) {
        for (int rep = 0; rep < 5; ++rep) {
            LatentTensor z = noise(g * 100 + std::uint64_t(rep));
            auto res = extract_group(embed_group(z, g, 32, geo), 32, geo, no_search());
            CHECK(res.group == g);
            CHECK(res.score > 0.9); // embed overwrites, so ring means are exact
        }
    }
}

TEST_CASE("clean round trip property at larger group counts") {
    for (std::uint64_t m : {std::uint64_t(128), std::uint64_t(2048)}) {
        RingGeometry geo = RingGeometry::for_groups(m);
        GaussianStream gs(tagged_seed("test.gid.pick", {m}));
        for (int rep = 0; rep < 40; ++rep) {
            std::uint64_t g = gs.next_below(m);
            LatentTensor z = noise(m + std::uint64_t(rep));
            auto res = extract_group(embed_group(z, g, m, geo), m, geo, no_search());
            CHECK(res.group == g);
            CHECK(res.score > 0.9);
        }
    }
}

TEST_CASE("re-embedding the same group is idempotent") {
    RingGeometry geo = RingGeometry::for_groups(32);
    LatentTensor z = noise(1);
    LatentTensor once = embed_group(z, 21, 32, geo);
    LatentTensor twice = embed_group(once, 21, 32, geo);
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(std::abs(once.data[i] - twice.data[i]) < 1e-5);
}

TEST_CASE("embedding is local: other channels bitwise identical, outside coefficients kept") {
    RingGeometry geo = RingGeometry::for_groups(32);
    LatentTensor z = noise(2);
    LatentTensor e = embed_group(z, 9, 32, geo);
    for (std::uint32_t c = 0; c < kShape.c; ++c) {
        if (c == geo.channel) continue;
        for (std::uint32_t i = 0; i < kShape.h * kShape.w; ++i)
            CHECK(z.channel(c)[i] == e.channel(c)[i]);
    }
    // coefficients just outside the outermost ring are preserved (float I/O noise only)
    CenteredFft fft(kShape.h, kShape.w);
    std::vector<std::complex<double>> sz(64 * 64), se(64 * 64);
    fft.forward(z.channel(geo.channel), sz.data());
    fft.forward(e.channel(geo.channel), se.data());
    double ring_hi = geo.r_min + geo.n_rings * geo.ring_width;
    std::size_t checked = 0;
    for (std::uint32_t u = 0; u < 64; ++u)
        for (std::uint32_t v = 0; v < 64; ++v) {
            double r = fft.radius(u, v);
            if (r >= ring_hi + 1.0 && r < ring_hi + 2.0) {
                CHECK(std::abs(sz[u * 64 + v] - se[u * 64 + v]) < 1e-4);
                ++checked;
            }
        }
    CHECK(checked > 50);
    // inside the rings the coefficients are the written constants
    RingMap map(geo, kShape);
    for (std::uint32_t j = 0; j < map.n_rings(); ++j) {
        double want = ((9 >> j) & 1) ? geo.amplitude : -geo.amplitude;
        for (std::uint32_t b : map.ring(j)) {
            CHECK(std::abs(se[b].real() - want) < 1e-4);
            CHECK(std::abs(se[b].imag()) < 1e-4);
        }
    }
}

TEST_CASE("embedding at amplitude 1 is variance-neutral") {
    for (std::uint64_t m : {std::uint64_t(32), std::uint64_t(2048)}) {
        RingGeometry geo = RingGeometry::for_groups(m);
        double worst = 0.0;
        for (int rep = 0; rep < 20; ++rep) {
            LatentTensor z = noise(400 + std::uint64_t(rep));
            LatentTensor e = embed_group(z, std::uint64_t(rep) % m, m, geo);
            worst = std::max(worst, std::abs(tensor_std(e) - 1.0));
        }
        CHECK(worst < 0.05);
    }
}

TEST_CASE("all-zero tensor extracts with zero score") {
    RingGeometry geo = RingGeometry::for_groups(32);
    LatentTensor z(kShape);
    auto res = extract_group(z, 32, geo, no_search());
    CHECK(res.score == doctest::Approx(0.0));
}

TEST_CASE("decoding is rotation invariant on the clean embed") {
    RingGeometry geo = RingGeometry::for_groups(32);
    for (double ang : {2.0, 30.0, 75.0, 180.0}) {
        for (int rep = 0; rep < 5; ++rep) {
            std::uint64_t g = std::uint64_t(rep * 7 + 3) % 32;
            LatentTensor e = embed_group(noise(500 + std::uint64_t(rep)), g, 32, geo);
            LatentTensor r = rotate_tensor(e, ang);
            auto res = extract_group(r, 32, geo, no_search());
            CHECK(res.group == g);
        }
    }
}

TEST_CASE("decoding survives the private channel, M = 2048") {
    RingGeometry geo = RingGeometry::for_groups(2048);
    ChannelParams params;
    Channel channel(params);
    GaussianStream gs(tagged_seed("test.gid.chan", {1}));
    int wrong = 0;
    double min_score = 1e9;
    for (int rep = 0; rep < 200; ++rep) {
        std::uint64_t g = gs.next_below(2048);
        LatentTensor e = embed_group(noise(700 + std::uint64_t(rep)), g, 2048, geo);
        LatentTensor recon = channel.invert_private(channel.generate(e, std::uint64_t(rep)),
                                                    std::uint64_t(rep));
        auto res = extract_group(recon, 2048, geo, no_search());
        if (res.group != g) ++wrong;
        min_score = std::min(min_score, res.score);
    }
    CHECK(wrong == 0);
    CHECK(min_score >= 0.5);
}

TEST_CASE("remove_pattern zeroes ring energy and preserves the rest") {
    RingGeometry geo = RingGeometry::for_groups(32);
    LatentTensor z = noise(3);
    LatentTensor e = embed_group(z, 17, 32, geo);
    LatentTensor r = remove_pattern(e, 17, geo);

    CenteredFft fft(kShape.h, kShape.w);
    std::vector<std::complex<double>> spec(64 * 64);
    fft.forward(r.channel(geo.channel), spec.data());
    RingMap map(geo, kShape);
    double ring_energy = 0.0;
    for (std::uint32_t j = 0; j < map.n_rings(); ++j)
        for (std::uint32_t b : map.ring(j)) ring_energy += std::norm(spec[b]);
    CHECK(ring_energy < 1e-6);

    // removal is idempotent at float precision
    LatentTensor rr = remove_pattern(r, 17, geo);
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(std::abs(r.data[i] - rr.data[i]) < 1e-5);
}

TEST_CASE("removed embed stays close to the original noise (default geometry)") {
    RingGeometry geo = RingGeometry::for_groups(32);
    double worst = 1.0;
    for (int rep = 0; rep < 100; ++rep) {
        LatentTensor z = noise(900 + std::uint64_t(rep));
        double c = tensor_cosine(
            remove_pattern(embed_group(z, std::uint64_t(rep) % 32, 32, geo), 0, geo), z);
        worst = std::min(worst, c);
    }
    CHECK(worst > 0.95); // observed 1st percentile ~0.98 (rings are ~3.5% of the energy)
}

TEST_CASE("single group needs no pattern") {
    RingGeometry geo = RingGeometry::for_groups(1);
    LatentTensor z = noise(4);
    LatentTensor e = embed_group(z, 0, 1, geo);
    CHECK(e.data == z.data);
    auto res = extract_group(z, 1, geo, no_search());
    CHECK(res.group == 0);
}

TEST_CASE("geometry validation") {
    RingGeometry geo = RingGeometry::for_groups(2048);
    geo.r_min = 22; // 22 + 11*2 = 44 >= 32: does not fit
    CHECK_THROWS_AS(geo.validate(kShape), std::invalid_argument);
    geo = RingGeometry::for_groups(32);
    geo.channel = 4;
    CHECK_THROWS_AS(geo.validate(kShape), std::invalid_argument);
    geo = RingGeometry::for_groups(32);
    geo.amplitude = 0.0;
    CHECK_THROWS_AS(geo.validate(kShape), std::invalid_argument);
}

TEST_CASE("crop realignment estimator locates the crop and group") {
    RingGeometry geo = RingGeometry::for_groups(32);
    ChannelParams params;
    Channel channel(params);
    GaussianStream gs(tagged_seed("test.gid.crop", {2}));
    int located = 0, group_ok = 0;
    const int trials = 10;
    for (int rep = 0; rep < trials; ++rep) {
        std::uint64_t g = gs.next_below(32);
        LatentTensor e = embed_group(noise(1100 + std::uint64_t(rep)), g, 32, geo);
        const std::uint32_t s = 48;
        auto oy = std::uint32_t(gs.next_below(64 - s + 1));
        auto ox = std::uint32_t(gs.next_below(64 - s + 1));
        ChannelImage attacked = crop_upscale_tensor(e, s, oy, ox);
        LatentTensor recon = channel.invert_private(attacked, std::uint64_t(rep));
        auto est = estimate_crop_realignment(recon, 32, geo);
        REQUIRE(est.has_value());
        if (std::abs(int(est->window) - int(s)) <= 3 && std::abs(int(est->oy) - int(oy)) <= 1 &&
            std::abs(int(est->ox) - int(ox)) <= 1)
            ++located;
        if (est->group == g) ++group_ok;
    }
    CHECK(located >= 7);
    CHECK(group_ok >= 7);
}

TEST_CASE("extract with the full alignment search still finds the clean answer") {
    RingGeometry geo = RingGeometry::for_groups(32);
    SearchConfig search; // rotation + window enabled
    LatentTensor e = embed_group(noise(5), 11, 32, geo);
    auto res = extract_group(e, 32, geo, search);
    CHECK(res.group == 11);
    CHECK(res.rotation_deg == doctest::Approx(0.0)); // identity wins on ties
    CHECK_FALSE(res.windowed);
}
