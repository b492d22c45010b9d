#include <doctest.h>

#include <cmath>

#include "wind/channel.hpp"
#include "wind/codebook.hpp"

using namespace wind;

namespace {

const TensorShape kShape{4, 64, 64};

LatentTensor noise(std::uint64_t k) {
    return sample_noise(tagged_seed("test.chan", {k}), kShape);
}

struct Stats {
    double mean = 0.0, stdev = 0.0;
};

template <typename F>
Stats run_stats(std::size_t trials, F&& f) {
    double s = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        double c = f(t);
        s += c;
        s2 += c * c;
    }
    Stats out;
    out.mean = s / double(trials);
    out.stdev = std::sqrt(std::max(0.0, s2 / double(trials) - out.mean * out.mean));
    return out;
}

} // namespace

TEST_CASE("generate is the identity in latent coordinates") {
    Channel ch((ChannelParams()));
    LatentTensor z = noise(0);
    ChannelImage img = ch.generate(z, 7);
    CHECK(img.data == z.data);
    CHECK(img.shape == z.shape);
}

TEST_CASE("private reconstruction statistics sit in the calibration band") {
    Channel ch((ChannelParams()));
    Stats st = run_stats(500, [&](std::size_t t) {
        LatentTensor z = noise(t);
        return tensor_cosine(z, ch.invert_private(ch.generate(z, t), t));
    });
    CHECK(st.mean > 0.868);
    CHECK(st.mean < 0.908);
    CHECK(st.stdev > 0.033);
    CHECK(st.stdev < 0.073);
}

TEST_CASE("unrelated reconstructions are null-distributed") {
    Channel ch((ChannelParams()));
    Stats st = run_stats(500, [&](std::size_t t) {
        LatentTensor z = noise(1000 + t);
        LatentTensor other = noise(5000 + t);
        return tensor_cosine(other, ch.invert_private(ch.generate(z, t), t));
    });
    CHECK(std::abs(st.mean) < 0.01);
    CHECK(st.stdev > 0.006);
    CHECK(st.stdev < 0.010);
}

TEST_CASE("noiseless limit returns the normalized input exactly") {
    ChannelParams p;
    p.rho_private_mean = 1.0;
    p.rho_private_spread = 0.0;
    Channel ch(p);
    LatentTensor z = noise(1);
    LatentTensor r = ch.invert_private(ch.generate(z, 3), 3);
    CHECK(tensor_cosine(z, r) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("attacker chain lands on the public-channel band") {
    Channel ch((ChannelParams()));
    Stats st = run_stats(500, [&](std::size_t t) {
        LatentTensor z = noise(9000 + t);
        ChannelImage img = ch.generate(z, t);
        LatentTensor stolen = ch.invert_public(img, t);
        ChannelImage forged = ch.generate(stolen, t);
        return tensor_cosine(z, ch.invert_private(forged, t + 1));
    });
    CHECK(st.mean > 0.136);
    CHECK(st.mean < 0.196);
    // z-score of the detection threshold under the attack distribution
    CHECK((0.5 - st.mean) / st.stdev >= 5.0);
}

TEST_CASE("decorrelated public channel makes the chain null") {
    ChannelParams p;
    p.rho_public_mean = 0.0;
    p.rho_public_spread = 0.0;
    // rho 0 is outside (0, 1]; the truncated draw rejects it
    CHECK_THROWS(Channel(p).invert_public(noise(0), 1));
    p.rho_public_mean = 0.004;
    p.rho_public_spread = 0.002;
    Channel ch(p);
    Stats st = run_stats(200, [&](std::size_t t) {
        LatentTensor z = noise(20000 + t);
        ChannelImage img = ch.generate(z, t);
        ChannelImage forged = ch.generate(ch.invert_public(img, t), t);
        return tensor_cosine(z, ch.invert_private(forged, t + 1));
    });
    CHECK(std::abs(st.mean) < 0.01);
}

TEST_CASE("identical seed and nonce replay identical outputs") {
    Channel ch((ChannelParams()));
    LatentTensor z = noise(2);
    LatentTensor a = ch.invert_private(z, 42);
    LatentTensor b = ch.invert_private(z, 42);
    CHECK(a.data == b.data);
    LatentTensor c = ch.invert_private(z, 43);
    CHECK(a.data != c.data);
}

TEST_CASE("output scale stays near unit std") {
    Channel ch((ChannelParams()));
    for (std::size_t t = 0; t < 20; ++t) {
        LatentTensor r = ch.invert_private(noise(30000 + t), t);
        CHECK(std::abs(tensor_std(r) - 1.0) < 0.1);
    }
}

TEST_CASE("zero-variance input is rejected") {
    Channel ch((ChannelParams()));
    LatentTensor flat(kShape);
    for (auto& v : flat.data) v = 3.25f;
    CHECK_THROWS_AS(ch.invert_private(flat, 0), std::invalid_argument);
}

TEST_CASE("regen_step decays correlation geometrically") {
    ChannelParams p;
    Channel ch(p);
    LatentTensor z = noise(3);
    ChannelImage cur = z;
    double prev = 1.0;
    for (int it = 0; it < 8; ++it) {
        cur = ch.regen_step(cur, 77, std::uint64_t(it));
        double c = tensor_cosine(z, cur);
        CHECK(c < prev);
        prev = c;
    }
    // after k steps correlation ~ decay^k
    CHECK(prev == doctest::Approx(std::pow(p.regen_decay, 8.0)).epsilon(0.12));
}

TEST_CASE("calibration hits the requested bands") {
    CalibrationTarget target; // defaults mirror the production channel
    ChannelParams fitted = calibrate_channel(target, 200, kShape, 123);
    Channel ch(fitted);
    Stats st = run_stats(400, [&](std::size_t t) {
        LatentTensor z = noise(40000 + t);
        return tensor_cosine(z, ch.invert_private(ch.generate(z, t), t));
    });
    CHECK(std::abs(st.mean - target.private_mean) < 0.02);
    CHECK(std::abs(st.stdev - target.private_std) < 0.02);
}

TEST_CASE("calibration accepts the degenerate noiseless target") {
    CalibrationTarget target;
    target.private_mean = 1.0;
    target.private_std = 0.0;
    target.public_chain_mean = 1.0;
    target.public_chain_std = 0.0;
    ChannelParams fitted = calibrate_channel(target, 100, {2, 16, 16}, 5);
    CHECK(fitted.rho_private_mean == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fitted.rho_private_spread == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("calibration fits the single-regeneration channel row") {
    CalibrationTarget target;
    target.private_mean = 0.824;
    target.private_std = 0.062;
    ChannelParams fitted = calibrate_channel(target, 200, kShape, 9);
    Channel ch(fitted);
    Stats st = run_stats(300, [&](std::size_t t) {
        LatentTensor z = noise(50000 + t);
        return tensor_cosine(z, ch.invert_private(ch.generate(z, t), t));
    });
    CHECK(std::abs(st.mean - 0.824) < 0.02);
    CHECK(std::abs(st.stdev - 0.062) < 0.02);
}

TEST_CASE("parameter validation") {
    ChannelParams p;
    p.rho_private_mean = 1.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ChannelParams();
    p.regen_decay = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = ChannelParams();
    p.rho_public_spread = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
