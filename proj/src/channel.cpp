#include "wind/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "wind/codebook.hpp"

namespace wind {

void ChannelParams::validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(rho_private_mean) || !in_unit(rho_public_mean))
        throw std::invalid_argument("channel: rho means must lie in [0, 1]");
    if (rho_private_spread < 0 || rho_private_spread >= 1 || rho_public_spread < 0 ||
        rho_public_spread >= 1)
        throw std::invalid_argument("channel: rho spreads must lie in [0, 1)");
    if (!(regen_decay > 0.0) || regen_decay > 1.0)
        throw std::invalid_argument("channel: regen decay must lie in (0, 1]");
}

Channel::Channel(ChannelParams params) : params_(params) { params_.validate(); }

ChannelImage Channel::generate(const LatentTensor& z_emb, std::uint64_t /*nonce*/) const {
    if (!tensor_finite(z_emb)) throw std::invalid_argument("generate: non-finite input");
    return z_emb; // identity in latent coordinates; the round-trip loss lives in invert
}

namespace {

double draw_truncated_rho(GaussianStream& gs, double mean, double spread) {
    if (spread == 0.0) {
        if (mean <= 0.0 || mean > 1.0) throw std::invalid_argument("channel: degenerate rho outside (0, 1]");
        return mean;
    }
    for (int tries = 0; tries < 10000; ++tries) {
        double r = mean + spread * gs.next();
        if (r > 0.0 && r <= 1.0) return r;
    }
    throw std::runtime_error("channel: rho truncation failed to accept");
}

LatentTensor mix_with_noise(const LatentTensor& x, double rho, const Seed32& eps_seed) {
    double mu = tensor_mean(x);
    double sd = tensor_std(x);
    if (sd == 0.0) throw std::invalid_argument("channel: zero-variance input");
    LatentTensor eps = sample_noise(eps_seed, x.shape);
    LatentTensor out(x.shape);
    const double comp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
    for (std::size_t i = 0; i < x.data.size(); ++i)
        out.data[i] = float(rho * ((double(x.data[i]) - mu) / sd) + comp * double(eps.data[i]));
    return out;
}

} // namespace

LatentTensor Channel::invert(const ChannelImage& img, std::uint64_t nonce, bool public_role) const {
    if (!tensor_finite(img)) throw std::invalid_argument("invert: non-finite input");
    const double mean = public_role ? params_.rho_public_mean : params_.rho_private_mean;
    const double spread = public_role ? params_.rho_public_spread : params_.rho_private_spread;
    const std::uint64_t role = public_role ? 1 : 0;
    GaussianStream rho_stream(tagged_seed("wind.channel.rho", {params_.channel_seed, nonce, role}));
    double rho = draw_truncated_rho(rho_stream, mean, spread);
    return mix_with_noise(img, rho,
                          tagged_seed("wind.channel.eps", {params_.channel_seed, nonce, role}));
}

LatentTensor Channel::invert_private(const ChannelImage& img, std::uint64_t nonce) const {
    return invert(img, nonce, false);
}

LatentTensor Channel::invert_public(const ChannelImage& img, std::uint64_t nonce) const {
    return invert(img, nonce, true);
}

ChannelImage Channel::regen_step(const ChannelImage& img, std::uint64_t attack_seed,
                                 std::uint64_t iteration) const {
    if (!tensor_finite(img)) throw std::invalid_argument("regen: non-finite input");
    return mix_with_noise(img, params_.regen_decay,
                          tagged_seed("wind.attack.regen", {attack_seed, iteration}));
}

namespace {

struct Stats {
    double mean = 0.0, stdev = 0.0;
};

Stats cosine_stats(const ChannelParams& p, std::size_t trials, TensorShape shape, bool chain) {
    Channel ch(p);
    double s = 0.0, s2 = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
        LatentTensor z = sample_noise(tagged_seed("wind.calib.z", {p.channel_seed, t}), shape);
        ChannelImage img = ch.generate(z, t);
        LatentTensor recon;
        if (chain) {
            LatentTensor stolen = ch.invert_public(img, t);
            ChannelImage forged = ch.generate(stolen, t);
            recon = ch.invert_private(forged, t + 1);
        } else {
            recon = ch.invert_private(img, t);
        }
        double c = tensor_cosine(z, recon);
        s += c;
        s2 += c * c;
    }
    Stats out;
    out.mean = s / double(trials);
    out.stdev = std::sqrt(std::max(0.0, s2 / double(trials) - out.mean * out.mean));
    return out;
}

} // namespace

ChannelParams calibrate_channel(const CalibrationTarget& target, std::size_t trials,
                                TensorShape shape, std::uint64_t channel_seed,
                                std::size_t max_rounds) {
    if (trials < 100) throw std::invalid_argument("calibrate: need at least 100 trials");
    ChannelParams p;
    p.channel_seed = channel_seed;
    p.rho_private_mean = target.private_mean;
    p.rho_private_spread = target.private_std;
    p.rho_public_mean = target.private_mean > 0 ? target.public_chain_mean / target.private_mean
                                                : target.public_chain_mean;
    p.rho_public_spread = target.public_chain_std;

    const double tol_mean = 0.005, tol_std = 0.005;
    bool ok = false;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        p.rho_private_mean = std::clamp(p.rho_private_mean, 0.0, 1.0);
        p.rho_public_mean = std::clamp(p.rho_public_mean, 0.0, 1.0);
        p.validate();
        Stats priv = cosine_stats(p, trials, shape, false);
        Stats chain = cosine_stats(p, trials, shape, true);
        if (std::abs(priv.mean - target.private_mean) < tol_mean &&
            std::abs(priv.stdev - target.private_std) < tol_std &&
            std::abs(chain.mean - target.public_chain_mean) < tol_mean * 2 &&
            std::abs(chain.stdev - target.public_chain_std) < tol_std * 2) {
            ok = true;
            break;
        }
        p.rho_private_mean += target.private_mean - priv.mean;
        // observed variance = parameter spread^2 + angular noise; keep the
        // angular part and re-solve for the spread
        double angular = priv.stdev * priv.stdev - p.rho_private_spread * p.rho_private_spread;
        double want = target.private_std * target.private_std - std::max(0.0, angular);
        p.rho_private_spread = std::sqrt(std::max(0.0, want));
        p.rho_public_mean += (target.public_chain_mean - chain.mean) /
                             std::max(0.1, p.rho_private_mean);
        double angular_c = chain.stdev * chain.stdev - p.rho_public_spread * p.rho_public_spread;
        double want_c = target.public_chain_std * target.public_chain_std - std::max(0.0, angular_c);
        p.rho_public_spread = std::sqrt(std::max(0.0, want_c));
    }
    if (!ok) throw std::runtime_error("calibrate: did not converge");
    return p;
}

} // namespace wind
