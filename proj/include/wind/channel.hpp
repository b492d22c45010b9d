#pragma once

#include <cstdint>

#include "wind/tensor.hpp"

namespace wind {

/// Correlation statistics of the generate -> invert round trip. The private
/// role models the owner's inversion; the public role models an attacker's.
/// Per-image rho jitter absorbs prompt/content variability.
struct ChannelParams {
    double rho_private_mean = 0.888;
    double rho_private_spread = 0.05;
    double rho_public_mean = 0.166;
    double rho_public_spread = 0.06;
    double regen_decay = 0.954;
    std::uint64_t channel_seed = 0;

    void validate() const;
};

/// Synthetic stand-in for the diffusion round trip. Generation is the identity
/// in latent coordinates; every imperfection is charged to inversion, which
/// mixes the unit-std-normalized input with fresh seeded noise at a
/// correlation drawn per image from the role's statistics.
class Channel {
public:
    explicit Channel(ChannelParams params);

    const ChannelParams& params() const { return params_; }

    ChannelImage generate(const LatentTensor& z_emb, std::uint64_t nonce) const;
    LatentTensor invert_private(const ChannelImage& img, std::uint64_t nonce) const;
    LatentTensor invert_public(const ChannelImage& img, std::uint64_t nonce) const;

    /// One regeneration-attack iteration: decay-mix with fresh noise.
    ChannelImage regen_step(const ChannelImage& img, std::uint64_t attack_seed,
                            std::uint64_t iteration) const;

private:
    LatentTensor invert(const ChannelImage& img, std::uint64_t nonce, bool public_role) const;

    ChannelParams params_;
};

struct CalibrationTarget {
    double private_mean = 0.888;
    double private_std = 0.053;
    double public_chain_mean = 0.166;
    double public_chain_std = 0.063;
};

/// Fit rho parameters by Monte-Carlo so observed round-trip cosine statistics
/// land on the targets. Throws if refinement does not converge.
ChannelParams calibrate_channel(const CalibrationTarget& target, std::size_t trials,
                                TensorShape shape, std::uint64_t channel_seed,
                                std::size_t max_rounds = 8);

} // namespace wind
