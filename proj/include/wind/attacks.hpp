#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "wind/channel.hpp"
#include "wind/tensor.hpp"

namespace wind {

/// One transformation or adversarial procedure. Serialized form: "rotate:75",
/// "jpeg:25", "cropscale:0.75", "blur:8", "noise:0.1", "bright:6", "regen:10",
/// "forgery".
struct AttackSpec {
    enum class Kind {
        Rotate,
        Jpeg,
        CropScale,
        Blur,
        GaussNoise,
        Brightness,
        Regenerate,
        ReconstructionForgery,
    };

    Kind kind = Kind::Rotate;
    double value = 0.0; // degrees / quality / fraction / kernel / sigma / max factor / iterations

    void validate() const;
    std::string to_string() const;
    static AttackSpec parse(const std::string& text);
};

/// Apply one attack. Randomized attacks (crop offset, noise, brightness,
/// regeneration) draw every value from attack_seed, so runs replay exactly.
ChannelImage apply_attack(const ChannelImage& img, const AttackSpec& spec, const Channel& channel,
                          std::uint64_t attack_seed);

/// Mean watermarked image minus mean clean image.
struct PatternEstimate {
    LatentTensor data;
    std::size_t pairs = 0;
};

PatternEstimate steganalysis_estimate(std::span<const ChannelImage> watermarked,
                                      std::span<const ChannelImage> clean);

ChannelImage steganalysis_forge(const ChannelImage& target, const PatternEstimate& est);
ChannelImage steganalysis_remove(const ChannelImage& img, const PatternEstimate& est);

ChannelImage regenerate(const ChannelImage& img, std::uint64_t iterations, const Channel& channel,
                        std::uint64_t attack_seed);

/// Attacker round trip with the public model: invert, then regenerate.
ChannelImage reconstruction_forgery(const ChannelImage& img, const Channel& channel,
                                    std::uint64_t nonce);

} // namespace wind
