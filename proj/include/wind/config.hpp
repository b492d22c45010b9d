#pragma once

#include <cstdint>
#include <string>

#include "wind/channel.hpp"
#include "wind/codebook.hpp"
#include "wind/detector.hpp"
#include "wind/group_identifier.hpp"

namespace wind {

/// Everything a run needs, stored as one flat key = value document. The salt
/// lives inline (salt_hex) or in a separate file (salt_file); the
/// WIND_SALT_FILE environment variable overrides the configured path.
struct WindConfig {
    CodebookSpec codebook;      // salt filled on load
    std::string salt_file;      // empty when the salt is inline
    RingGeometry rings;
    ChannelParams channel;
    double tau_cos = 0.5;
    double l2_gate = 0.0;
    SearchConfig search;
    bool stage2_rotation_search = true;
    bool stage2_crop_search = true;
    std::uint32_t shortlist_top_k = 32;
    double identify_gate_sigmas = 6.0;
    std::uint32_t sketch_k_dims = 256;
    std::uint64_t sketch_projection_seed = 9157;

    DetectionConfig detection(DetectVariant variant, std::uint32_t n_threads = 0) const;

    void validate() const;
};

WindConfig load_config(const std::string& path);
void save_config(const WindConfig& cfg, const std::string& path);

/// A fresh desk-scale config with a random salt drawn from seed.
WindConfig default_config(std::uint64_t n, std::uint64_t m, std::uint64_t salt_seed);

} // namespace wind
