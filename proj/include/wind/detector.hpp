#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wind/channel.hpp"
#include "wind/codebook.hpp"
#include "wind/group_identifier.hpp"
#include "wind/tensor.hpp"

namespace wind {

class SketchIndex;

enum class DetectVariant { Fast, Full };

struct DetectionConfig {
    double tau_cos = 0.5;
    /// Stage-1 distance gate, reported for parity; calibrated, not decisive.
    double l2_gate = 0.0;
    DetectVariant variant = DetectVariant::Full;
    SearchConfig search;
    /// Try the rotation grid on the reconstructed tensor during stage-2 matching.
    bool stage2_rotation_search = true;
    /// Try crop realignment before the exhaustive fallback (Full only).
    bool stage2_crop_search = true;
    /// Candidates fetched per query from the sketch index.
    std::uint32_t shortlist_top_k = 32;
    /// Skip the exhaustive scan once a match clears this many null sigmas
    /// (1/sqrt(d_eff) each); the match is still below tau, so the decision
    /// stays NotWatermarked — only the identification is kept.
    double identify_gate_sigmas = 6.0;
    std::uint32_t n_threads = 0; // 0 = hardware

    void validate() const;
};

struct DetectionResult {
    bool watermarked = false;
    std::optional<std::uint64_t> index;
    std::uint64_t group = 0;         // stage-1 decoded group
    double stage1_score = 0.0;
    double score = 0.0;              // best cosine in the identifier-free subspace
    double l2 = 0.0;                 // matching-space distance of the best candidate
    double p_value = 1.0;
    std::uint64_t candidates_scanned = 0;
    double wall_time_ms = 0.0;
};

/// Standard definitions over flattened tensors; cosine throws on zero norm.
double cosine_similarity(const LatentTensor& a, const LatentTensor& b);
double l2_distance(const LatentTensor& a, const LatentTensor& b);

/// Tail bound for the null model cos ~ N(0, 1/d): p = exp(-c^2 d / 2), in [0, 1].
double null_pvalue(double c, std::size_t d);
double log_null_pvalue(double c, std::size_t d);

class Detector {
public:
    Detector(const CodebookSpec& spec, RingGeometry geo, DetectionConfig cfg, Channel channel,
             const SketchIndex* index = nullptr);

    /// Two-stage detection of one latent image. nonce seeds the inversion draw.
    DetectionResult detect(const ChannelImage& img, std::uint64_t nonce) const;

    /// Batched variant: identical per-image results, but unresolved exhaustive
    /// fallbacks share one streaming pass over the codebook.
    std::vector<DetectionResult> detect_many(std::span<const ChannelImage> imgs,
                                             std::uint64_t nonce_base) const;

    const CodebookSpec& spec() const { return spec_; }
    const DetectionConfig& config() const { return cfg_; }
    const Channel& channel() const { return channel_; }
    const RingGeometry& geometry() const { return geo_; }

    /// Dimension of the identifier-free matching space.
    std::size_t effective_dim() const { return d_eff_; }

private:
    struct Pending; // per-image fallback state

    CodebookSpec spec_;
    RingGeometry geo_;
    DetectionConfig cfg_;
    Channel channel_;
    const SketchIndex* index_;
    double norm_correction_; // sqrt(1 - ring dim fraction)
    std::size_t d_eff_;
};

} // namespace wind
