#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wind/fft2d.hpp"
#include "wind/tensor.hpp"

namespace wind {

std::uint32_t rings_for_groups(std::uint64_t m); // ceil(log2 m)

/// Concentric-annulus layout carrying the group bits in the carrier channel's
/// centered spectrum. Ring j holds bit j of g as the sign of a real constant
/// written over the annulus.
struct RingGeometry {
    std::uint32_t channel = 0;
    std::uint32_t r_min = 4;
    std::uint32_t ring_width = 2;
    std::uint32_t n_rings = 0; // ceil(log2 M)
    double amplitude = 1.0;

    static RingGeometry for_groups(std::uint64_t m) {
        RingGeometry g;
        g.n_rings = rings_for_groups(m);
        return g;
    }

    void validate(TensorShape shape) const;
};

/// Alignment candidates tried while extracting: spatial rotations on a fixed
/// angular grid and masked square sub-windows (zeroed outside, ring radii
/// rescaled by window_size / H when decoding).
struct SearchConfig {
    double rotation_step_deg = 2.0;
    std::uint32_t window_size = 32;
    std::uint32_t window_stride = 8;
    bool enable_rotation = true;
    bool enable_window = true;

    void validate(TensorShape shape) const;
};

struct ExtractResult {
    std::uint64_t group = 0;
    double score = 0.0;            // min over rings of |ring mean| / amplitude
    // winning alignment, for diagnostics
    double rotation_deg = 0.0;
    bool windowed = false;
    std::uint32_t window_oy = 0, window_ox = 0;
};

/// Precomputed ring bin lists for one (geometry, shape, scale) combination.
class RingMap {
public:
    RingMap(const RingGeometry& geo, TensorShape shape, double scale = 1.0);

    std::uint32_t n_rings() const { return std::uint32_t(rings_.size()); }
    const std::vector<std::uint32_t>& ring(std::uint32_t j) const { return rings_[j]; }
    std::size_t total_bins() const { return total_; }
    /// Ring-bin fraction of the full tensor dimension (all channels).
    double dim_fraction(TensorShape shape) const {
        return double(total_) / double(shape.elems());
    }

private:
    std::vector<std::vector<std::uint32_t>> rings_; // flat spectrum offsets
    std::size_t total_ = 0;
};

/// Overwrite ring annuli of the carrier channel with +-A encoding bit_j(g);
/// all other coefficients and channels are untouched. Output is real.
LatentTensor embed_group(const LatentTensor& z, std::uint64_t g, std::uint64_t m,
                         const RingGeometry& geo);

/// Decode the group from ring-mean signs at the best-scoring alignment.
/// Always returns a best guess; the caller thresholds on score.
ExtractResult extract_group(const LatentTensor& z, std::uint64_t m, const RingGeometry& geo,
                            const SearchConfig& cfg);

/// Zero every ring-annulus coefficient of the carrier channel. The original
/// coefficients were overwritten at embed time, so nothing is restored; this
/// yields the tensor used for stage-2 matching. Idempotent; the decoded group
/// does not enter the computation.
LatentTensor remove_pattern(const LatentTensor& z, std::uint64_t g, const RingGeometry& geo);

/// Crop realignment estimate: scan candidate crop sizes x integer offsets,
/// undo each (downscale + paste back) and score ring decodability of the
/// undone tensor. Returns nothing when no alignment clears min_score.
struct CropEstimate {
    double score = 0.0;
    std::uint32_t window = 0; // estimated crop size in pixels
    std::uint32_t oy = 0, ox = 0;
    std::uint64_t group = 0;
};

std::optional<CropEstimate> estimate_crop_realignment(const LatentTensor& z, std::uint64_t m,
                                                      const RingGeometry& geo,
                                                      double min_score = 0.15);

} // namespace wind
