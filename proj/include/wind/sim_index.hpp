#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "wind/codebook.hpp"
#include "wind/group_identifier.hpp"
#include "wind/tensor.hpp"

namespace wind {

using Fingerprint = std::array<std::uint8_t, 32>;
using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Identity hash of a codebook spec (salt enters only through its own hash).
Fingerprint spec_fingerprint(const CodebookSpec& spec);

/// Fixed Gaussian random projection of every codebook noise, held in memory as
/// unit-normalized k-dim rows; shortlists candidates for exact verification by
/// seed regeneration.
class SketchIndex {
public:
    static SketchIndex build(const CodebookSpec& spec, std::uint32_t k_dims,
                             std::uint64_t projection_seed, std::uint32_t n_threads = 0);

    /// Top-k candidate indices by sketch cosine, best first.
    std::vector<std::uint64_t> query(const LatentTensor& q, std::uint32_t top_k) const;

    void save(const std::string& path) const;
    static SketchIndex load(const std::string& path, const CodebookSpec& expected_spec);

    std::uint32_t k_dims() const { return k_dims_; }
    std::uint64_t size() const { return n_; }
    std::uint64_t projection_seed() const { return projection_seed_; }
    const Fingerprint& fingerprint() const { return fingerprint_; }
    const RowMatrixXf& sketches() const { return sketches_; }

private:
    SketchIndex() = default;
    void regen_projection(TensorShape shape);
    Eigen::VectorXf project(const LatentTensor& t) const;

    std::uint32_t k_dims_ = 0;
    std::uint64_t n_ = 0;
    std::uint64_t projection_seed_ = 0;
    Fingerprint fingerprint_{};
    RowMatrixXf sketches_;       // n x k, rows unit-normalized
    RowMatrixXf projection_;     // k x d
};

} // namespace wind
