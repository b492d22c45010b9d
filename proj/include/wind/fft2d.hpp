#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace wind {

/// Orthonormal 2-D DFT of one H x W grid, returned "centered": bin (u, v) holds
/// frequency (u - H/2, v - W/2), and the phase origin sits at the grid center
/// ((H-1)/2, (W-1)/2). With that origin a spatial rotation about the pixel
/// center permutes bins of equal radius without scrambling their real parts,
/// which is what ring decoding relies on.
class CenteredFft {
public:
    CenteredFft(std::uint32_t h, std::uint32_t w);

    void forward(const float* spatial, std::complex<double>* spectrum) const;
    /// Inverse of forward; the imaginary residue of a Hermitian spectrum is dropped.
    void inverse(const std::complex<double>* spectrum, float* spatial) const;

    std::uint32_t h() const { return h_; }
    std::uint32_t w() const { return w_; }

    /// Frequency radius of centered bin (u, v).
    double radius(std::uint32_t u, std::uint32_t v) const {
        double ku = double(u) - double(h_ / 2);
        double kv = double(v) - double(w_ / 2);
        return std::sqrt(ku * ku + kv * kv);
    }

private:
    std::uint32_t h_, w_;
    std::vector<std::complex<double>> phase_;     // applied after fftshift
    std::vector<std::complex<double>> inv_phase_;
};

} // namespace wind
