#include "wind/fft2d.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace wind {

namespace {

// FFTW plan creation is not thread-safe; execution on distinct buffers is.
std::mutex g_plan_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanPair& plans_for(std::uint32_t h, std::uint32_t w) {
    static std::map<std::pair<std::uint32_t, std::uint32_t>, PlanPair> cache;
    std::lock_guard lock(g_plan_mutex);
    auto key = std::make_pair(h, w);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* buf = fftw_alloc_complex(std::size_t(h) * w);
    PlanPair p;
    p.fwd = fftw_plan_dft_2d(int(h), int(w), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    p.bwd = fftw_plan_dft_2d(int(h), int(w), buf, buf, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(buf);
    return cache.emplace(key, p).first->second;
}

} // namespace

CenteredFft::CenteredFft(std::uint32_t h, std::uint32_t w) : h_(h), w_(w) {
    if (h == 0 || w == 0) throw std::invalid_argument("fft: empty grid");
    plans_for(h, w);
    phase_.resize(std::size_t(h) * w);
    inv_phase_.resize(std::size_t(h) * w);
    const double cy = (double(h) - 1.0) / 2.0;
    const double cx = (double(w) - 1.0) / 2.0;
    for (std::uint32_t u = 0; u < h; ++u) {
        double ku = double(u) - double(h / 2);
        for (std::uint32_t v = 0; v < w; ++v) {
            double kv = double(v) - double(w / 2);
            double ang = 2.0 * std::numbers::pi * (ku * cy / double(h) + kv * cx / double(w));
            phase_[std::size_t(u) * w + v] = std::polar(1.0, ang);
            inv_phase_[std::size_t(u) * w + v] = std::polar(1.0, -ang);
        }
    }
}

void CenteredFft::forward(const float* spatial, std::complex<double>* spectrum) const {
    const std::size_t n = std::size_t(h_) * w_;
    std::vector<std::complex<double>> buf(n);
    for (std::size_t i = 0; i < n; ++i) buf[i] = spatial[i];
    auto& p = plans_for(h_, w_);
    fftw_execute_dft(p.fwd, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    const double norm = 1.0 / std::sqrt(double(n));
    // fftshift + phase centering
    const std::uint32_t sh = h_ / 2, sw = w_ / 2;
    for (std::uint32_t u = 0; u < h_; ++u) {
        std::uint32_t su = (u + sh) % h_;
        for (std::uint32_t v = 0; v < w_; ++v) {
            std::uint32_t sv = (v + sw) % w_;
            std::size_t dst = std::size_t(u) * w_ + v;
            spectrum[dst] = buf[std::size_t(su) * w_ + sv] * norm * phase_[dst];
        }
    }
}

void CenteredFft::inverse(const std::complex<double>* spectrum, float* spatial) const {
    const std::size_t n = std::size_t(h_) * w_;
    std::vector<std::complex<double>> buf(n);
    const std::uint32_t sh = h_ / 2, sw = w_ / 2;
    for (std::uint32_t u = 0; u < h_; ++u) {
        std::uint32_t su = (u + sh) % h_;
        for (std::uint32_t v = 0; v < w_; ++v) {
            std::uint32_t sv = (v + sw) % w_;
            std::size_t src = std::size_t(u) * w_ + v;
            buf[std::size_t(su) * w_ + sv] = spectrum[src] * inv_phase_[src];
        }
    }
    auto& p = plans_for(h_, w_);
    fftw_execute_dft(p.bwd, reinterpret_cast<fftw_complex*>(buf.data()),
                     reinterpret_cast<fftw_complex*>(buf.data()));
    const double norm = 1.0 / std::sqrt(double(n));
    for (std::size_t i = 0; i < n; ++i) spatial[i] = float(buf[i].real() * norm);
}

} // namespace wind
