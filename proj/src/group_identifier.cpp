#include "wind/group_identifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wind/image_ops.hpp"

namespace wind {

std::uint32_t rings_for_groups(std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("group count must be positive");
    std::uint32_t bits = 0;
    while ((std::uint64_t(1) << bits) < m) ++bits;
    return bits;
}

void RingGeometry::validate(TensorShape shape) const {
    if (channel >= shape.c) throw std::invalid_argument("ring geometry: carrier channel out of range");
    if (ring_width == 0) throw std::invalid_argument("ring geometry: ring width must be >= 1");
    if (amplitude <= 0) throw std::invalid_argument("ring geometry: amplitude must be positive");
    if (r_min + n_rings * ring_width >= std::min(shape.h, shape.w) / 2)
        throw std::invalid_argument("ring geometry: rings do not fit inside the spectrum");
}

void SearchConfig::validate(TensorShape shape) const {
    if (!(rotation_step_deg > 0.0) || rotation_step_deg > 90.0)
        throw std::invalid_argument("search: rotation step must be in (0, 90]");
    if (window_size > shape.h || window_size > shape.w)
        throw std::invalid_argument("search: window larger than grid");
    if (window_stride == 0) throw std::invalid_argument("search: stride must be >= 1");
}

RingMap::RingMap(const RingGeometry& geo, TensorShape shape, double scale) {
    const std::uint32_t h = shape.h, w = shape.w;
    rings_.resize(geo.n_rings);
    for (std::uint32_t u = 0; u < h; ++u) {
        double ku = double(u) - double(h / 2);
        for (std::uint32_t v = 0; v < w; ++v) {
            double kv = double(v) - double(w / 2);
            double r = std::sqrt(ku * ku + kv * kv);
            for (std::uint32_t j = 0; j < geo.n_rings; ++j) {
                double lo = (geo.r_min + j * geo.ring_width) * scale;
                double hi = (geo.r_min + (j + 1) * geo.ring_width) * scale;
                if (r >= lo && r < hi) {
                    rings_[j].push_back(u * w + v);
                    ++total_;
                    break;
                }
            }
        }
    }
}

namespace {

std::vector<double> ring_means(const std::complex<double>* spec, const RingMap& map) {
    std::vector<double> out(map.n_rings(), 0.0);
    for (std::uint32_t j = 0; j < map.n_rings(); ++j) {
        const auto& bins = map.ring(j);
        if (bins.empty()) continue;
        double acc = 0.0;
        for (std::uint32_t b : bins) acc += spec[b].real();
        out[j] = acc / double(bins.size());
    }
    return out;
}

std::uint64_t decode_bits(const std::vector<double>& means, std::uint64_t m) {
    std::uint64_t g = 0;
    for (std::size_t j = 0; j < means.size(); ++j)
        if (means[j] > 0.0) g |= std::uint64_t(1) << j;
    return g % m;
}

double min_abs_score(const std::vector<double>& means, double amplitude) {
    if (means.empty()) return 0.0;
    double s = std::abs(means[0]);
    for (double v : means) s = std::min(s, std::abs(v));
    return s / amplitude;
}

} // namespace

LatentTensor embed_group(const LatentTensor& z, std::uint64_t g, std::uint64_t m,
                         const RingGeometry& geo) {
    geo.validate(z.shape);
    if (g >= m) throw std::invalid_argument("embed: group out of range");
    if (geo.n_rings < rings_for_groups(m))
        throw std::invalid_argument("embed: too few rings for the group count");
    LatentTensor out = z;
    if (geo.n_rings == 0) return out; // single group: nothing to encode

    CenteredFft fft(z.shape.h, z.shape.w);
    RingMap map(geo, z.shape);
    std::vector<std::complex<double>> spec(std::size_t(z.shape.h) * z.shape.w);
    fft.forward(z.channel(geo.channel), spec.data());
    for (std::uint32_t j = 0; j < geo.n_rings; ++j) {
        const double val = ((g >> j) & 1) ? geo.amplitude : -geo.amplitude;
        for (std::uint32_t b : map.ring(j)) spec[b] = val;
    }
    // Annuli are mirror-symmetric and the written values real, so Hermitian
    // symmetry is preserved and the inverse stays real.
    fft.inverse(spec.data(), out.channel(geo.channel));
    return out;
}

ExtractResult extract_group(const LatentTensor& z, std::uint64_t m, const RingGeometry& geo,
                            const SearchConfig& cfg) {
    geo.validate(z.shape);
    cfg.validate(z.shape);
    if (geo.n_rings == 0) return {0, 1.0};

    const std::uint32_t h = z.shape.h, w = z.shape.w;
    CenteredFft fft(h, w);
    RingMap map(geo, z.shape);
    const float* carrier = z.channel(geo.channel);

    ExtractResult best;
    best.score = -1.0;
    std::vector<std::complex<double>> spec(std::size_t(h) * w);
    auto consider = [&](const float* grid, const RingMap& rm, double rot, bool windowed,
                        std::uint32_t oy, std::uint32_t ox) {
        fft.forward(grid, spec.data());
        auto means = ring_means(spec.data(), rm);
        double score = min_abs_score(means, geo.amplitude);
        if (score > best.score + 1e-9) {
            best.group = decode_bits(means, m);
            best.score = score;
            best.rotation_deg = rot;
            best.windowed = windowed;
            best.window_oy = oy;
            best.window_ox = ox;
        }
    };

    consider(carrier, map, 0.0, false, 0, 0);

    if (cfg.enable_rotation) {
        std::vector<float> rot(std::size_t(h) * w);
        for (double ang = cfg.rotation_step_deg; ang < 360.0; ang += cfg.rotation_step_deg) {
            rotate_grid(carrier, rot.data(), h, w, ang);
            consider(rot.data(), map, ang, false, 0, 0);
        }
    }

    if (cfg.enable_window && cfg.window_size > 0 && cfg.window_size < std::min(h, w)) {
        const std::uint32_t s = cfg.window_size;
        RingMap scaled(geo, z.shape, double(s) / double(h));
        std::vector<float> masked(std::size_t(h) * w);
        for (std::uint32_t oy = 0; oy + s <= h; oy += cfg.window_stride) {
            for (std::uint32_t ox = 0; ox + s <= w; ox += cfg.window_stride) {
                std::fill(masked.begin(), masked.end(), 0.0f);
                for (std::uint32_t i = 0; i < s; ++i)
                    for (std::uint32_t j = 0; j < s; ++j)
                        masked[std::size_t(oy + i) * w + (ox + j)] =
                            carrier[std::size_t(oy + i) * w + (ox + j)];
                consider(masked.data(), scaled, 0.0, true, oy, ox);
            }
        }
    }
    if (best.score < 0.0) best.score = 0.0;
    return best;
}

LatentTensor remove_pattern(const LatentTensor& z, std::uint64_t /*g*/, const RingGeometry& geo) {
    geo.validate(z.shape);
    LatentTensor out = z;
    if (geo.n_rings == 0) return out;
    CenteredFft fft(z.shape.h, z.shape.w);
    RingMap map(geo, z.shape);
    std::vector<std::complex<double>> spec(std::size_t(z.shape.h) * z.shape.w);
    fft.forward(z.channel(geo.channel), spec.data());
    for (std::uint32_t j = 0; j < map.n_rings(); ++j)
        for (std::uint32_t b : map.ring(j)) spec[b] = 0.0;
    fft.inverse(spec.data(), out.channel(geo.channel));
    return out;
}

std::optional<CropEstimate> estimate_crop_realignment(const LatentTensor& z, std::uint64_t m,
                                                      const RingGeometry& geo, double min_score) {
    geo.validate(z.shape);
    if (geo.n_rings == 0) return std::nullopt;
    const std::uint32_t h = z.shape.h, w = z.shape.w;
    CenteredFft fft(h, w);
    RingMap map(geo, z.shape);
    const float* carrier = z.channel(geo.channel);

    CropEstimate best;
    std::vector<std::complex<double>> spec(std::size_t(h) * w);
    std::vector<float> undone(std::size_t(h) * w);

    // Candidate crop sizes from 55% to 95% of the grid.
    for (double frac = 0.55; frac <= 0.951; frac += 0.05) {
        const auto s = std::uint32_t(std::lround(frac * h));
        if (s < 8 || s >= h) continue;
        std::vector<float> down(std::size_t(s) * s);
        resample_grid(carrier, h, w, down.data(), s, s, double(h - 1) / double(s - 1),
                      double(w - 1) / double(s - 1));
        for (std::uint32_t oy = 0; oy + s <= h; ++oy) {
            for (std::uint32_t ox = 0; ox + s <= w; ++ox) {
                std::fill(undone.begin(), undone.end(), 0.0f);
                for (std::uint32_t i = 0; i < s; ++i)
                    for (std::uint32_t j = 0; j < s; ++j)
                        undone[std::size_t(oy + i) * w + (ox + j)] = down[std::size_t(i) * s + j];
                fft.forward(undone.data(), spec.data());
                auto means = ring_means(spec.data(), map);
                double score = min_abs_score(means, geo.amplitude);
                if (score > best.score + 1e-9) {
                    best.score = score;
                    best.window = s;
                    best.oy = oy;
                    best.ox = ox;
                    best.group = decode_bits(means, m);
                }
            }
        }
    }
    if (best.score < min_score) return std::nullopt;
    return best;
}

} // namespace wind
