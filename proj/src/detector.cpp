#include "wind/detector.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <thread>

#include "wind/image_ops.hpp"
#include "wind/sim_index.hpp"

namespace wind {

double cosine_similarity(const LatentTensor& a, const LatentTensor& b) {
    require_same_shape(a, b);
    return tensor_cosine(a, b);
}

double l2_distance(const LatentTensor& a, const LatentTensor& b) { return tensor_l2(a, b); }

double log_null_pvalue(double c, std::size_t d) {
    if (d < 2) throw std::invalid_argument("null_pvalue: need d >= 2");
    return std::min(0.0, -0.5 * c * c * double(d));
}

double null_pvalue(double c, std::size_t d) {
    double p = std::exp(log_null_pvalue(c, d));
    return std::clamp(p, 0.0, 1.0);
}

void DetectionConfig::validate() const {
    if (!(tau_cos > 0.0) || tau_cos >= 1.0)
        throw std::invalid_argument("detection: tau must be in (0, 1)");
    if (shortlist_top_k == 0) throw std::invalid_argument("detection: top_k must be >= 1");
    if (identify_gate_sigmas < 0) throw std::invalid_argument("detection: gate sigmas must be >= 0");
}

namespace {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Unit-normalized query rows; all scan paths score through the same matrix so
/// batched and sequential scans agree.
struct QuerySet {
    RowMatrixXf rows;          // nq x d
    std::vector<double> norms; // pre-normalization norms, for distance reports

    std::size_t size() const { return norms.size(); }

    void reserve(std::size_t nq, std::size_t d) {
        rows.resize(Eigen::Index(nq), Eigen::Index(d));
        rows.setZero();
    }
    void set(std::size_t at, const LatentTensor& t) {
        Eigen::Map<const Eigen::VectorXf> v(t.data.data(), Eigen::Index(t.data.size()));
        double n = v.norm();
        if (norms.size() <= at) norms.resize(at + 1, 0.0);
        norms[at] = n;
        if (n > 0)
            rows.row(Eigen::Index(at)) = (v / float(n)).transpose();
        else
            rows.row(Eigen::Index(at)).setZero();
    }
};

struct ScanBest {
    bool valid = false;
    double score = -2.0;      // corrected cosine in the identifier-free subspace
    std::uint64_t index = 0;
    double query_norm = 0.0;
    double cand_norm = 0.0;
    double unit_dot = 0.0;    // dot(q / |q|, z)

    void consider(double s, std::uint64_t i, double qn, double cn, double dot) {
        if (!valid || s > score || (s == score && i < index)) {
            valid = true;
            score = s;
            index = i;
            query_norm = qn;
            cand_norm = cn;
            unit_dot = dot;
        }
    }
    void merge(const ScanBest& o) {
        if (o.valid) consider(o.score, o.index, o.query_norm, o.cand_norm, o.unit_dot);
    }

    double matching_l2(double norm_correction) const {
        if (!valid) return 0.0;
        double zn = cand_norm * norm_correction;
        double dot = unit_dot * query_norm;
        return std::sqrt(std::max(0.0, query_norm * query_norm + zn * zn - 2.0 * dot));
    }
};

/// Score candidates {first, first+step, ...} < limit against every query row.
void scan_range(const CodebookSpec& spec, const QuerySet& queries, double norm_correction,
                std::uint64_t first, std::uint64_t step, std::uint64_t limit, ScanBest& best,
                std::uint64_t& scanned) {
    const std::size_t d = spec.shape.elems();
    for (std::uint64_t i = first; i < limit; i += step) {
        LatentTensor z = sample_noise(derive_seed(i, spec.salt, spec.n), spec.shape);
        Eigen::Map<const Eigen::VectorXf> v(z.data.data(), Eigen::Index(d));
        float cn = v.norm();
        ++scanned;
        if (cn == 0) continue;
        Eigen::VectorXf dots = queries.rows * v;
        for (std::size_t q = 0; q < queries.size(); ++q) {
            double dot = double(dots[Eigen::Index(q)]);
            best.consider(dot / (double(cn) * norm_correction), i, queries.norms[q], cn, dot);
        }
    }
}

} // namespace

struct Detector::Pending {
    std::size_t image_pos = 0;
    QuerySet fallback;
    ScanBest best;
    DetectionResult result;
};

Detector::Detector(const CodebookSpec& spec, RingGeometry geo, DetectionConfig cfg, Channel channel,
                   const SketchIndex* index)
    : spec_(spec), geo_(geo), cfg_(cfg), channel_(std::move(channel)), index_(index) {
    spec_.validate();
    geo_.validate(spec_.shape);
    cfg_.validate();
    if (geo_.n_rings < rings_for_groups(spec_.m))
        throw std::invalid_argument("detector: geometry has too few rings for m");
    RingMap map(geo_, spec_.shape);
    norm_correction_ = std::sqrt(std::max(1e-9, 1.0 - map.dim_fraction(spec_.shape)));
    d_eff_ = spec_.shape.elems() - map.total_bins();
    if (index_ && index_->fingerprint() != spec_fingerprint(spec_))
        throw std::invalid_argument("detector: index fingerprint does not match the codebook");
}

std::vector<DetectionResult> Detector::detect_many(std::span<const ChannelImage> imgs,
                                                   std::uint64_t nonce_base) const {
    std::vector<DetectionResult> results(imgs.size());
    std::vector<Pending> pending;
    const std::size_t d = spec_.shape.elems();
    const double gate = cfg_.identify_gate_sigmas / std::sqrt(double(d_eff_));
    const std::uint32_t threads =
        cfg_.n_threads ? cfg_.n_threads : std::max(1u, std::thread::hardware_concurrency());

    auto finalize = [&](DetectionResult& r, const ScanBest& b, std::uint64_t scanned) {
        r.candidates_scanned = scanned;
        if (b.valid) {
            r.score = b.score;
            r.l2 = b.matching_l2(norm_correction_);
            r.p_value = null_pvalue(std::max(0.0, b.score), d_eff_);
            r.watermarked = b.score >= cfg_.tau_cos;
            // identification is kept below tau only when it clears the null gate
            if (r.watermarked || b.score >= gate) r.index = b.index;
        }
    };

    for (std::size_t pos = 0; pos < imgs.size(); ++pos) {
        auto t0 = std::chrono::steady_clock::now();
        auto elapsed_ms = [&t0] {
            return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        };
        DetectionResult res;
        LatentTensor recon = channel_.invert_private(imgs[pos], nonce_base + pos);
        ExtractResult ex = extract_group(recon, spec_.m, geo_, cfg_.search);
        res.group = ex.group;
        res.stage1_score = ex.score;

        LatentTensor q0 = remove_pattern(recon, ex.group, geo_);

        // stage-2 queries: identity alignment plus the rotation grid
        std::size_t n_rot = 0;
        if (cfg_.stage2_rotation_search && cfg_.search.enable_rotation)
            n_rot = std::size_t(std::ceil(360.0 / cfg_.search.rotation_step_deg)) - 1;
        QuerySet stage2;
        stage2.reserve(1 + n_rot, d);
        stage2.set(0, q0);
        for (std::size_t k = 0; k < n_rot; ++k)
            stage2.set(1 + k, rotate_tensor(q0, double(k + 1) * cfg_.search.rotation_step_deg));

        ScanBest best;
        std::uint64_t scanned = 0;
        scan_range(spec_, stage2, norm_correction_, ex.group, spec_.m, spec_.n, best, scanned);

        bool group_hit = best.valid && best.score >= cfg_.tau_cos;
        if (group_hit || cfg_.variant == DetectVariant::Fast) {
            finalize(res, best, scanned);
            res.wall_time_ms = elapsed_ms();
            results[pos] = res;
            continue;
        }

        // Full fallback. Rotated inputs already resolved in-group (ring
        // decoding is rotation invariant), so fallback queries stay at the
        // identity alignment plus an optional crop realignment.
        Pending p;
        p.image_pos = pos;
        std::optional<CropEstimate> est;
        if (cfg_.stage2_crop_search) est = estimate_crop_realignment(recon, spec_.m, geo_);
        p.fallback.reserve(est ? 2 : 1, d);
        p.fallback.set(0, q0);
        if (est) {
            LatentTensor undone = downscale_paste_tensor(recon, est->window, est->oy, est->ox);
            p.fallback.set(1, remove_pattern(undone, est->group, geo_));
            if (est->group != ex.group)
                scan_range(spec_, p.fallback, norm_correction_, est->group, spec_.m, spec_.n, best,
                           scanned);
        }

        if (!(best.valid && best.score >= cfg_.tau_cos) && index_) {
            for (std::size_t q = 0; q < p.fallback.size(); ++q) {
                LatentTensor qt(spec_.shape);
                Eigen::Map<Eigen::VectorXf>(qt.data.data(), Eigen::Index(d)) =
                    p.fallback.rows.row(Eigen::Index(q)).transpose();
                for (std::uint64_t cand : index_->query(qt, cfg_.shortlist_top_k))
                    scan_range(spec_, p.fallback, norm_correction_, cand, spec_.n + 1, cand + 1,
                               best, scanned);
            }
        }

        if (best.valid && (best.score >= cfg_.tau_cos || best.score >= gate)) {
            finalize(res, best, scanned);
            res.wall_time_ms = elapsed_ms();
            results[pos] = res;
            continue;
        }

        p.best = best;
        p.result = res;
        p.result.wall_time_ms = elapsed_ms();
        pending.push_back(std::move(p));
    }

    if (!pending.empty()) {
        // Shared exhaustive pass: regenerate each candidate once, score every
        // pending image's fallback queries against it.
        auto t0 = std::chrono::steady_clock::now();
        std::size_t total_q = 0;
        for (auto& p : pending) total_q += p.fallback.size();
        const Eigen::Index di = Eigen::Index(d);
        RowMatrixXf all_q(Eigen::Index(total_q), di);
        std::vector<std::size_t> owner(total_q);
        std::vector<double> qnorm(total_q);
        {
            std::size_t qi = 0;
            for (std::size_t pi = 0; pi < pending.size(); ++pi)
                for (std::size_t q = 0; q < pending[pi].fallback.size(); ++q, ++qi) {
                    all_q.row(Eigen::Index(qi)) = pending[pi].fallback.rows.row(Eigen::Index(q));
                    owner[qi] = pi;
                    qnorm[qi] = pending[pi].fallback.norms[q];
                }
        }

        const std::uint64_t n = spec_.n;
        std::vector<std::vector<ScanBest>> shard_best(threads,
                                                      std::vector<ScanBest>(pending.size()));
        auto worker = [&](std::uint32_t tid) {
            constexpr std::uint64_t kBlock = 64;
            RowMatrixXf block(Eigen::Index(kBlock), di);
            std::vector<float> norms(kBlock);
            RowMatrixXf dots;
            const std::uint64_t per = (n + threads - 1) / threads;
            const std::uint64_t lo = std::min<std::uint64_t>(n, tid * per);
            const std::uint64_t hi = std::min<std::uint64_t>(n, lo + per);
            for (std::uint64_t b = lo; b < hi; b += kBlock) {
                const auto cnt = Eigen::Index(std::min(kBlock, hi - b));
                for (Eigen::Index r = 0; r < cnt; ++r) {
                    LatentTensor z =
                        sample_noise(derive_seed(b + std::uint64_t(r), spec_.salt, n), spec_.shape);
                    std::memcpy(block.row(r).data(), z.data.data(), d * sizeof(float));
                    norms[std::size_t(r)] = block.row(r).norm();
                }
                dots.noalias() = block.topRows(cnt) * all_q.transpose();
                for (Eigen::Index r = 0; r < cnt; ++r) {
                    float cn = norms[std::size_t(r)];
                    if (cn == 0) continue;
                    for (std::size_t q = 0; q < total_q; ++q) {
                        double dot = double(dots(r, Eigen::Index(q)));
                        shard_best[tid][owner[q]].consider(dot / (double(cn) * norm_correction_),
                                                           b + std::uint64_t(r), qnorm[q], cn, dot);
                    }
                }
            }
        };
        if (threads <= 1 || n < 512) {
            worker(0);
        } else {
            std::vector<std::thread> pool;
            for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
            for (auto& th : pool) th.join();
        }
        double pass_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();

        for (std::size_t pi = 0; pi < pending.size(); ++pi) {
            Pending& p = pending[pi];
            for (std::uint32_t t = 0; t < threads; ++t) p.best.merge(shard_best[t][pi]);
            finalize(p.result, p.best, spec_.n);
            p.result.wall_time_ms += pass_ms;
            results[p.image_pos] = p.result;
        }
    }
    return results;
}

DetectionResult Detector::detect(const ChannelImage& img, std::uint64_t nonce) const {
    return detect_many(std::span<const ChannelImage>(&img, 1), nonce)[0];
}

} // namespace wind
