#include "wind/evalharness.hpp"

#include <json.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "wind/image_ops.hpp"
#include "wind/sha256.hpp"

namespace wind {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Welford {
    std::size_t n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        ++n;
        double d = x - mean;
        mean += d / double(n);
        m2 += d * (x - mean);
    }
    double stdev() const { return n > 1 ? std::sqrt(m2 / double(n)) : 0.0; }
};

LatentTensor fresh_latent(std::string_view tag, std::uint64_t seed, std::uint64_t k,
                          TensorShape shape) {
    return sample_noise(tagged_seed(tag, {seed, k}), shape);
}

} // namespace

double ExperimentReport::row(const std::string& label, const std::string& column) const {
    auto cit = std::find(columns.begin(), columns.end(), column);
    if (cit == columns.end()) throw std::out_of_range("report: unknown column " + column);
    for (const auto& r : rows)
        if (r.label == label) return r.values[std::size_t(cit - columns.begin())];
    throw std::out_of_range("report: unknown row " + label);
}

void ExperimentReport::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("report: cannot write " + path);
    f << "label";
    for (const auto& c : columns) f << "," << c;
    f << "\n";
    f.precision(10);
    for (const auto& r : rows) {
        f << r.label;
        for (double v : r.values) f << "," << v;
        f << "\n";
    }
    f << "\nsummary,value\n";
    for (const auto& [k, v] : summary) f << k << "," << v << "\n";
}

std::string ExperimentReport::replay_manifest() const {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["seed"] = seed;
    j["config"] = config;
    j["columns"] = columns;
    auto& jr = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json row;
        row["label"] = r.label;
        row["values"] = r.values;
        jr.push_back(row);
    }
    j["summary"] = summary;
    return j.dump(2);
}

void ExperimentReport::write_manifest(const std::string& path) const {
    nlohmann::ordered_json j = nlohmann::ordered_json::parse(replay_manifest());
    j["timing"] = timing;
    j["content_sha256"] = hex_encode(
        Sha256::hash({reinterpret_cast<const std::uint8_t*>(replay_manifest().data()),
                      replay_manifest().size()}));
    std::ofstream f(path);
    if (!f) throw std::runtime_error("report: cannot write " + path);
    f << j.dump(2) << "\n";
}

Interval wilson95(std::uint64_t successes, std::uint64_t trials) {
    if (trials == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double n = double(trials);
    double p = double(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (p + z2 / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

namespace {

void snapshot_config(const WindConfig& cfg, ExperimentReport& rep) {
    rep.config["n"] = std::to_string(cfg.codebook.n);
    rep.config["m"] = std::to_string(cfg.codebook.m);
    rep.config["shape"] = std::to_string(cfg.codebook.shape.c) + "x" +
                          std::to_string(cfg.codebook.shape.h) + "x" +
                          std::to_string(cfg.codebook.shape.w);
    rep.config["salt_sha256"] = hex_encode(Sha256::hash(cfg.codebook.salt));
    rep.config["rho_private_mean"] = std::to_string(cfg.channel.rho_private_mean);
    rep.config["rho_private_spread"] = std::to_string(cfg.channel.rho_private_spread);
    rep.config["rho_public_mean"] = std::to_string(cfg.channel.rho_public_mean);
    rep.config["rho_public_spread"] = std::to_string(cfg.channel.rho_public_spread);
    rep.config["regen_decay"] = std::to_string(cfg.channel.regen_decay);
    rep.config["channel_seed"] = std::to_string(cfg.channel.channel_seed);
    rep.config["tau_cos"] = std::to_string(cfg.tau_cos);
    rep.config["amplitude"] = std::to_string(cfg.rings.amplitude);
    rep.config["n_rings"] = std::to_string(cfg.rings.n_rings);
}

/// Deterministic choice of a generation index for trial t.
std::uint64_t pick_index(const WindConfig& cfg, std::uint64_t seed, std::uint64_t t) {
    GaussianStream gs(tagged_seed("wind.exp.pick", {seed, t}));
    return gs.next_below(cfg.codebook.n);
}

ChannelImage make_watermarked(const WindConfig& cfg, const Channel& channel, std::uint64_t i,
                              std::uint64_t nonce) {
    LatentTensor z = sample_noise(derive_seed(i, cfg.codebook.salt, cfg.codebook.n),
                                  cfg.codebook.shape);
    LatentTensor emb = embed_group(z, group_of(i, cfg.codebook.m), cfg.codebook.m, cfg.rings);
    return channel.generate(emb, nonce);
}

} // namespace

ExperimentReport run_channel_calibration(const WindConfig& cfg, std::size_t trials,
                                         std::uint64_t seed) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "channel_calibration";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    const TensorShape shape = cfg.codebook.shape;

    Welford recon, unrelated;
    for (std::size_t t = 0; t < trials; ++t) {
        LatentTensor z = fresh_latent("wind.exp.cal.z", seed, t, shape);
        ChannelImage img = channel.generate(z, t);
        recon.add(tensor_cosine(z, channel.invert_private(img, t)));
        LatentTensor other = fresh_latent("wind.exp.cal.other", seed, t, shape);
        unrelated.add(tensor_cosine(other, channel.invert_private(img, trials + t)));
    }
    rep.summary["trials"] = double(trials);
    rep.summary["private_mean"] = recon.mean;
    rep.summary["private_std"] = recon.stdev();
    rep.summary["unrelated_mean"] = unrelated.mean;
    rep.summary["unrelated_std"] = unrelated.stdev();
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_separation(const WindConfig& cfg, std::size_t trials, std::size_t null_pairs,
                                std::uint64_t seed) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "separation";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    const TensorShape shape = cfg.codebook.shape;
    const std::size_t d = shape.elems();

    Welford recon, attack, random_pairs;
    std::vector<double> rec_v, att_v, rnd_v;
    for (std::size_t t = 0; t < trials; ++t) {
        LatentTensor z = fresh_latent("wind.exp.sep.z", seed, t, shape);
        ChannelImage img = channel.generate(z, t);
        double c = tensor_cosine(z, channel.invert_private(img, t));
        recon.add(c);
        rec_v.push_back(c);
        LatentTensor stolen = channel.invert_public(img, t);
        double ca = tensor_cosine(z, channel.invert_private(channel.generate(stolen, t), trials + t));
        attack.add(ca);
        att_v.push_back(ca);
        double cr = tensor_cosine(z, fresh_latent("wind.exp.sep.rnd", seed, t, shape));
        random_pairs.add(cr);
        rnd_v.push_back(cr);
    }
    std::uint64_t fp = 0;
    double max_null = -1.0;
    for (std::size_t t = 0; t < null_pairs; ++t) {
        double c = tensor_cosine(fresh_latent("wind.exp.sep.na", seed, t, shape),
                                 fresh_latent("wind.exp.sep.nb", seed, t, shape));
        if (c >= cfg.tau_cos) ++fp;
        max_null = std::max(max_null, c);
    }

    rep.columns = {"bin_center", "recon", "attack", "random"};
    const double lo = -0.1, hi = 1.0;
    const int bins = 55;
    std::vector<std::array<double, 3>> hist(bins, {0, 0, 0});
    auto binod = [&](double v) { return std::clamp(int((v - lo) / (hi - lo) * bins), 0, bins - 1); };
    for (double v : rec_v) hist[std::size_t(binod(v))][0]++;
    for (double v : att_v) hist[std::size_t(binod(v))][1]++;
    for (double v : rnd_v) hist[std::size_t(binod(v))][2]++;
    for (int b = 0; b < bins; ++b) {
        double center = lo + (b + 0.5) * (hi - lo) / bins;
        rep.rows.push_back({"bin" + std::to_string(b),
                            {center, hist[std::size_t(b)][0], hist[std::size_t(b)][1],
                             hist[std::size_t(b)][2]}});
    }

    double pooled_rand = std::sqrt((recon.stdev() * recon.stdev() +
                                    random_pairs.stdev() * random_pairs.stdev()) /
                                   2.0);
    rep.summary["trials"] = double(trials);
    rep.summary["null_pairs"] = double(null_pairs);
    rep.summary["recon_mean"] = recon.mean;
    rep.summary["recon_std"] = recon.stdev();
    rep.summary["attack_mean"] = attack.mean;
    rep.summary["attack_std"] = attack.stdev();
    rep.summary["random_mean"] = random_pairs.mean;
    rep.summary["random_std"] = random_pairs.stdev();
    rep.summary["z_gap_recon_random"] = (recon.mean - random_pairs.mean) / pooled_rand;
    rep.summary["z_attack_below_tau"] =
        (cfg.tau_cos - attack.mean) / std::max(1e-12, attack.stdev());
    rep.summary["z_random_below_tau"] =
        (cfg.tau_cos - random_pairs.mean) / std::max(1e-12, random_pairs.stdev());
    rep.summary["fp_at_tau"] = double(fp);
    rep.summary["max_null_cos"] = max_null;
    rep.summary["log10_null_bound_at_tau"] =
        log_null_pvalue(cfg.tau_cos, d) / std::log(10.0);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_robustness(const WindConfig& cfg, const std::vector<AttackSpec>& attacks,
                                std::size_t trials, std::uint64_t seed, const SketchIndex* index,
                                std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "robustness";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    rep.columns = {"accuracy", "ci_lo", "ci_hi", "decision_rate", "mean_score", "mean_scanned",
                   "mean_ms"};

    for (int variant = 0; variant < 2; ++variant) {
        DetectVariant v = variant == 0 ? DetectVariant::Fast : DetectVariant::Full;
        Detector det(cfg.codebook, cfg.rings, cfg.detection(v, n_threads), channel, index);
        for (std::size_t a = 0; a <= attacks.size(); ++a) {
            const bool clean = a == attacks.size();
            std::vector<ChannelImage> imgs;
            std::vector<std::uint64_t> truth(trials);
            imgs.reserve(trials);
            for (std::size_t t = 0; t < trials; ++t) {
                std::uint64_t i = pick_index(cfg, seed + a * 1000003, t);
                truth[t] = i;
                ChannelImage img = make_watermarked(cfg, channel, i, t);
                if (!clean)
                    img = apply_attack(img, attacks[a], channel,
                                       seed_to_u64(tagged_seed("wind.exp.rob", {seed, a, t})));
                imgs.push_back(std::move(img));
            }
            auto results = det.detect_many(imgs, seed * 7919 + a * 131);
            std::uint64_t correct = 0, declared = 0;
            Welford score, scanned, ms;
            for (std::size_t t = 0; t < trials; ++t) {
                if (results[t].index && *results[t].index == truth[t]) ++correct;
                if (results[t].watermarked) ++declared;
                score.add(results[t].score);
                scanned.add(double(results[t].candidates_scanned));
                ms.add(results[t].wall_time_ms);
            }
            auto ci = wilson95(correct, trials);
            std::string label = std::string(v == DetectVariant::Fast ? "fast/" : "full/") +
                                (clean ? "clean" : attacks[a].to_string());
            rep.rows.push_back({label,
                                {double(correct) / double(trials), ci.lo, ci.hi,
                                 double(declared) / double(trials), score.mean, scanned.mean,
                                 ms.mean}});
        }
    }
    rep.summary["trials_per_cell"] = double(trials);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_steganalysis(const WindConfig& cfg, std::size_t k_pairs, std::size_t trials,
                                  std::uint64_t seed, const SketchIndex* index,
                                  std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "steganalysis";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    const TensorShape shape = cfg.codebook.shape;
    const std::uint64_t m = cfg.codebook.m;

    GaussianStream pick_g(tagged_seed("wind.exp.steg.g", {seed}));
    const std::uint64_t g_star = pick_g.next_below(m);

    auto group_index = [&](std::uint64_t k) {
        GaussianStream gs(tagged_seed("wind.exp.steg.i", {seed, k}));
        std::uint64_t count = cfg.codebook.group_size(g_star);
        return g_star + gs.next_below(count) * m;
    };

    std::vector<ChannelImage> watermarked, clean;
    for (std::size_t k = 0; k < k_pairs; ++k) {
        watermarked.push_back(make_watermarked(cfg, channel, group_index(k), 100000 + k));
        clean.push_back(channel.generate(fresh_latent("wind.exp.steg.c", seed, k, shape), k));
    }
    PatternEstimate est = steganalysis_estimate(watermarked, clean);

    Detector det(cfg.codebook, cfg.rings, cfg.detection(DetectVariant::Full, n_threads), channel,
                 index);
    SearchConfig s1 = cfg.search;

    std::uint64_t id_forge_ok = 0, full_forge_ok = 0, id_removed = 0;
    std::vector<ChannelImage> forged_batch, removed_batch;
    std::vector<std::uint64_t> removed_truth(trials);
    for (std::size_t t = 0; t < trials; ++t) {
        ChannelImage target = channel.generate(fresh_latent("wind.exp.steg.t", seed, t, shape), t);
        ChannelImage forged = steganalysis_forge(target, est);
        ExtractResult ex =
            extract_group(channel.invert_private(forged, 200000 + t), m, cfg.rings, s1);
        if (ex.group == g_star) ++id_forge_ok;
        forged_batch.push_back(std::move(forged));

        std::uint64_t i = group_index(k_pairs + t);
        removed_truth[t] = i;
        ChannelImage wm = make_watermarked(cfg, channel, i, 300000 + t);
        ChannelImage removed = steganalysis_remove(wm, est);
        ExtractResult exr =
            extract_group(channel.invert_private(removed, 400000 + t), m, cfg.rings, s1);
        if (exr.group != g_star) ++id_removed;
        removed_batch.push_back(std::move(removed));
    }
    auto forged_results = det.detect_many(forged_batch, seed * 31 + 7);
    for (auto& r : forged_results)
        if (r.watermarked) ++full_forge_ok;
    auto removed_results = det.detect_many(removed_batch, seed * 37 + 11);
    std::uint64_t detected_after_removal = 0;
    for (std::size_t t = 0; t < trials; ++t)
        if (removed_results[t].index && *removed_results[t].index == removed_truth[t])
            ++detected_after_removal;

    rep.summary["k_pairs"] = double(k_pairs);
    rep.summary["trials"] = double(trials);
    rep.summary["group"] = double(g_star);
    rep.summary["identifier_forgery_rate"] = double(id_forge_ok) / double(trials);
    rep.summary["identifier_removal_rate"] = double(id_removed) / double(trials);
    rep.summary["full_forgery_rate"] = double(full_forge_ok) / double(trials);
    rep.summary["detection_after_removal_rate"] =
        double(detected_after_removal) / double(trials);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_regeneration_curve(const WindConfig& cfg,
                                        const std::vector<std::uint64_t>& iterations,
                                        std::size_t trials, std::uint64_t seed,
                                        const SketchIndex* index, std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "regeneration_curve";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    Detector det(cfg.codebook, cfg.rings, cfg.detection(DetectVariant::Full, n_threads), channel,
                 index);
    rep.columns = {"iterations", "mean_similarity", "similarity_std", "detection_rate", "ci_lo",
                   "ci_hi"};

    for (std::uint64_t iters : iterations) {
        std::vector<ChannelImage> batch;
        std::vector<std::uint64_t> truth(trials);
        Welford sim;
        for (std::size_t t = 0; t < trials; ++t) {
            std::uint64_t i = pick_index(cfg, seed + iters * 65537, t);
            truth[t] = i;
            LatentTensor z = sample_noise(derive_seed(i, cfg.codebook.salt, cfg.codebook.n),
                                          cfg.codebook.shape);
            ChannelImage img = make_watermarked(cfg, channel, i, t);
            ChannelImage attacked = regenerate(
                img, iters, channel, seed_to_u64(tagged_seed("wind.exp.regen", {seed, iters, t})));
            sim.add(tensor_cosine(z, channel.invert_private(attacked, 500000 + iters * 1000 + t)));
            batch.push_back(std::move(attacked));
        }
        auto results = det.detect_many(batch, seed * 101 + iters);
        std::uint64_t correct = 0;
        for (std::size_t t = 0; t < trials; ++t)
            if (results[t].index && *results[t].index == truth[t]) ++correct;
        auto ci = wilson95(correct, trials);
        rep.rows.push_back({"iter" + std::to_string(iters),
                            {double(iters), sim.mean, sim.stdev(),
                             double(correct) / double(trials), ci.lo, ci.hi}});
    }
    rep.summary["trials_per_point"] = double(trials);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_forgery(const WindConfig& cfg, std::size_t trials, std::uint64_t seed,
                             const SketchIndex* index, std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "reconstruction_forgery";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    Detector det(cfg.codebook, cfg.rings, cfg.detection(DetectVariant::Full, n_threads), channel,
                 index);

    Welford chain;
    std::vector<ChannelImage> forged_batch;
    for (std::size_t t = 0; t < trials; ++t) {
        std::uint64_t i = pick_index(cfg, seed, t);
        LatentTensor z =
            sample_noise(derive_seed(i, cfg.codebook.salt, cfg.codebook.n), cfg.codebook.shape);
        ChannelImage img = make_watermarked(cfg, channel, i, t);
        ChannelImage forged = reconstruction_forgery(img, channel, 600000 + t);
        chain.add(tensor_cosine(z, channel.invert_private(forged, 700000 + t)));
        forged_batch.push_back(std::move(forged));
    }
    auto results = det.detect_many(forged_batch, seed * 17 + 3);
    std::uint64_t rejected = 0;
    for (auto& r : results)
        if (!r.watermarked) ++rejected;

    rep.summary["trials"] = double(trials);
    rep.summary["chain_mean"] = chain.mean;
    rep.summary["chain_std"] = chain.stdev();
    rep.summary["rejection_rate"] = double(rejected) / double(trials);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

namespace {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Brute-force oracle: for each unit query row, the argmax candidate over the
/// whole codebook, plus exact scores at each query's shortlist indices.
struct BruteResult {
    std::vector<std::uint64_t> argmax;
    std::vector<double> best;
    std::vector<std::vector<double>> shortlist_scores;
};

BruteResult brute_scan(const CodebookSpec& spec, const RowMatrixXf& queries,
                       const std::vector<std::vector<std::uint64_t>>& shortlists,
                       double norm_correction, std::uint32_t n_threads) {
    const std::size_t nq = std::size_t(queries.rows());
    const std::size_t d = spec.shape.elems();
    const std::uint32_t threads =
        n_threads ? n_threads : std::max(1u, std::thread::hardware_concurrency());

    struct Part {
        std::vector<std::uint64_t> argmax;
        std::vector<double> best;
        std::vector<std::vector<double>> sl;
    };
    std::vector<Part> parts(threads);
    auto worker = [&](std::uint32_t tid) {
        Part& part = parts[tid];
        part.argmax.assign(nq, 0);
        part.best.assign(nq, -2.0);
        part.sl.resize(nq);
        for (std::size_t q = 0; q < nq; ++q) part.sl[q].assign(shortlists[q].size(), -2.0);
        constexpr std::uint64_t kBlock = 64;
        const Eigen::Index di = Eigen::Index(d);
        RowMatrixXf block(Eigen::Index(kBlock), di);
        std::vector<float> norms(kBlock);
        RowMatrixXf dots;
        const std::uint64_t per = (spec.n + threads - 1) / threads;
        const std::uint64_t lo = std::min<std::uint64_t>(spec.n, tid * per);
        const std::uint64_t hi = std::min<std::uint64_t>(spec.n, lo + per);
        for (std::uint64_t b = lo; b < hi; b += kBlock) {
            const auto cnt = Eigen::Index(std::min(kBlock, hi - b));
            for (Eigen::Index r = 0; r < cnt; ++r) {
                LatentTensor z =
                    sample_noise(derive_seed(b + std::uint64_t(r), spec.salt, spec.n), spec.shape);
                std::memcpy(block.row(r).data(), z.data.data(), d * sizeof(float));
                norms[std::size_t(r)] = block.row(r).norm();
            }
            dots.noalias() = block.topRows(cnt) * queries.transpose();
            for (Eigen::Index r = 0; r < cnt; ++r) {
                const std::uint64_t idx = b + std::uint64_t(r);
                const float cn = norms[std::size_t(r)];
                if (cn == 0) continue;
                for (std::size_t q = 0; q < nq; ++q) {
                    double s = double(dots(r, Eigen::Index(q))) / (double(cn) * norm_correction);
                    if (s > part.best[q] || (s == part.best[q] && idx < part.argmax[q])) {
                        part.best[q] = s;
                        part.argmax[q] = idx;
                    }
                    for (std::size_t k = 0; k < shortlists[q].size(); ++k)
                        if (shortlists[q][k] == idx) part.sl[q][k] = s;
                }
            }
        }
    };
    if (threads <= 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (std::uint32_t t = 0; t < threads; ++t) pool.emplace_back(worker, t);
        for (auto& th : pool) th.join();
    }

    BruteResult out;
    out.argmax.assign(nq, 0);
    out.best.assign(nq, -2.0);
    out.shortlist_scores.resize(nq);
    for (std::size_t q = 0; q < nq; ++q) out.shortlist_scores[q].assign(shortlists[q].size(), -2.0);
    for (auto& part : parts) {
        if (part.best.empty()) continue;
        for (std::size_t q = 0; q < nq; ++q) {
            if (part.best[q] > out.best[q] ||
                (part.best[q] == out.best[q] && part.argmax[q] < out.argmax[q])) {
                out.best[q] = part.best[q];
                out.argmax[q] = part.argmax[q];
            }
            for (std::size_t k = 0; k < part.sl[q].size(); ++k)
                out.shortlist_scores[q][k] = std::max(out.shortlist_scores[q][k], part.sl[q][k]);
        }
    }
    return out;
}

} // namespace

ExperimentReport run_index_fidelity(const WindConfig& cfg, const SketchIndex& index,
                                    std::size_t queries, std::uint64_t seed,
                                    std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "index_fidelity";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    RingMap map(cfg.rings, cfg.codebook.shape);
    const double corr = std::sqrt(1.0 - map.dim_fraction(cfg.codebook.shape));
    const std::size_t d = cfg.codebook.shape.elems();
    const std::uint32_t top_k = cfg.shortlist_top_k;

    // two query populations: clean reconstructions and 10-iteration regenerations
    const std::size_t total = 2 * queries;
    const Eigen::Index di = Eigen::Index(d);
    RowMatrixXf qrows(Eigen::Index(total), di);
    std::vector<std::uint64_t> truth(total);
    std::vector<std::vector<std::uint64_t>> shortlists(total);
    for (std::size_t t = 0; t < total; ++t) {
        const bool regen_pop = t >= queries;
        std::uint64_t i = pick_index(cfg, seed + (regen_pop ? 999331 : 0), t % queries);
        truth[t] = i;
        ChannelImage img = make_watermarked(cfg, channel, i, t);
        if (regen_pop)
            img = regenerate(img, 10, channel, seed_to_u64(tagged_seed("wind.exp.idx", {seed, t})));
        LatentTensor recon = channel.invert_private(img, 800000 + t);
        LatentTensor q = remove_pattern(recon, 0, cfg.rings);
        Eigen::Map<const Eigen::VectorXf> v(q.data.data(), Eigen::Index(d));
        float n = v.norm();
        if (n > 0)
            qrows.row(Eigen::Index(t)) = v.transpose() / n;
        else
            qrows.row(Eigen::Index(t)).setZero();
        shortlists[t] = index.query(q, top_k);
    }

    BruteResult brute = brute_scan(cfg.codebook, qrows, shortlists, corr, n_threads);

    // recall = shortlist contains the brute-force argmax; composite agreement =
    // exact verification over the shortlist returns that same argmax
    std::uint64_t recall_clean = 0, recall_regen = 0, agree = 0, hits_total = 0;
    std::uint64_t oracle_clean = 0, oracle_regen = 0;
    for (std::size_t t = 0; t < total; ++t) {
        (t < queries ? oracle_clean : oracle_regen) += brute.argmax[t] == truth[t] ? 1 : 0;
        bool hit = std::find(shortlists[t].begin(), shortlists[t].end(), brute.argmax[t]) !=
                   shortlists[t].end();
        if (!hit) continue;
        (t < queries ? recall_clean : recall_regen) += 1;
        ++hits_total;
        std::size_t best_k = 0;
        for (std::size_t k = 1; k < shortlists[t].size(); ++k) {
            double a = brute.shortlist_scores[t][k], b = brute.shortlist_scores[t][best_k];
            if (a > b || (a == b && shortlists[t][k] < shortlists[t][best_k])) best_k = k;
        }
        if (shortlists[t][best_k] == brute.argmax[t]) ++agree;
    }

    rep.summary["queries_per_population"] = double(queries);
    rep.summary["top_k"] = double(top_k);
    rep.summary["recall_clean"] = double(recall_clean) / double(queries);
    rep.summary["recall_regen10"] = double(recall_regen) / double(queries);
    rep.summary["composite_agreement_on_hits"] =
        hits_total ? double(agree) / double(hits_total) : 1.0;
    rep.summary["oracle_correct_clean"] = double(oracle_clean) / double(queries);
    rep.summary["oracle_correct_regen10"] = double(oracle_regen) / double(queries);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

ExperimentReport run_workbound(const WindConfig& cfg, std::size_t fast_trials,
                               std::size_t full_trials, std::uint64_t seed,
                               const SketchIndex* index, std::uint32_t n_threads) {
    auto t0 = Clock::now();
    ExperimentReport rep;
    rep.id = "workbound";
    rep.seed = seed;
    snapshot_config(cfg, rep);
    Channel channel(cfg.channel);
    Detector fast(cfg.codebook, cfg.rings, cfg.detection(DetectVariant::Fast, n_threads), channel,
                  index);
    Detector full(cfg.codebook, cfg.rings, cfg.detection(DetectVariant::Full, n_threads), channel,
                  index);

    std::vector<double> fast_ms, full_ms;
    std::uint64_t exact_scans = 0;
    std::uint64_t group_ok = 0;
    for (std::size_t t = 0; t < fast_trials; ++t) {
        std::uint64_t i = pick_index(cfg, seed, t);
        ChannelImage img = make_watermarked(cfg, channel, i, t);
        auto r = fast.detect(img, 900000 + t);
        fast_ms.push_back(r.wall_time_ms);
        if (r.candidates_scanned == cfg.codebook.group_size(r.group)) ++exact_scans;
        if (r.group == group_of(i, cfg.codebook.m)) ++group_ok;
    }
    // Full timed on unwatermarked inputs, where the exhaustive path runs.
    for (std::size_t t = 0; t < full_trials; ++t) {
        ChannelImage img =
            channel.generate(fresh_latent("wind.exp.wb", seed, t, cfg.codebook.shape), t);
        auto r = full.detect(img, 950000 + t);
        full_ms.push_back(r.wall_time_ms);
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v.empty() ? 0.0 : v[v.size() / 2];
    };
    rep.summary["fast_trials"] = double(fast_trials);
    rep.summary["full_trials"] = double(full_trials);
    rep.summary["fast_ms_median"] = median(fast_ms);
    rep.summary["full_ms_median"] = median(full_ms);
    rep.summary["fullfast_ratio"] = median(full_ms) / std::max(1e-9, median(fast_ms));
    rep.summary["fast_exact_group_scan_rate"] = double(exact_scans) / double(fast_trials);
    rep.summary["fast_group_hit_rate"] = double(group_ok) / double(fast_trials);
    rep.timing["seconds"] = seconds_since(t0);
    return rep;
}

double calibrate_l2_gate(const WindConfig& cfg, std::size_t pairs, std::uint64_t seed) {
    Channel channel(cfg.channel);
    RingMap map(cfg.rings, cfg.codebook.shape);
    const double corr = std::sqrt(1.0 - map.dim_fraction(cfg.codebook.shape));
    std::vector<double> dists;
    dists.reserve(pairs);
    for (std::size_t t = 0; t < pairs; ++t) {
        LatentTensor a = fresh_latent("wind.l2gate.a", seed, t, cfg.codebook.shape);
        LatentTensor recon = channel.invert_private(a, t);
        LatentTensor q = remove_pattern(recon, 0, cfg.rings);
        LatentTensor z = fresh_latent("wind.l2gate.b", seed, t, cfg.codebook.shape);
        double qn = tensor_norm(q);
        double zn = tensor_norm(z) * corr;
        double dot = tensor_dot(q, z);
        dists.push_back(std::sqrt(std::max(0.0, qn * qn + zn * zn - 2.0 * dot)));
    }
    std::sort(dists.begin(), dists.end());
    std::size_t at = std::size_t(std::max<double>(0.0, 1e-4 * double(pairs)));
    return dists[std::min(at, dists.size() - 1)];
}

} // namespace wind
