#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <iostream>

#include "wind/attacks.hpp"
#include "wind/config.hpp"
#include "wind/detector.hpp"
#include "wind/evalharness.hpp"
#include "wind/sha256.hpp"
#include "wind/sim_index.hpp"
#include "wind/store.hpp"

namespace fs = std::filesystem;
using namespace wind;

namespace {

std::string config_fingerprint_hex(const WindConfig& cfg) {
    auto fp = spec_fingerprint(cfg.codebook);
    return hex_encode(fp).substr(0, 16);
}

std::uint64_t now_utc_seconds() {
    return std::uint64_t(std::chrono::duration_cast<std::chrono::seconds>(
                             std::chrono::system_clock::now().time_since_epoch())
                             .count());
}

int cmd_gen(const WindConfig& cfg, std::uint64_t seed, std::uint64_t count,
            const std::string& out_dir, const std::string& log_path, std::uint64_t label) {
    fs::create_directories(out_dir);
    Channel channel(cfg.channel);
    GenerationLog log(log_path.empty() ? (out_dir + "/generations.log") : log_path);
    std::uint64_t seq = log.load().size();
    for (std::uint64_t k = 0; k < count; ++k) {
        GaussianStream pick(tagged_seed("wind.cli.gen", {seed, k}));
        std::uint64_t i = pick.next_below(cfg.codebook.n);
        std::uint64_t g = group_of(i, cfg.codebook.m);
        LatentTensor z =
            sample_noise(derive_seed(i, cfg.codebook.salt, cfg.codebook.n), cfg.codebook.shape);
        LatentTensor emb = embed_group(z, g, cfg.codebook.m, cfg.rings);
        std::uint64_t nonce = seed_to_u64(tagged_seed("wind.cli.nonce", {seed, k}));
        ChannelImage img = channel.generate(emb, nonce);
        std::string file = out_dir + "/gen_" + std::to_string(seq + k) + ".wndt";
        write_tensor(img, file);
        GenerationRecord rec;
        rec.timestamp = now_utc_seconds();
        rec.seq = seq + k;
        rec.index = i;
        rec.group = g;
        rec.nonce = nonce;
        rec.config_fingerprint = config_fingerprint_hex(cfg);
        rec.label_hash = label;
        rec.file = file;
        log.append(rec);
        std::cout << "generated " << file << " index=" << i << " group=" << g << "\n";
    }
    return 0;
}

int cmd_detect(const WindConfig& cfg, std::uint64_t seed, std::uint32_t threads,
               const std::string& path, const std::string& variant_name,
               const std::string& index_path) {
    LatentTensor img = read_tensor(path);
    if (!(img.shape == cfg.codebook.shape)) {
        std::cerr << "error: tensor shape does not match the configured codebook\n";
        return 2;
    }
    DetectVariant variant = variant_name == "fast" ? DetectVariant::Fast : DetectVariant::Full;
    Channel channel(cfg.channel);
    std::optional<SketchIndex> index;
    if (!index_path.empty()) index = SketchIndex::load(index_path, cfg.codebook);
    Detector det(cfg.codebook, cfg.rings, cfg.detection(variant, threads), channel,
                 index ? &*index : nullptr);
    DetectionResult r = det.detect(img, seed);
    std::cout << "decision=" << (r.watermarked ? "watermarked" : "not_watermarked")
              << " index=" << (r.index ? std::to_string(*r.index) : "none")
              << " group=" << r.group << " cos=" << r.score << " l2=" << r.l2
              << " p_value=" << r.p_value << " scanned=" << r.candidates_scanned
              << " ms=" << r.wall_time_ms << "\n";
    return r.watermarked ? 0 : 1;
}

int cmd_attack(const WindConfig& cfg, std::uint64_t seed, const std::string& in,
               const std::string& spec_text, const std::string& out,
               const std::string& log_path) {
    LatentTensor img = read_tensor(in);
    AttackSpec spec = AttackSpec::parse(spec_text);
    Channel channel(cfg.channel);
    ChannelImage attacked = apply_attack(img, spec, channel, seed);
    write_tensor(attacked, out);
    if (!log_path.empty()) {
        GenerationLog log(log_path);
        GenerationRecord rec;
        rec.timestamp = now_utc_seconds();
        rec.seq = log.load().size();
        rec.nonce = seed;
        rec.attack = spec.to_string();
        rec.config_fingerprint = config_fingerprint_hex(cfg);
        rec.file = out;
        log.append(rec);
    }
    std::cout << "attacked " << in << " -> " << out << " (" << spec.to_string() << ")\n";
    return 0;
}

int cmd_bench(const WindConfig& cfg, std::uint64_t seed, std::uint32_t threads,
              const std::string& suite, const std::string& out_dir, std::size_t trials,
              const std::string& index_path) {
    fs::create_directories(out_dir);
    std::optional<SketchIndex> index;
    auto ensure_index = [&]() -> const SketchIndex* {
        if (!index) {
            if (!index_path.empty() && fs::exists(index_path)) {
                index = SketchIndex::load(index_path, cfg.codebook);
            } else {
                std::cout << "building sketch index (n=" << cfg.codebook.n << ")...\n";
                index = SketchIndex::build(cfg.codebook, cfg.sketch_k_dims,
                                           cfg.sketch_projection_seed, threads);
                if (!index_path.empty()) index->save(index_path);
            }
        }
        return &*index;
    };
    auto emit = [&](const ExperimentReport& rep) {
        rep.write_csv(out_dir + "/" + rep.id + ".csv");
        rep.write_manifest(out_dir + "/" + rep.id + ".json");
        std::cout << rep.id << ":\n";
        for (const auto& [k, v] : rep.summary) std::cout << "  " << k << " = " << v << "\n";
    };

    bool all = suite == "all";
    if (all || suite == "calibration")
        emit(run_channel_calibration(cfg, trials ? trials : 500, seed));
    if (all || suite == "separation")
        emit(run_separation(cfg, trials ? trials : 500, 10000, seed));
    if (all || suite == "robustness") {
        std::vector<AttackSpec> battery = {
            AttackSpec::parse("rotate:75"), AttackSpec::parse("jpeg:25"),
            AttackSpec::parse("cropscale:0.75"), AttackSpec::parse("blur:8"),
            AttackSpec::parse("noise:0.1"), AttackSpec::parse("bright:6")};
        emit(run_robustness(cfg, battery, trials ? trials : 100, seed, ensure_index(), threads));
    }
    if (all || suite == "steganalysis")
        emit(run_steganalysis(cfg, 512, trials ? trials : 200, seed, ensure_index(), threads));
    if (all || suite == "regeneration")
        emit(run_regeneration_curve(cfg, {1, 10, 20, 30, 40, 50}, trials ? trials : 100, seed,
                                    ensure_index(), threads));
    if (all || suite == "forgery")
        emit(run_forgery(cfg, trials ? trials : 500, seed, ensure_index(), threads));
    if (all || suite == "index")
        emit(run_index_fidelity(cfg, *ensure_index(), trials ? trials : 500, seed, threads));
    if (all || suite == "workbound")
        emit(run_workbound(cfg, trials ? trials : 20, 5, seed, ensure_index(), threads));
    return 0;
}

int cmd_calibrate(WindConfig& cfg, const std::string& config_path, std::uint64_t seed,
                  std::size_t trials, double pm, double ps, double cm, double cs) {
    CalibrationTarget target;
    target.private_mean = pm;
    target.private_std = ps;
    target.public_chain_mean = cm;
    target.public_chain_std = cs;
    std::cout << "fitting channel parameters (" << trials << " trials/round)...\n";
    ChannelParams fitted = calibrate_channel(target, trials, cfg.codebook.shape,
                                             cfg.channel.channel_seed ^ seed);
    cfg.channel = fitted;
    cfg.l2_gate = calibrate_l2_gate(cfg, 20000, seed);
    save_config(cfg, config_path);
    std::cout << "rho_private = (" << fitted.rho_private_mean << ", " << fitted.rho_private_spread
              << ")\nrho_public = (" << fitted.rho_public_mean << ", " << fitted.rho_public_spread
              << ")\nl2_gate = " << cfg.l2_gate << "\nconfig rewritten: " << config_path << "\n";
    return 0;
}

int cmd_log(const std::string& log_path, std::int64_t index, std::uint64_t from, std::uint64_t to) {
    GenerationLog log(log_path);
    std::vector<GenerationRecord> recs =
        index >= 0 ? log.query_index(std::uint64_t(index)) : log.query_time(from, to);
    if (log.truncated_tail() > 0)
        std::cerr << "warning: ignored " << log.truncated_tail() << " bytes of torn tail record\n";
    for (const auto& r : recs) {
        std::cout << "ts=" << r.timestamp << " seq=" << r.seq << " index=" << r.index
                  << " group=" << r.group << " nonce=" << r.nonce << " label=" << r.label_hash
                  << (r.attack.empty() ? "" : (" attack=" + r.attack)) << " file=" << r.file
                  << "\n";
    }
    std::cout << "(" << recs.size() << " records)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"wind: initial-noise watermarking with group-identifier retrieval"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::uint32_t threads = 0;
    app.add_option("--config", config_path, "path to the run configuration");
    app.add_option("--seed", seed, "seed for every randomized step");
    app.add_option("--threads", threads, "worker threads (0 = hardware)");

    auto* gen = app.add_subcommand("gen", "generate watermarked latents");
    std::uint64_t count = 1, label = 0;
    std::string out_dir = "out", log_path;
    gen->add_option("--count", count, "number of generations");
    gen->add_option("--out", out_dir, "output directory");
    gen->add_option("--log", log_path, "generation log path");
    gen->add_option("--label", label, "opaque prompt-label hash");

    auto* detect = app.add_subcommand("detect", "detect a watermark in a latent tensor file");
    std::string detect_path, variant = "full", index_path;
    detect->add_option("file", detect_path, "tensor file")->required();
    detect->add_option("--variant", variant, "fast|full")
        ->check(CLI::IsMember({"fast", "full"}));
    detect->add_option("--index", index_path, "sketch index file");

    auto* attack = app.add_subcommand("attack", "apply a transformation or adversarial attack");
    std::string attack_in, attack_spec, attack_out = "attacked.wndt", attack_log;
    attack->add_option("file", attack_in, "input tensor")->required();
    attack->add_option("--spec", attack_spec, "e.g. rotate:75, jpeg:25, cropscale:0.75")
        ->required();
    attack->add_option("--out", attack_out, "output tensor");
    attack->add_option("--log", attack_log, "append provenance to this log");

    auto* bench = app.add_subcommand("bench", "run experiment suites");
    std::string suite = "all", bench_out = "bench_out", bench_index;
    std::size_t bench_trials = 0;
    bench->add_option("--suite", suite,
                      "calibration|separation|robustness|steganalysis|regeneration|forgery|"
                      "index|workbound|all");
    bench->add_option("--out", bench_out, "report directory");
    bench->add_option("--trials", bench_trials, "override per-cell trials");
    bench->add_option("--index", bench_index, "sketch index file (built if missing)");

    auto* calibrate = app.add_subcommand("calibrate", "fit channel parameters and thresholds");
    std::size_t cal_trials = 500;
    double pm = 0.888, ps = 0.053, cm = 0.166, cs = 0.063;
    calibrate->add_option("--trials", cal_trials);
    calibrate->add_option("--private-mean", pm);
    calibrate->add_option("--private-std", ps);
    calibrate->add_option("--chain-mean", cm);
    calibrate->add_option("--chain-std", cs);

    auto* logq = app.add_subcommand("log", "query the generation log");
    std::string query_log = "out/generations.log";
    std::int64_t q_index = -1;
    std::uint64_t q_from = 0, q_to = UINT64_MAX;
    logq->add_option("--log", query_log, "log path");
    logq->add_option("--index", q_index, "filter by noise index");
    logq->add_option("--from", q_from, "time range start (UTC seconds)");
    logq->add_option("--to", q_to, "time range end (UTC seconds)");

    auto* index_cmd = app.add_subcommand("index", "build the sketch index");
    std::string index_out = "codebook.wndx";
    index_cmd->add_option("--out", index_out, "index file path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (logq->parsed()) return cmd_log(query_log, q_index, q_from, q_to);
        if (config_path.empty()) {
            std::cerr << "error: --config is required\n";
            return 2;
        }
        WindConfig cfg = load_config(config_path);
        if (gen->parsed()) return cmd_gen(cfg, seed, count, out_dir, log_path, label);
        if (detect->parsed()) return cmd_detect(cfg, seed, threads, detect_path, variant, index_path);
        if (attack->parsed()) return cmd_attack(cfg, seed, attack_in, attack_spec, attack_out, attack_log);
        if (bench->parsed()) return cmd_bench(cfg, seed, threads, suite, bench_out, bench_trials, bench_index);
        if (calibrate->parsed()) return cmd_calibrate(cfg, config_path, seed, cal_trials, pm, ps, cm, cs);
        if (index_cmd->parsed()) {
            SketchIndex idx = SketchIndex::build(cfg.codebook, cfg.sketch_k_dims,
                                                 cfg.sketch_projection_seed, threads);
            idx.save(index_out);
            std::cout << "index written: " << index_out << " (n=" << idx.size()
                      << ", k=" << idx.k_dims() << ")\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
