#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wind/attacks.hpp"
#include "wind/config.hpp"
#include "wind/detector.hpp"
#include "wind/sim_index.hpp"

namespace wind {

/// One experiment's outcome: labelled numeric rows plus summary statistics.
/// Everything randomized is derived from `seed`, so a report replays exactly;
/// wall-clock fields live under timing and are excluded from replay checks.
struct ExperimentReport {
    std::string id;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> config;
    std::vector<std::string> columns;
    struct Row {
        std::string label;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    std::map<std::string, double> summary;
    std::map<std::string, double> timing;

    double row(const std::string& label, const std::string& column) const;
    void write_csv(const std::string& path) const;
    /// Deterministic JSON snapshot (timing excluded).
    std::string replay_manifest() const;
    void write_manifest(const std::string& path) const;
};

/// Wilson 95% interval for k successes in n trials.
struct Interval {
    double lo = 0.0, hi = 1.0;
};
Interval wilson95(std::uint64_t successes, std::uint64_t trials);

// Experiment runners. The sketch index parameter may be null; runners that
// need exhaustive fallbacks just run slower without it.

ExperimentReport run_channel_calibration(const WindConfig& cfg, std::size_t trials,
                                         std::uint64_t seed);

ExperimentReport run_separation(const WindConfig& cfg, std::size_t trials, std::size_t null_pairs,
                                std::uint64_t seed);

ExperimentReport run_robustness(const WindConfig& cfg, const std::vector<AttackSpec>& attacks,
                                std::size_t trials, std::uint64_t seed, const SketchIndex* index,
                                std::uint32_t n_threads = 0);

ExperimentReport run_steganalysis(const WindConfig& cfg, std::size_t k_pairs, std::size_t trials,
                                  std::uint64_t seed, const SketchIndex* index,
                                  std::uint32_t n_threads = 0);

ExperimentReport run_regeneration_curve(const WindConfig& cfg,
                                        const std::vector<std::uint64_t>& iterations,
                                        std::size_t trials, std::uint64_t seed,
                                        const SketchIndex* index, std::uint32_t n_threads = 0);

ExperimentReport run_forgery(const WindConfig& cfg, std::size_t trials, std::uint64_t seed,
                             const SketchIndex* index, std::uint32_t n_threads = 0);

ExperimentReport run_index_fidelity(const WindConfig& cfg, const SketchIndex& index,
                                    std::size_t queries, std::uint64_t seed,
                                    std::uint32_t n_threads = 0);

ExperimentReport run_workbound(const WindConfig& cfg, std::size_t fast_trials,
                               std::size_t full_trials, std::uint64_t seed,
                               const SketchIndex* index, std::uint32_t n_threads = 0);

/// Calibrate the l2 acceptance gate as the 1e-4 lower quantile of the null
/// matching distance (the distance analogue of the cosine threshold).
double calibrate_l2_gate(const WindConfig& cfg, std::size_t pairs, std::uint64_t seed);

} // namespace wind
