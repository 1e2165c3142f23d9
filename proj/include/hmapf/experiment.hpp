#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hmapf/metrics.hpp"

namespace hmapf {

// Flat key=value run configuration; flags override file keys.
struct RunConfig {
    std::string map_spec = "warehouse:3";     // warehouse:<n> or a map file path
    std::string overlay_spec = "alternating";  // alternating | none | overlay file path
    HeuristicMode mode = HeuristicMode::none();
    int agents = 0;
    double density = 0.0;
    int w = 5;
    int h = 5;
    bool partial = false;
    int iterations = 50;
    int episodes = 20;
    double time_limit_s = 60.0;
    uint64_t seed = 1;
    bool escalate_w = false;
    int escalate_cap = 32;
    std::string out = "results";

    void set(const std::string& key, const std::string& value);
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Map, highway, planning graph and shared table caches for one config.
struct BatchContext {
    GridMap base_map;
    Highway highway;
    GridMap planning_map;
    std::shared_ptr<HeuristicTableCache> plan_tables;
    std::shared_ptr<HeuristicTableCache> meas_tables;
    std::string map_name;

    static BatchContext build(const RunConfig& cfg);
};

// splitmix64 of batch_seed + index * golden gamma; episode k is
// reproducible in isolation.
uint64_t mix_seed(uint64_t batch_seed, uint64_t index);

struct BatchResult {
    std::vector<EpisodeRow> rows;
    BatchSummary summary;
};

EpisodeConfig episode_config(const RunConfig& cfg, uint64_t episode_seed);

// Runs cfg.episodes seeded episodes, up to `jobs` concurrently.
BatchResult run_batch(const RunConfig& cfg, const BatchContext& ctx, int jobs);

void write_csv(const std::string& path, const std::vector<EpisodeRow>& rows);
std::string summary_json_text(const RunConfig& cfg, const BatchResult& result);

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

struct SweepCell {
    std::vector<std::pair<std::string, std::string>> coords;
    std::string name;
    BatchResult result;
};

// Every cross-product cell, run in deterministic order.
std::vector<SweepCell> run_sweep(const RunConfig& base, const std::vector<SweepAxis>& axes,
                                 int jobs);

// Relative-ratio report against the matched c=1 / mode=none baseline
// cell; throws when a baseline is missing.
std::string sweep_report_json(const RunConfig& base, const std::vector<SweepAxis>& axes,
                              const std::vector<SweepCell>& cells);

}  // namespace hmapf
