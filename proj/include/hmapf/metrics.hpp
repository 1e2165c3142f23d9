#pragma once

#include <string>
#include <vector>

#include "hmapf/lifelong.hpp"

namespace hmapf {

// tasks finished per executed timestep
double throughput(long tasks_finished, long timesteps);

// against-direction moves over all moves; waits are excluded from both
double avoidance_rate(long against_moves, long total_moves);

// wait steps and move steps over one task's location trace
std::pair<int, int> task_timestep_split(const Path& trace);

struct EpisodeSummary {
    bool fail = false;
    double throughput = 0.0;
    double mean_runtime_s = 0.0;
    double mean_generated_nodes = 0.0;
    double mean_idle_timesteps = 0.0;    // per finished task
    double mean_moving_timesteps = 0.0;  // per finished task
    double highway_avoidance_rate = 0.0;
    double rerouting_rate = 0.0;
    long deadlock_iterations = 0;
    long tasks_finished = 0;
    long executed_timesteps = 0;
};

EpisodeSummary summarize_episode(const EpisodeResult& result);

// Arithmetic means over non-fail episodes; fail episodes only count.
struct BatchSummary {
    int episodes = 0;
    int fail_count = 0;
    bool has_means = false;
    double throughput = 0.0;
    double mean_runtime_s = 0.0;
    double mean_generated_nodes = 0.0;
    double mean_idle_timesteps = 0.0;
    double mean_moving_timesteps = 0.0;
    double highway_avoidance_rate = 0.0;
    double rerouting_rate = 0.0;
    double deadlock_iterations = 0.0;
};

BatchSummary summarize(const std::vector<EpisodeSummary>& episodes);

// CSV rows, one per episode.
struct EpisodeRow {
    uint64_t seed = 0;
    std::string mode;
    double c = 1.0;
    int w = 5;
    int h = 5;
    std::string map;
    int agents = 0;
    EpisodeSummary summary;
};

std::string csv_header();
std::string csv_row(const EpisodeRow& row);
std::string format_c(double c);

}  // namespace hmapf
