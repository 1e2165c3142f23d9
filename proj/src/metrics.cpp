#include "hmapf/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace hmapf {

double throughput(long tasks_finished, long timesteps) {
    if (timesteps <= 0) throw std::invalid_argument("throughput: timesteps must be positive");
    return static_cast<double>(tasks_finished) / static_cast<double>(timesteps);
}

double avoidance_rate(long against_moves, long total_moves) {
    if (against_moves > total_moves)
        throw std::invalid_argument("avoidance_rate: against moves exceed total moves");
    if (total_moves == 0) return 0.0;
    return static_cast<double>(against_moves) / static_cast<double>(total_moves);
}

std::pair<int, int> task_timestep_split(const Path& trace) {
    int idle = 0, moving = 0;
    for (std::size_t i = 0; i + 1 < trace.size(); ++i)
        (trace[i + 1] == trace[i] ? idle : moving) += 1;
    return {idle, moving};
}

EpisodeSummary summarize_episode(const EpisodeResult& result) {
    EpisodeSummary s;
    s.fail = result.fail;
    s.tasks_finished = result.tasks_finished;
    s.executed_timesteps = result.executed_timesteps;
    if (result.fail) return s;

    s.throughput = throughput(result.tasks_finished, result.executed_timesteps);
    long against = 0, total = 0;
    double runtime = 0.0, nodes = 0.0, reroute = 0.0;
    for (const IterationRecord& it : result.iterations) {
        runtime += it.runtime_s;
        nodes += static_cast<double>(it.generated_nodes);
        reroute += it.rerouting_agent_fraction;
        against += it.against_highway_moves;
        total += it.total_moves;
        if (it.deadlock_flag) ++s.deadlock_iterations;
    }
    const double iters = static_cast<double>(result.iterations.size());
    if (iters > 0) {
        s.mean_runtime_s = runtime / iters;
        s.mean_generated_nodes = nodes / iters;
        s.rerouting_rate = reroute / iters;
    }
    s.highway_avoidance_rate = avoidance_rate(against, total);
    if (!result.finished_tasks.empty()) {
        double idle = 0.0, moving = 0.0;
        for (const TaskRecord& t : result.finished_tasks) {
            idle += t.idle;
            moving += t.moving;
        }
        s.mean_idle_timesteps = idle / static_cast<double>(result.finished_tasks.size());
        s.mean_moving_timesteps = moving / static_cast<double>(result.finished_tasks.size());
    }
    return s;
}

BatchSummary summarize(const std::vector<EpisodeSummary>& episodes) {
    BatchSummary b;
    b.episodes = static_cast<int>(episodes.size());
    double k = 0.0;
    for (const EpisodeSummary& e : episodes) {
        if (e.fail) {
            ++b.fail_count;
            continue;
        }
        k += 1.0;
        b.throughput += e.throughput;
        b.mean_runtime_s += e.mean_runtime_s;
        b.mean_generated_nodes += e.mean_generated_nodes;
        b.mean_idle_timesteps += e.mean_idle_timesteps;
        b.mean_moving_timesteps += e.mean_moving_timesteps;
        b.highway_avoidance_rate += e.highway_avoidance_rate;
        b.rerouting_rate += e.rerouting_rate;
        b.deadlock_iterations += static_cast<double>(e.deadlock_iterations);
    }
    if (k > 0) {
        b.has_means = true;
        b.throughput /= k;
        b.mean_runtime_s /= k;
        b.mean_generated_nodes /= k;
        b.mean_idle_timesteps /= k;
        b.mean_moving_timesteps /= k;
        b.highway_avoidance_rate /= k;
        b.rerouting_rate /= k;
        b.deadlock_iterations /= k;
    }
    return b;
}

std::string format_c(double c) {
    if (std::isinf(c)) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", c);
    return buf;
}

std::string csv_header() {
    return "seed,mode,c,w,h,map,agents,throughput,mean_runtime_s,mean_generated_nodes,"
           "idle_mean,moving_mean,avoidance_rate,rerouting_rate,deadlock_iterations,fail";
}

std::string csv_row(const EpisodeRow& row) {
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6f", v);
        return std::string(buf);
    };
    const EpisodeSummary& s = row.summary;
    out << row.seed << ',' << row.mode << ',' << format_c(row.c) << ',' << row.w << ',' << row.h
        << ',' << row.map << ',' << row.agents << ',' << num(s.throughput) << ','
        << num(s.mean_runtime_s) << ',' << num(s.mean_generated_nodes) << ','
        << num(s.mean_idle_timesteps) << ',' << num(s.mean_moving_timesteps) << ','
        << num(s.highway_avoidance_rate) << ',' << num(s.rerouting_rate) << ','
        << s.deadlock_iterations << ',' << (s.fail ? 1 : 0);
    return out.str();
}

}  // namespace hmapf
