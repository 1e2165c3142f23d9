#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hmapf/pbs.hpp"

namespace hmapf {

struct AgentState {
    int id = 0;
    int loc = -1;
    int goal = -1;        // equals loc while the agent has no task
    bool has_task = false;
    long task_start = 0;
    int idle_steps = 0;
    int moving_steps = 0;
    // Reached the goal mid-period; the task record closes (and the agent
    // becomes assignable) at the next boundary, so waits at the goal
    // count as idle time the way the reported statistics expect.
    bool arrived = false;
};

struct EpisodeConfig {
    HeuristicMode mode;
    int agent_count = 0;   // derived from density when 0
    double density = 0.0;  // fraction of free cells
    PlannerConfig planner;
    int iterations = 50;
    double time_limit_s = 60.0;
    uint64_t seed = 0;
    bool escalate_w = false;  // double w after a deadlock iteration
    int escalate_cap = 32;
    bool record_trace = false;
};

struct IterationRecord {
    double runtime_s = 0.0;
    long generated_nodes = 0;
    double rerouting_agent_fraction = 0.0;
    long against_highway_moves = 0;
    long total_moves = 0;
    bool deadlock_flag = false;
    bool infeasible = false;
};

struct TaskRecord {
    int idle = 0;
    int moving = 0;
    long start_timestep = 0;
    long end_timestep = 0;
};

// Uniform random free cell that is no other agent's active goal and not
// the agent's own cell; -1 when no cell is eligible.
int pick_task_goal(const std::vector<int>& free_cells, const std::vector<AgentState>& agents,
                   int agent, std::mt19937_64& rng);

struct EpisodeResult {
    bool fail = false;
    long tasks_finished = 0;
    long executed_timesteps = 0;
    std::vector<IterationRecord> iterations;
    std::vector<TaskRecord> finished_tasks;
    // filled only under record_trace
    std::vector<Path> trace;                              // [agent] executed trajectory
    std::vector<std::vector<int>> iteration_goals;        // [iter][agent]
    std::vector<std::vector<uint8_t>> rerouting_flags;    // [iter][agent]
    std::vector<std::vector<Path>> iteration_plans;       // [iter][agent], padded to w
    std::vector<std::vector<std::vector<int>>> deadlock_groups;  // [iter][group][member]
};

// Planned window makes no net heuristic progress (Eq.-3 style): flagged
// agents grouped into maximal coupled sets. In strict mode only all-wait
// plans qualify (the unique-location form). Coupling joins two flagged
// agents when one's greedy-descent window would conflict with the
// other's plan.
std::vector<std::vector<int>> detect_deadlock(const GridMap& planning_map,
                                              HeuristicTableCache& measurement,
                                              bool strict_mode,
                                              const std::vector<int>& starts,
                                              const std::vector<int>& goals,
                                              const std::vector<Path>& padded_plans, int w);

// Executed period ended farther from the goal than it began.
bool detect_rerouting(const HeuristicTable& measurement, int l_c, int l_n);

// Rolling-horizon lifelong loop: every h timesteps assign goals to
// finished agents, plan a window-w conflict-free plan set with PBS, and
// execute h steps. Timeouts fail the episode; infeasible solves become
// all-wait (deadlock) iterations.
class Simulation {
public:
    Simulation(const GridMap& planning_map, const Highway& highway,
               HeuristicTableCache& plan_tables, HeuristicTableCache& meas_tables,
               const EpisodeConfig& cfg);

    void init_episode();
    // One replanning iteration; false once the episode is over or failed.
    bool step_episode();
    void run();

    const EpisodeResult& result() const { return result_; }
    const std::vector<AgentState>& agents() const { return agents_; }
    long timestep() const { return timestep_; }
    bool failed() const { return result_.fail; }
    int current_window() const { return window_; }

    // Uniform random eligible goal for one agent, or -1 when every free
    // cell is taken by another agent's goal.
    int assign_task(int agent);

private:
    const GridMap* planning_map_;
    const Highway* highway_;
    HeuristicTableCache* plan_tables_;
    HeuristicTableCache* meas_tables_;
    EpisodeConfig cfg_;
    std::mt19937_64 rng_;
    std::vector<int> free_cells_;
    std::vector<AgentState> agents_;
    long timestep_ = 0;
    int iterations_done_ = 0;
    int window_ = 0;
    EpisodeResult result_;
};

}  // namespace hmapf
