#include "hmapf/lifelong.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>

namespace hmapf {

namespace {

int unique_locations(const Path& padded, int w) {
    std::unordered_set<int> locs;
    for (int t = 0; t <= w && t < static_cast<int>(padded.size()); ++t) locs.insert(padded[t]);
    return static_cast<int>(locs.size());
}

// Greedy window-length descent of the measurement heuristic, ignoring
// other agents; stays put once at the goal.
Path greedy_descent_window(const GridMap& map, const HeuristicTable& table, int start, int w) {
    Path p{start};
    int cur = start;
    for (int t = 0; t < w; ++t) {
        if (cur == table.goal() || !table.reachable(cur)) {
            p.push_back(cur);
            continue;
        }
        int best = cur;
        double best_key = kUnreachable;
        for (int d = 0; d < kNumDirs; ++d) {
            if (!map.move_allowed(cur, d)) continue;
            int next = map.neighbor(cur, d);
            double key = sweep_cost(table.highway(), table.mode(), cur, next) + table.at(next);
            if (key < best_key) {
                best_key = key;
                best = next;
            }
        }
        cur = best;
        p.push_back(cur);
    }
    return p;
}

}  // namespace

bool detect_rerouting(const HeuristicTable& measurement, int l_c, int l_n) {
    return measurement.at(l_c) < measurement.at(l_n);
}

std::vector<std::vector<int>> detect_deadlock(const GridMap& planning_map,
                                              HeuristicTableCache& measurement,
                                              bool strict_mode,
                                              const std::vector<int>& starts,
                                              const std::vector<int>& goals,
                                              const std::vector<Path>& padded_plans, int w) {
    const int n = static_cast<int>(starts.size());
    std::vector<int> flagged;
    for (int i = 0; i < n; ++i) {
        const HeuristicTable& table = measurement.get(goals[i]);
        double h0 = table.at(starts[i]);
        if (!(h0 > 0)) continue;  // at goal (or unreachable start)
        if (strict_mode) {
            if (unique_locations(padded_plans[i], w) == 1) flagged.push_back(i);
        } else {
            int end = padded_plans[i][std::min<std::size_t>(w, padded_plans[i].size() - 1)];
            if (table.at(end) >= h0) flagged.push_back(i);
        }
    }
    if (flagged.empty()) return {};

    // Maximal coupled sets: connected components where one agent's ideal
    // window collides with the other's planned window.
    std::vector<Path> descent(flagged.size());
    for (std::size_t k = 0; k < flagged.size(); ++k)
        descent[k] = greedy_descent_window(planning_map, measurement.get(goals[flagged[k]]),
                                           starts[flagged[k]], w);
    const int m = static_cast<int>(flagged.size());
    std::vector<int> comp(m, -1);
    std::vector<std::vector<int>> groups;
    for (int k = 0; k < m; ++k) {
        if (comp[k] >= 0) continue;
        std::vector<int> stack{k};
        comp[k] = static_cast<int>(groups.size());
        std::vector<int> members;
        while (!stack.empty()) {
            int a = stack.back();
            stack.pop_back();
            members.push_back(flagged[a]);
            for (int b = 0; b < m; ++b) {
                if (comp[b] >= 0) continue;
                if (paths_conflict(descent[a], padded_plans[flagged[b]], w) ||
                    paths_conflict(descent[b], padded_plans[flagged[a]], w)) {
                    comp[b] = comp[a];
                    stack.push_back(b);
                }
            }
        }
        std::sort(members.begin(), members.end());
        groups.push_back(std::move(members));
    }
    return groups;
}

Simulation::Simulation(const GridMap& planning_map, const Highway& highway,
                       HeuristicTableCache& plan_tables, HeuristicTableCache& meas_tables,
                       const EpisodeConfig& cfg)
    : planning_map_(&planning_map), highway_(&highway),
      plan_tables_(&plan_tables), meas_tables_(&meas_tables), cfg_(cfg),
      rng_(cfg.seed), window_(cfg.planner.w) {
    if (cfg_.planner.h < 1 || cfg_.planner.h > cfg_.planner.w)
        throw std::invalid_argument("episode: need 1 <= h <= w");
    free_cells_ = planning_map_->free_cells();
}

void Simulation::init_episode() {
    int count = cfg_.agent_count;
    if (count == 0) count = static_cast<int>(cfg_.density * free_cells_.size());
    if (count < 1) throw std::invalid_argument("episode: agent count must be >= 1");
    if (count > static_cast<int>(free_cells_.size()))
        throw std::invalid_argument("episode: not enough free cells for distinct starts");

    std::vector<int> cells = free_cells_;
    for (std::size_t i = cells.size() - 1; i > 0; --i) {
        std::size_t j = rng_() % (i + 1);
        std::swap(cells[i], cells[j]);
    }
    agents_.assign(count, AgentState{});
    std::unordered_set<int> taken_goals;
    for (int i = 0; i < count; ++i) {
        agents_[i].id = i;
        agents_[i].loc = cells[i];
    }
    for (int i = 0; i < count; ++i) {
        std::vector<int> eligible;
        for (int cell : free_cells_)
            if (cell != agents_[i].loc && !taken_goals.count(cell)) eligible.push_back(cell);
        if (eligible.empty()) throw std::invalid_argument("episode: no eligible goal cell");
        agents_[i].goal = eligible[rng_() % eligible.size()];
        agents_[i].has_task = true;
        agents_[i].task_start = 0;
        taken_goals.insert(agents_[i].goal);
    }
    timestep_ = 0;
    iterations_done_ = 0;
    window_ = cfg_.planner.w;
    result_ = EpisodeResult{};
    if (cfg_.record_trace) {
        result_.trace.assign(count, Path{});
        for (int i = 0; i < count; ++i) result_.trace[i].push_back(agents_[i].loc);
    }
}

int pick_task_goal(const std::vector<int>& free_cells, const std::vector<AgentState>& agents,
                   int agent, std::mt19937_64& rng) {
    std::vector<int> eligible;
    for (int cell : free_cells) {
        if (cell == agents[agent].loc) continue;
        bool used = false;
        for (const AgentState& other : agents)
            if (other.id != agent && other.has_task && other.goal == cell) used = true;
        if (!used) eligible.push_back(cell);
    }
    if (eligible.empty()) return -1;
    return eligible[rng() % eligible.size()];
}

int Simulation::assign_task(int agent) {
    return pick_task_goal(free_cells_, agents_, agent, rng_);
}

bool Simulation::step_episode() {
    if (result_.fail || iterations_done_ >= cfg_.iterations) return false;

    // (1) close tasks finished during the last period, then assign new ones
    for (AgentState& a : agents_) {
        if (a.has_task && a.arrived) {
            result_.finished_tasks.push_back(
                {a.idle_steps, a.moving_steps, a.task_start, timestep_});
            a.has_task = false;
            a.arrived = false;
        }
    }
    for (AgentState& a : agents_) {
        if (a.has_task) continue;
        int goal = assign_task(a.id);
        if (goal >= 0) {
            a.goal = goal;
            a.has_task = true;
            a.task_start = timestep_;
            a.idle_steps = 0;
            a.moving_steps = 0;
        } else {
            a.goal = a.loc;  // hold in place until a cell frees up
        }
    }

    const int n = static_cast<int>(agents_.size());
    std::vector<int> starts(n), goals(n);
    for (int i = 0; i < n; ++i) {
        starts[i] = agents_[i].loc;
        goals[i] = agents_[i].goal;
    }

    // Table builds are precomputation, kept outside the solve timer.
    for (int g : goals) {
        plan_tables_->get(g);
        meas_tables_->get(g);
    }

    PlannerConfig pcfg = cfg_.planner;
    pcfg.w = window_;
    PbsSolver solver(*planning_map_, *plan_tables_);
    SolveReport report = solver.solve(starts, goals, pcfg, cfg_.time_limit_s);

    IterationRecord rec;
    rec.runtime_s = report.elapsed_s;
    rec.generated_nodes = report.generated_nodes;

    if (report.status == SolveStatus::Timeout) {
        result_.fail = true;
        result_.iterations.push_back(rec);
        ++iterations_done_;
        return false;
    }

    bool infeasible = report.status == SolveStatus::Infeasible;
    std::vector<Path> padded(n);
    std::vector<std::vector<int>> groups;
    if (infeasible) {
        for (int i = 0; i < n; ++i) padded[i] = Path(pcfg.w + 1, starts[i]);
        rec.deadlock_flag = true;
        rec.infeasible = true;
    } else {
        for (int i = 0; i < n; ++i) padded[i] = pad_path(report.plan[i], pcfg.w);
        groups = detect_deadlock(*planning_map_, *meas_tables_,
                                 cfg_.mode.kind == LimitKind::Strict, starts, goals, padded,
                                 pcfg.w);
        rec.deadlock_flag = !groups.empty();
    }
    if (cfg_.record_trace) {
        result_.iteration_goals.push_back(goals);
        result_.iteration_plans.push_back(padded);
        result_.deadlock_groups.push_back(std::move(groups));
    }

    // execute h steps of the padded plan
    for (int t = 1; t <= cfg_.planner.h; ++t) {
        ++timestep_;
        for (int i = 0; i < n; ++i) {
            AgentState& a = agents_[i];
            int next = padded[i][t];
            bool moved = next != a.loc;
            if (moved) {
                ++rec.total_moves;
                if (highway_->against_edge(a.loc, next)) ++rec.against_highway_moves;
            }
            if (a.has_task) (moved ? a.moving_steps : a.idle_steps) += 1;
            a.loc = next;
            if (cfg_.record_trace) result_.trace[i].push_back(next);
            if (a.has_task && !a.arrived && a.loc == a.goal) {
                a.arrived = true;
                ++result_.tasks_finished;
            }
        }
    }
    result_.executed_timesteps += cfg_.planner.h;

    int rerouted = 0;
    std::vector<uint8_t> flags(n, 0);
    for (int i = 0; i < n; ++i) {
        flags[i] = detect_rerouting(meas_tables_->get(goals[i]), starts[i], agents_[i].loc);
        rerouted += flags[i];
    }
    rec.rerouting_agent_fraction = n > 0 ? static_cast<double>(rerouted) / n : 0.0;
    if (cfg_.record_trace) result_.rerouting_flags.push_back(std::move(flags));

    if (cfg_.escalate_w)
        window_ = rec.deadlock_flag ? std::min(window_ * 2, cfg_.escalate_cap) : cfg_.planner.w;

    result_.iterations.push_back(rec);
    ++iterations_done_;
    return iterations_done_ < cfg_.iterations && !result_.fail;
}

void Simulation::run() {
    init_episode();
    while (step_episode()) {
    }
}

}  // namespace hmapf
