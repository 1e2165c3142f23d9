#include "hmapf/spacetime_astar.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace hmapf {

void ReservationTable::reserve_path(const Path& path) {
    if (path.empty()) throw std::invalid_argument("reserve_path: empty path");
    auto at = [&](int t) {
        return path[std::min<std::size_t>(t, path.size() - 1)];
    };
    for (int t = 0; t <= horizon_; ++t) reserve_vertex(at(t), t);
    for (int t = 0; t < horizon_; ++t)
        if (at(t) != at(t + 1)) reserve_edge(at(t), at(t + 1), t);
}

bool ReservationTable::hold_free(int loc, int from_t) const {
    for (int t = std::max(from_t, 0); t <= horizon_; ++t)
        if (vertex_.count(vkey(loc, t))) return false;
    return true;
}

Path pad_path(Path path, int horizon) {
    if (path.empty()) throw std::invalid_argument("pad_path: empty path");
    while (static_cast<int>(path.size()) < horizon + 1) path.push_back(path.back());
    return path;
}

namespace {

struct OpenEntry {
    double f;
    double g;
    int t;
    int loc;
    uint64_t seq;
    bool operator>(const OpenEntry& o) const {
        if (f != o.f) return f > o.f;
        if (g != o.g) return g < o.g;  // prefer larger g
        return seq > o.seq;            // FIFO
    }
};

// Deterministic reservation-free continuation: repeatedly take the
// neighbor minimizing edge weight + remaining distance, which strictly
// descends the table.
void append_descent(const GridMap& map, const HeuristicTable& table, Path& path) {
    int cur = path.back();
    while (cur != table.goal()) {
        int best = -1;
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
        if (best < 0) throw std::logic_error("descent: no neighbor despite finite heuristic");
        path.push_back(best);
        cur = best;
    }
}

}  // namespace

PlanResult plan(const GridMap& map, const HeuristicTable& table, int start,
                const ReservationTable& reservations, const PlannerConfig& cfg) {
    if (cfg.h < 1 || cfg.h > cfg.w) throw std::invalid_argument("planner: need 1 <= h <= w");
    if (!map.free_at(start)) throw std::invalid_argument("planner: start is not free");
    PlanResult result;
    if (!table.reachable(start) && start != table.goal()) return result;

    const int w = cfg.w;
    const int cells = map.size();
    const int goal = table.goal();
    const HeuristicMode& mode = table.mode();
    // Finite soft penalties price against-direction steps into g, so the
    // search optimizes the weighted objective the table was built for.
    // Strict, none and soft(inf) step uniformly (waits always cost 1).
    const bool weighted_steps = mode.kind == LimitKind::Soft && std::isfinite(mode.c);
    std::vector<int32_t> parent(static_cast<std::size_t>(w + 1) * cells, -2);  // -2 unvisited
    std::vector<double> gval(weighted_steps ? parent.size() : 0, kUnreachable);
    auto state = [&](int loc, int t) { return static_cast<std::size_t>(t) * cells + loc; };

    std::priority_queue<OpenEntry, std::vector<OpenEntry>, std::greater<OpenEntry>> open;
    uint64_t seq = 0;
    parent[state(start, 0)] = -1;
    if (weighted_steps) gval[state(start, 0)] = 0.0;
    open.push({table.at(start), 0.0, 0, start, seq++});

    int end_loc = -1, end_t = -1;
    double end_cost = 0.0;
    while (!open.empty()) {
        auto [f, g, t, loc, s] = open.top();
        open.pop();
        if (weighted_steps && g > gval[state(loc, t)]) continue;  // stale entry
        if (loc == goal && reservations.hold_free(goal, t + 1)) {
            end_loc = loc;
            end_t = t;
            end_cost = g;
            break;
        }
        if (t == w) {
            if (table.reachable(loc)) {
                end_loc = loc;
                end_t = t;
                end_cost = g + table.at(loc);
                break;
            }
            continue;  // depth-w frontier with no continuation
        }
        auto relax = [&](int next, double step) {
            std::size_t st = state(next, t + 1);
            double ng = g + step;
            if (weighted_steps) {
                if (ng >= gval[st]) return;
                gval[st] = ng;
            } else if (parent[st] != -2) {
                return;
            }
            parent[st] = static_cast<int32_t>(state(loc, t));
            open.push({ng + table.at(next), ng, t + 1, next, seq++});
        };
        for (int d = 0; d < kNumDirs; ++d) {
            if (!map.move_allowed(loc, d)) continue;
            int next = map.neighbor(loc, d);
            if (reservations.vertex_reserved(next, t + 1)) continue;
            if (reservations.move_conflicts(loc, next, t)) continue;
            relax(next, weighted_steps ? sweep_cost(table.highway(), mode, loc, next) : 1.0);
        }
        if (!reservations.vertex_reserved(loc, t + 1)) relax(loc, 1.0);  // wait
    }
    if (end_loc < 0) return result;  // NO_PATH

    Path path(end_t + 1);
    for (int cur = static_cast<int>(state(end_loc, end_t)); cur >= 0;
         cur = parent[cur]) {
        path[cur / cells] = cur % cells;
    }
    result.found = true;
    if (cfg.partial_planning) {
        result.cost = end_cost;  // g + dist surrogate
    } else {
        if (end_loc != goal) append_descent(map, table, path);
        result.cost = static_cast<double>(path.size() - 1);  // arrival time
    }
    result.path = std::move(path);
    return result;
}

}  // namespace hmapf
