#pragma once

#include <unordered_set>
#include <vector>

#include "hmapf/heuristics.hpp"

namespace hmapf {

// Timestep-indexed location sequence; index 0 is the current location.
using Path = std::vector<int>;

struct PlannerConfig {
    int w = 5;                    // time horizon
    int h = 5;                    // replanning period, 1 <= h <= w
    bool partial_planning = false;
};

// Higher-priority agents' padded paths, kept as vertex claims for
// t in [0, w] and move claims for t in [0, w). An edge entry (a,b,t)
// forbids the opposing move b->a between t and t+1.
class ReservationTable {
public:
    ReservationTable(int num_cells, int horizon)
        : num_cells_(num_cells), horizon_(horizon) {}

    void reserve_path(const Path& path);
    void reserve_vertex(int loc, int t) {
        if (t <= horizon_) vertex_.insert(vkey(loc, t));
    }
    void reserve_edge(int from, int to, int t) {
        if (t < horizon_) edges_.insert(ekey(from, to, t));
    }
    bool vertex_reserved(int loc, int t) const {
        return t <= horizon_ && vertex_.count(vkey(loc, t)) != 0;
    }
    bool move_conflicts(int from, int to, int t) const {
        return t < horizon_ && edges_.count(ekey(to, from, t)) != 0;
    }
    // No vertex claim on loc anywhere in [from_t, horizon].
    bool hold_free(int loc, int from_t) const;
    int horizon() const { return horizon_; }
    bool empty() const { return vertex_.empty() && edges_.empty(); }

private:
    int64_t vkey(int loc, int t) const { return static_cast<int64_t>(t) * num_cells_ + loc; }
    int64_t ekey(int from, int to, int t) const {
        return (static_cast<int64_t>(t) * num_cells_ + from) * num_cells_ + to;
    }

    int num_cells_;
    int horizon_;
    std::unordered_set<int64_t> vertex_;
    std::unordered_set<int64_t> edges_;
};

// Extend with terminal waits so goal-parked agents keep claiming their
// cell; a path already covering the horizon is returned unchanged.
Path pad_path(Path path, int horizon);

struct PlanResult {
    bool found = false;
    Path path;
    double cost = 0.0;  // arrival time, or g + dist under partial planning
};

// Windowed space-time A*. States are (location, timestep) with t <= w and
// unit step cost, so g == t; f = t + table.dist. Terminals are goal states
// that can hold through the window (cost = arrival) and depth-w states
// with finite heuristic (cost = w + dist). Full planning appends the
// reservation-free tail as a greedy descent of the heuristic.
PlanResult plan(const GridMap& map, const HeuristicTable& table, int start,
                const ReservationTable& reservations, const PlannerConfig& cfg);

}  // namespace hmapf
