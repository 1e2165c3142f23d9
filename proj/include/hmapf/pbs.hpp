#pragma once

#include <optional>
#include <vector>

#include "hmapf/spacetime_astar.hpp"

namespace hmapf {

struct Conflict {
    int agent_a = -1;
    int agent_b = -1;
    bool is_edge = false;
    int loc_a = -1;  // cell, or the edge tail of agent_a's move
    int loc_b = -1;  // -1 for vertex conflicts
    int timestep = 0;
};

// Earliest conflict among padded paths: vertex overlaps for t in [0, w],
// swaps for moves t -> t+1 with t < w. Ties go to the lowest agent-index
// pair, vertex before edge.
std::optional<Conflict> find_first_conflict(const std::vector<Path>& padded, int w);

bool paths_conflict(const Path& a, const Path& b, int w);

enum class SolveStatus { Success, Timeout, Infeasible };

struct SolveReport {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<Path> plan;
    std::vector<double> costs;
    long generated_nodes = 0;  // root plus every constructed child
    double elapsed_s = 0.0;
};

// Priority-Based Search: depth-first over a tree of priority orderings,
// branching on the first conflict and replanning demoted agents against
// the padded paths of their transitive superiors.
class PbsSolver {
public:
    PbsSolver(const GridMap& map, HeuristicTableCache& tables)
        : map_(&map), tables_(&tables) {}

    SolveReport solve(const std::vector<int>& starts, const std::vector<int>& goals,
                      const PlannerConfig& cfg, double deadline_s) const;

private:
    const GridMap* map_;
    HeuristicTableCache* tables_;
};

}  // namespace hmapf
