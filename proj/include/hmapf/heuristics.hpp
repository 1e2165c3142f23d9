#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "hmapf/grid_map.hpp"

namespace hmapf {

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

enum class LimitKind { None, Soft, Strict };

// none behaves like soft with c=1; strict like soft with c=inf restricted
// to reachable cells. c=inf is a distinguished value that removes
// against-direction edges from the sweep instead of weighting them.
struct HeuristicMode {
    LimitKind kind = LimitKind::None;
    double c = 1.0;

    static HeuristicMode none() { return {LimitKind::None, 1.0}; }
    static HeuristicMode soft(double c) { return {LimitKind::Soft, c}; }
    static HeuristicMode strict() { return {LimitKind::Strict, kUnreachable}; }

    bool removes_against() const {
        return kind == LimitKind::Strict || (kind == LimitKind::Soft && std::isinf(c));
    }
    // True shortest distance on the matching planning graph (strict graph
    // for strict mode, the full graph otherwise).
    bool exact() const { return kind != LimitKind::Soft || c == 1.0; }
    // Partial planning stays cost-equal to full planning for these modes.
    bool trick_valid() const { return exact() || std::isinf(c); }
    const char* kind_name() const {
        return kind == LimitKind::None ? "none" : kind == LimitKind::Soft ? "soft" : "strict";
    }
};

// c when the edge runs against the highway in soft mode, 1 otherwise.
// Strict mode never sees against-direction edges.
double edge_cost(const Highway& hw, const HeuristicMode& mode, int from, int to);

// Non-throwing variant: infinity for edges the mode removes.
double sweep_cost(const Highway& hw, const HeuristicMode& mode, int from, int to);

// Per-goal table of weighted shortest distances (min over move-only paths
// of summed edge costs). dist[goal] = 0; unreachable cells hold infinity.
class HeuristicTable {
public:
    HeuristicTable(int goal, HeuristicMode mode, const Highway* hw, std::vector<double> dist)
        : goal_(goal), mode_(mode), highway_(hw), dist_(std::move(dist)) {}

    int goal() const { return goal_; }
    const HeuristicMode& mode() const { return mode_; }
    const Highway& highway() const { return *highway_; }
    double at(int loc) const { return dist_[loc]; }
    bool reachable(int loc) const { return std::isfinite(dist_[loc]); }
    const std::vector<double>& dist() const { return dist_; }

private:
    int goal_;
    HeuristicMode mode_;
    const Highway* highway_;
    std::vector<double> dist_;
};

// Single backward weighted shortest-path sweep from the goal over
// reversed edges of the mode's graph.
HeuristicTable build_table(const GridMap& map, const Highway& hw, HeuristicMode mode, int goal);

// Tables keyed by (goal, kind, c), built lazily. Concurrent readers,
// exclusive insertion; tables are immutable once built.
class HeuristicTableCache {
public:
    HeuristicTableCache(const GridMap& map, const Highway& hw, HeuristicMode mode)
        : map_(&map), hw_(&hw), mode_(mode) {}

    const HeuristicTable& get(int goal);
    const GridMap& map() const { return *map_; }
    const HeuristicMode& mode() const { return mode_; }
    std::size_t size() const;

private:
    const GridMap* map_;
    const Highway* hw_;
    HeuristicMode mode_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<int, std::unique_ptr<HeuristicTable>> tables_;
};

// One table per distinct goal, pulled through a fresh cache.
std::vector<const HeuristicTable*> build_all_tables(HeuristicTableCache& cache,
                                                    const std::vector<int>& goals);

}  // namespace hmapf
