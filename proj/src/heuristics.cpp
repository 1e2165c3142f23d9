#include "hmapf/heuristics.hpp"

#include <mutex>
#include <queue>
#include <stdexcept>

namespace hmapf {

double sweep_cost(const Highway& hw, const HeuristicMode& mode, int from, int to) {
    if (!hw.against_edge(from, to)) return 1.0;
    if (mode.removes_against()) return kUnreachable;
    return mode.kind == LimitKind::Soft ? mode.c : 1.0;
}

double edge_cost(const Highway& hw, const HeuristicMode& mode, int from, int to) {
    double w = sweep_cost(hw, mode, from, to);
    if (std::isinf(w))
        throw std::invalid_argument("edge_cost: against-direction edge absent from strict graph");
    return w;
}

HeuristicTable build_table(const GridMap& map, const Highway& hw, HeuristicMode mode, int goal) {
    if (goal < 0 || goal >= map.size() || !map.free_at(goal))
        throw std::invalid_argument("build_table: goal is not a free cell");
    if (mode.kind == LimitKind::Soft && !(mode.c >= 1.0))
        throw std::invalid_argument("build_table: soft penalty c must be >= 1");

    std::vector<double> dist(map.size(), kUnreachable);
    using Entry = std::pair<double, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    dist[goal] = 0.0;
    open.emplace(0.0, goal);

    while (!open.empty()) {
        auto [d, cur] = open.top();
        open.pop();
        if (d > dist[cur]) continue;
        // Relax over incoming edges (from -> cur) of the mode's graph.
        for (int dir = 0; dir < kNumDirs; ++dir) {
            int from = map.neighbor(cur, dir);
            if (from < 0 || !map.free_at(from)) continue;
            if (!map.move_allowed(from, dir ^ 1)) continue;  // 0<->1, 2<->3 are opposites
            double w = sweep_cost(hw, mode, from, cur);
            if (std::isinf(w)) continue;
            if (dist[from] > d + w) {
                dist[from] = d + w;
                open.emplace(dist[from], from);
            }
        }
    }
    return HeuristicTable(goal, mode, &hw, std::move(dist));
}

const HeuristicTable& HeuristicTableCache::get(int goal) {
    {
        std::shared_lock lock(mutex_);
        auto it = tables_.find(goal);
        if (it != tables_.end()) return *it->second;
    }
    auto table = std::make_unique<HeuristicTable>(build_table(*map_, *hw_, mode_, goal));
    std::unique_lock lock(mutex_);
    auto [it, inserted] = tables_.try_emplace(goal, std::move(table));
    return *it->second;
}

std::size_t HeuristicTableCache::size() const {
    std::shared_lock lock(mutex_);
    return tables_.size();
}

std::vector<const HeuristicTable*> build_all_tables(HeuristicTableCache& cache,
                                                    const std::vector<int>& goals) {
    std::vector<const HeuristicTable*> out;
    out.reserve(goals.size());
    for (int g : goals) out.push_back(&cache.get(g));
    return out;
}

}  // namespace hmapf
