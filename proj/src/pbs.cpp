#include "hmapf/pbs.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>
#include <stdexcept>

namespace hmapf {

std::optional<Conflict> find_first_conflict(const std::vector<Path>& padded, int w) {
    const int n = static_cast<int>(padded.size());
    auto at = [&](int agent, int t) {
        const Path& p = padded[agent];
        return p[std::min<std::size_t>(t, p.size() - 1)];
    };
    for (int t = 0; t <= w; ++t) {
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (at(i, t) == at(j, t)) {
                    Conflict c;
                    c.agent_a = i;
                    c.agent_b = j;
                    c.is_edge = false;
                    c.loc_a = at(i, t);
                    c.timestep = t;
                    return c;
                }
                if (t < w && at(i, t) == at(j, t + 1) && at(i, t + 1) == at(j, t) &&
                    at(i, t) != at(i, t + 1)) {
                    Conflict c;
                    c.agent_a = i;
                    c.agent_b = j;
                    c.is_edge = true;
                    c.loc_a = at(i, t);
                    c.loc_b = at(i, t + 1);
                    c.timestep = t;
                    return c;
                }
            }
        }
    }
    return std::nullopt;
}

namespace {

struct Node {
    std::vector<std::pair<int, int>> orderings;  // (higher, lower)
    std::vector<Path> paths;
    std::vector<double> costs;
    double cost_sum = 0.0;
};

// Agents strictly above (or below) `agent` in the transitive ordering.
std::vector<uint8_t> transitive_set(const std::vector<std::pair<int, int>>& orderings, int n,
                                    int agent, bool above) {
    std::vector<std::vector<int>> adj(n);
    for (auto [hi, lo] : orderings) {
        if (above)
            adj[lo].push_back(hi);
        else
            adj[hi].push_back(lo);
    }
    std::vector<uint8_t> seen(n, 0);
    std::vector<int> stack{agent};
    while (!stack.empty()) {
        int cur = stack.back();
        stack.pop_back();
        for (int next : adj[cur])
            if (!seen[next]) {
                seen[next] = 1;
                stack.push_back(next);
            }
    }
    seen[agent] = 0;
    return seen;
}

// Kahn's algorithm, smallest index first; empty result signals a cycle.
std::vector<int> topo_order(const std::vector<std::pair<int, int>>& orderings, int n) {
    std::vector<std::vector<int>> adj(n);
    std::vector<int> indeg(n, 0);
    for (auto [hi, lo] : orderings) {
        adj[hi].push_back(lo);
        ++indeg[lo];
    }
    std::vector<int> ready;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    std::vector<int> order;
    while (!ready.empty()) {
        auto it = std::min_element(ready.begin(), ready.end());
        int cur = *it;
        ready.erase(it);
        order.push_back(cur);
        for (int next : adj[cur])
            if (--indeg[next] == 0) ready.push_back(next);
    }
    if (static_cast<int>(order.size()) != n) order.clear();
    return order;
}

}  // namespace

bool paths_conflict(const Path& a, const Path& b, int w) {
    auto at = [&](const Path& p, int t) { return p[std::min<std::size_t>(t, p.size() - 1)]; };
    for (int t = 0; t <= w; ++t) {
        if (at(a, t) == at(b, t)) return true;
        if (t < w && at(a, t) == at(b, t + 1) && at(a, t + 1) == at(b, t) &&
            at(a, t) != at(a, t + 1))
            return true;
    }
    return false;
}

SolveReport PbsSolver::solve(const std::vector<int>& starts, const std::vector<int>& goals,
                             const PlannerConfig& cfg, double deadline_s) const {
    const int n = static_cast<int>(starts.size());
    if (goals.size() != starts.size()) throw std::invalid_argument("pbs: starts/goals size mismatch");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (starts[i] == starts[j]) throw std::invalid_argument("pbs: starts must be distinct");

    const auto t0 = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };

    SolveReport report;
    ReservationTable no_reservations(map_->size(), cfg.w);

    // Replan `agent` and, in topological order, every transitive
    // subordinate whose path conflicts with one of its superiors.
    auto update_paths = [&](Node& node, int demoted) -> bool {
        std::vector<int> order = topo_order(node.orderings, n);
        if (order.empty()) return false;  // cycle; caller prunes
        std::vector<uint8_t> below = transitive_set(node.orderings, n, demoted, false);
        below[demoted] = 1;
        for (int agent : order) {
            if (!below[agent]) continue;
            std::vector<uint8_t> above = transitive_set(node.orderings, n, agent, true);
            bool needs_replan = false;
            for (int sup = 0; sup < n && !needs_replan; ++sup)
                if (above[sup] && paths_conflict(node.paths[agent], node.paths[sup], cfg.w))
                    needs_replan = true;
            if (!needs_replan) continue;
            ReservationTable res(map_->size(), cfg.w);
            for (int sup = 0; sup < n; ++sup)
                if (above[sup]) res.reserve_path(pad_path(node.paths[sup], cfg.w));
            PlanResult r = plan(*map_, tables_->get(goals[agent]), starts[agent], res, cfg);
            if (!r.found) return false;
            node.cost_sum += r.cost - node.costs[agent];
            node.paths[agent] = std::move(r.path);
            node.costs[agent] = r.cost;
        }
        return true;
    };

    Node root;
    root.paths.resize(n);
    root.costs.resize(n);
    for (int i = 0; i < n; ++i) {
        PlanResult r = plan(*map_, tables_->get(goals[i]), starts[i], no_reservations, cfg);
        if (!r.found) {
            report.status = SolveStatus::Infeasible;
            report.generated_nodes = 1;
            report.elapsed_s = elapsed();
            return report;
        }
        root.paths[i] = std::move(r.path);
        root.costs[i] = r.cost;
        root.cost_sum += r.cost;
    }
    report.generated_nodes = 1;

    std::vector<Node> stack;
    stack.push_back(std::move(root));
    while (!stack.empty()) {
        if (elapsed() > deadline_s) {
            report.status = SolveStatus::Timeout;
            report.elapsed_s = elapsed();
            return report;
        }
        Node node = std::move(stack.back());
        stack.pop_back();

        std::vector<Path> padded = node.paths;
        for (Path& p : padded) p = pad_path(std::move(p), cfg.w);
        auto conflict = find_first_conflict(padded, cfg.w);
        if (!conflict) {
            report.status = SolveStatus::Success;
            report.plan = std::move(node.paths);
            report.costs = std::move(node.costs);
            report.elapsed_s = elapsed();
            return report;
        }

        // Two children: demote b under a, and a under b. Lower cost is
        // explored first; ties favor demoting the higher-indexed agent.
        struct Child {
            Node node;
            bool feasible = false;
            int demoted = -1;
        };
        auto make_child = [&](int promoted, int demoted) {
            Child ch;
            ch.demoted = demoted;
            ch.node = node;
            ch.node.orderings.emplace_back(promoted, demoted);
            ch.feasible = update_paths(ch.node, demoted);
            ++report.generated_nodes;
            return ch;
        };
        Child first = make_child(conflict->agent_a, conflict->agent_b);
        Child second = make_child(conflict->agent_b, conflict->agent_a);
        Child* order[2] = {&first, &second};
        if (second.feasible &&
            (!first.feasible || second.node.cost_sum < first.node.cost_sum ||
             (second.node.cost_sum == first.node.cost_sum && second.demoted > first.demoted))) {
            order[0] = &second;
            order[1] = &first;
        }
        if (order[1]->feasible) stack.push_back(std::move(order[1]->node));
        if (order[0]->feasible) stack.push_back(std::move(order[0]->node));
    }

    report.status = SolveStatus::Infeasible;
    report.elapsed_s = elapsed();
    return report;
}

}  // namespace hmapf
