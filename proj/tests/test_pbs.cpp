#include <doctest.h>

#include "hmapf/pbs.hpp"
#include "test_support.hpp"

using namespace hmapf;
using test::map_from_rows;

TEST_CASE("find_first_conflict basics") {
    CHECK_FALSE(find_first_conflict({Path{0, 1, 1}, Path{5, 6, 6}}, 2).has_value());

    // shared cell at t=1
    auto vc = find_first_conflict({Path{0, 3, 3}, Path{6, 3, 3}}, 2);
    REQUIRE(vc.has_value());
    CHECK_FALSE(vc->is_edge);
    CHECK(vc->timestep == 1);
    CHECK(vc->loc_a == 3);
    CHECK(vc->agent_a == 0);
    CHECK(vc->agent_b == 1);

    // swap at t=0
    auto ec = find_first_conflict({Path{0, 1, 1}, Path{1, 0, 0}}, 2);
    REQUIRE(ec.has_value());
    CHECK(ec->is_edge);
    CHECK(ec->timestep == 0);
    CHECK(ec->loc_a == 0);
    CHECK(ec->loc_b == 1);

    // earliest wins; vertex reported before edge at the same timestep
    auto both = find_first_conflict({Path{0, 1, 2}, Path{0, 9, 9}, Path{1, 0, 0}}, 2);
    REQUIRE(both.has_value());
    CHECK(both->timestep == 0);
    CHECK_FALSE(both->is_edge);
    CHECK(both->agent_a == 0);
    CHECK(both->agent_b == 1);
}

TEST_CASE("non-interacting agents solve at the root") {
    GridMap map = map_from_rows({"...", "...", "..."});
    Highway hw = assign_highway_alternating(map);
    HeuristicTableCache cache(map, hw, HeuristicMode::none());
    PbsSolver solver(map, cache);
    SolveReport r = solver.solve({map.index(0, 0), map.index(0, 2)},
                                 {map.index(2, 0), map.index(2, 2)}, {5, 5, false}, 10.0);
    CHECK(r.status == SolveStatus::Success);
    CHECK(r.generated_nodes == 1);
    CHECK_FALSE(find_first_conflict({pad_path(r.plan[0], 5), pad_path(r.plan[1], 5)}, 5));
}

TEST_CASE("crossing pair resolves with one extra step") {
    GridMap map = map_from_rows({"...", "...", "..."});
    Highway hw = assign_highway_alternating(map);
    HeuristicTableCache cache(map, hw, HeuristicMode::none());
    PbsSolver solver(map, cache);
    SolveReport r = solver.solve({map.index(0, 1), map.index(1, 0)},
                                 {map.index(2, 1), map.index(1, 2)}, {5, 5, false}, 10.0);
    REQUIRE(r.status == SolveStatus::Success);
    CHECK(r.generated_nodes <= 3);
    CHECK(r.costs[0] + r.costs[1] == doctest::Approx(5.0));  // 2 + 3
    std::vector<Path> padded{pad_path(r.plan[0], 5), pad_path(r.plan[1], 5)};
    CHECK_FALSE(find_first_conflict(padded, 5).has_value());
}

TEST_CASE("head-on swap with no side room is infeasible") {
    GridMap map = map_from_rows({".."});
    Highway hw = assign_highway_alternating(map);
    HeuristicTableCache cache(map, hw, HeuristicMode::none());
    PbsSolver solver(map, cache);
    SolveReport r = solver.solve({0, 1}, {1, 0}, {2, 2, false}, 10.0);
    CHECK(r.status == SolveStatus::Infeasible);
    CHECK(r.generated_nodes == 3);  // root plus both failed children
}

TEST_CASE("strict dead-end corridor oriented inward is infeasible") {
    GridMap map = map_from_rows({"...."});
    Highway hw = assign_highway(map, {true});  // corridor [1,2] flows 1 -> 2
    GridMap strict = strict_subgraph(map, hw);
    HeuristicTableCache cache(strict, hw, HeuristicMode::strict());
    PbsSolver solver(strict, cache);
    // agent at 2 can only reach 3; agent at 1 wants the far end
    SolveReport r = solver.solve({2, 1}, {0, 3}, {5, 5, false}, 10.0);
    CHECK(r.status == SolveStatus::Infeasible);
}

TEST_CASE("distinct starts are required") {
    GridMap map = map_from_rows({"..."});
    Highway hw = assign_highway_alternating(map);
    HeuristicTableCache cache(map, hw, HeuristicMode::none());
    PbsSolver solver(map, cache);
    CHECK_THROWS(solver.solve({0, 0}, {1, 2}, {2, 2, false}, 10.0));
}

TEST_CASE("deadline zero reports a timeout") {
    GridMap map = map_from_rows({"....", "...."});
    Highway hw = assign_highway_alternating(map);
    HeuristicTableCache cache(map, hw, HeuristicMode::none());
    PbsSolver solver(map, cache);
    SolveReport r = solver.solve({0, 1}, {3, 2}, {5, 5, false}, 0.0);
    CHECK(r.status == SolveStatus::Timeout);
}

TEST_CASE("fuzzed solves are windowed-sound and deterministic") {
    std::mt19937_64 rng(47);
    int solved = 0;
    for (int trial = 0; trial < 60; ++trial) {
        GridMap map = test::random_map(rng, 4 + rng() % 5, 4 + rng() % 5, 0.2, 8);
        Highway hw = assign_highway_alternating(map);
        bool strict_mode = trial % 3 == 0;
        GridMap pm = strict_mode ? strict_subgraph(map, hw) : map;
        HeuristicMode mode = strict_mode ? HeuristicMode::strict() : HeuristicMode::none();
        HeuristicTableCache cache(pm, hw, mode);

        auto frees = pm.free_cells();
        int agents = 2 + static_cast<int>(rng() % 3);
        std::vector<int> cells = frees;
        for (std::size_t i = cells.size() - 1; i > 0; --i)
            std::swap(cells[i], cells[rng() % (i + 1)]);
        if (static_cast<int>(cells.size()) < 2 * agents) continue;
        std::vector<int> starts(cells.begin(), cells.begin() + agents);
        std::vector<int> goals(cells.begin() + agents, cells.begin() + 2 * agents);
        const int ws[] = {2, 3, 5};
        PlannerConfig cfg{ws[rng() % 3], 1, false};

        PbsSolver solver(pm, cache);
        SolveReport r1 = solver.solve(starts, goals, cfg, 5.0);
        SolveReport r2 = solver.solve(starts, goals, cfg, 5.0);
        CHECK(r1.status == r2.status);
        CHECK(r1.generated_nodes == r2.generated_nodes);
        if (r1.status != SolveStatus::Success) continue;
        CHECK(r1.plan == r2.plan);

        ++solved;
        std::vector<Path> padded;
        for (const Path& p : r1.plan) padded.push_back(pad_path(p, cfg.w));
        CHECK_FALSE(test::replay_has_conflict(padded, cfg.w));
        CHECK_FALSE(find_first_conflict(padded, cfg.w).has_value());
        CHECK(r1.generated_nodes >= 1);
    }
    CHECK(solved > 25);
}
