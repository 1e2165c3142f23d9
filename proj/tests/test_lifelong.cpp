#include <doctest.h>

#include <memory>
#include <set>

#include "hmapf/lifelong.hpp"
#include "hmapf/metrics.hpp"
#include "test_support.hpp"

using namespace hmapf;
using test::map_from_rows;

namespace {

struct World {
    GridMap base;
    Highway hw;
    GridMap planning;
    std::unique_ptr<HeuristicTableCache> plan_tables;
    std::unique_ptr<HeuristicTableCache> meas_tables;

    World(GridMap m, HeuristicMode mode) : base(std::move(m)) {
        hw = assign_highway_alternating(base);
        planning = mode.kind == LimitKind::Strict ? strict_subgraph(base, hw) : base;
        plan_tables = std::make_unique<HeuristicTableCache>(planning, hw, mode);
        // deadlock/rerouting measurement uses the strict-graph distance
        meas_tables = std::make_unique<HeuristicTableCache>(planning, hw, HeuristicMode::strict());
    }
    Simulation sim(EpisodeConfig cfg) {
        return Simulation(planning, hw, *plan_tables, *meas_tables, cfg);
    }
};

EpisodeConfig basic_cfg(HeuristicMode mode, int agents, int w, int h, uint64_t seed,
                        int iterations = 10) {
    EpisodeConfig cfg;
    cfg.mode = mode;
    cfg.agent_count = agents;
    cfg.planner = {w, h, false};
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.record_trace = true;
    return cfg;
}

// the deadlock figure: a five-cell corridor with open side rows
GridMap fig6_map() {
    return map_from_rows({".....", ".....", "....."});
}

}  // namespace

TEST_CASE("init_episode sizes and placement") {
    World w(generate_warehouse(3), HeuristicMode::none());
    EpisodeConfig cfg = basic_cfg(HeuristicMode::none(), 0, 5, 5, 3);
    cfg.density = 0.05;
    Simulation sim = w.sim(cfg);
    sim.init_episode();
    CHECK(sim.agents().size() == 8);  // floor(0.05 * 160)

    std::set<int> starts, goals;
    for (const AgentState& a : sim.agents()) {
        CHECK(w.base.free_at(a.loc));
        CHECK(w.base.free_at(a.goal));
        CHECK(a.loc != a.goal);
        CHECK(starts.insert(a.loc).second);
        CHECK(goals.insert(a.goal).second);
    }
}

TEST_CASE("init_episode forced and impossible placements") {
    World w(map_from_rows({".."}), HeuristicMode::none());
    Simulation one = w.sim(basic_cfg(HeuristicMode::none(), 1, 2, 2, 9));
    one.init_episode();
    CHECK(one.agents()[0].goal != one.agents()[0].loc);

    Simulation three = w.sim(basic_cfg(HeuristicMode::none(), 3, 2, 2, 9));
    CHECK_THROWS(three.init_episode());
}

TEST_CASE("pick_task_goal eligibility") {
    std::mt19937_64 rng(5);
    std::vector<int> frees{0, 1, 2};
    std::vector<AgentState> agents(2);
    agents[0] = {0, 0, 0, false, 0, 0, 0};
    agents[1] = {1, 2, 1, true, 0, 0, 0};  // active goal on cell 1

    // cell 0 is its own, cell 1 is taken: only cell 2 remains, which is
    // the other agent's current location and stays eligible
    for (int trial = 0; trial < 5; ++trial)
        CHECK(pick_task_goal(frees, agents, 0, rng) == 2);

    // other agents hold every remaining cell as goals
    std::vector<int> two_cells{0, 2};
    agents[1].goal = 2;
    CHECK(pick_task_goal(two_cells, agents, 0, rng) == -1);

    // inactive goals do not block
    agents[1].has_task = false;
    CHECK(pick_task_goal(two_cells, agents, 0, rng) == 2);
}

TEST_CASE("seeded task assignment replays identically") {
    World w(generate_warehouse(1), HeuristicMode::none());
    EpisodeConfig cfg = basic_cfg(HeuristicMode::none(), 4, 5, 5, 42, 20);
    Simulation a = w.sim(cfg);
    Simulation b = w.sim(cfg);
    a.run();
    b.run();
    CHECK(a.result().tasks_finished == b.result().tasks_finished);
    CHECK(a.result().trace == b.result().trace);
    CHECK(a.result().iterations.size() == b.result().iterations.size());
}

TEST_CASE("single agent advances along its plan") {
    World w(generate_warehouse(1), HeuristicMode::none());
    Simulation sim = w.sim(basic_cfg(HeuristicMode::none(), 1, 5, 5, 7, 1));
    sim.init_episode();
    int start = sim.agents()[0].loc;
    int goal = sim.agents()[0].goal;
    sim.step_episode();
    // progress in the planning metric, or the task is already done
    HeuristicTable t = build_table(w.planning, w.hw, HeuristicMode::none(), goal);
    bool done = sim.result().tasks_finished == 1;
    CHECK((done || t.at(sim.agents()[0].loc) < t.at(start)));
    CHECK(sim.timestep() == 5);
}

TEST_CASE("infeasible solve becomes an all-wait deadlock iteration") {
    // two agents that must swap on a two-cell map can never be planned
    World w(map_from_rows({".."}), HeuristicMode::none());
    Simulation sim = w.sim(basic_cfg(HeuristicMode::none(), 2, 2, 2, 1, 3));
    sim.init_episode();
    std::vector<int> before;
    for (const AgentState& a : sim.agents()) before.push_back(a.loc);
    sim.step_episode();
    REQUIRE(sim.result().iterations.size() == 1);
    CHECK(sim.result().iterations[0].infeasible);
    CHECK(sim.result().iterations[0].deadlock_flag);
    CHECK(sim.result().tasks_finished == 0);
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(sim.agents()[i].loc == before[i]);
    CHECK_FALSE(sim.failed());  // infeasible stalls, it does not fail
}

TEST_CASE("timeout fails the episode") {
    World w(generate_warehouse(1), HeuristicMode::none());
    EpisodeConfig cfg = basic_cfg(HeuristicMode::none(), 6, 5, 5, 11, 5);
    cfg.time_limit_s = 0.0;
    Simulation sim = w.sim(cfg);
    sim.run();
    CHECK(sim.failed());
    CHECK(sim.result().fail);
    CHECK(sim.result().iterations.size() <= 1);
}

TEST_CASE("detect_rerouting compares measurement distances") {
    GridMap map = map_from_rows({"......."});
    Highway hw(map, {});
    HeuristicTable t = build_table(map, hw, HeuristicMode::strict(), 0);
    CHECK(detect_rerouting(t, 5, 6));
    CHECK_FALSE(detect_rerouting(t, 5, 5));
    CHECK_FALSE(detect_rerouting(t, 5, 4));
}

TEST_CASE("detect_deadlock flags stalled agents and couples pairs") {
    GridMap map = fig6_map();
    Highway hw(map, {});  // bidirected corridor scenario
    HeuristicTableCache meas(map, hw, HeuristicMode::none());
    const int w = 2;
    int a0 = map.index(1, 1), g0 = map.index(4, 1);
    int a1 = map.index(3, 1), g1 = map.index(0, 1);

    // strictly decreasing H: not flagged
    auto none = detect_deadlock(map, meas, false, {a0}, {g0},
                                {Path{a0, map.index(2, 1), map.index(3, 1)}}, w);
    CHECK(none.empty());

    // all-wait plans with H > 0: both flagged, coupled into one set
    auto groups = detect_deadlock(map, meas, false, {a0, a1}, {g0, g1},
                                  {Path{a0, a0, a0}, Path{a1, a1, a1}}, w);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0] == std::vector<int>{0, 1});

    // an at-goal agent is never flagged
    auto at_goal = detect_deadlock(map, meas, false, {g0}, {g0}, {Path{g0, g0, g0}}, w);
    CHECK(at_goal.empty());

    // unrelated stalled agents form separate singleton sets
    int b0 = map.index(0, 0), b1 = map.index(4, 2);
    auto apart = detect_deadlock(map, meas, false, {b0, b1},
                                 {map.index(4, 0), map.index(0, 2)},
                                 {Path{b0, b0, b0}, Path{b1, b1, b1}}, w);
    CHECK(apart.size() == 2);
}

TEST_CASE("strict mode uses the unique-location form") {
    GridMap map = generate_warehouse(1);
    Highway hw = assign_highway_alternating(map);
    GridMap strict = strict_subgraph(map, hw);
    HeuristicTableCache meas(strict, hw, HeuristicMode::strict());
    auto frees = strict.free_cells();
    int start = frees[0];
    // a strict-mode agent that moves is never flagged, any window
    int next = -1;
    for (int d = 0; d < kNumDirs; ++d)
        if (strict.move_allowed(start, d)) next = strict.neighbor(start, d);
    REQUIRE(next >= 0);
    int goal = frees[10];
    auto moving = detect_deadlock(strict, meas, true, {start}, {goal},
                                  {Path{start, next, next}}, 2);
    CHECK(moving.empty());
    auto waiting = detect_deadlock(strict, meas, true, {start}, {goal},
                                   {Path{start, start, start}}, 2);
    CHECK(waiting.size() == 1);
}

TEST_CASE("head-on pair in the side-passage corridor deadlocks at w=2 but not w=3") {
    GridMap map = fig6_map();
    Highway hw(map, {});  // bidirected corridor scenario
    HeuristicTableCache tables(map, hw, HeuristicMode::none());
    std::vector<int> starts{map.index(1, 1), map.index(3, 1)};
    std::vector<int> goals{map.index(4, 1), map.index(0, 1)};
    PbsSolver solver(map, tables);

    SUBCASE("w=2, h=2: a deadlock iteration is detected") {
        SolveReport r = solver.solve(starts, goals, {2, 2, false}, 10.0);
        REQUIRE(r.status == SolveStatus::Success);
        std::vector<Path> padded;
        for (const Path& p : r.plan) padded.push_back(pad_path(p, 2));
        auto groups = detect_deadlock(map, tables, false, starts, goals, padded, 2);
        CHECK_FALSE(groups.empty());
    }
    SUBCASE("w=3, h=3: both agents make progress") {
        SolveReport r = solver.solve(starts, goals, {3, 3, false}, 10.0);
        REQUIRE(r.status == SolveStatus::Success);
        std::vector<Path> padded;
        for (const Path& p : r.plan) padded.push_back(pad_path(p, 3));
        auto groups = detect_deadlock(map, tables, false, starts, goals, padded, 3);
        CHECK(groups.empty());
        for (int i = 0; i < 2; ++i) {
            const HeuristicTable& t = tables.get(goals[i]);
            CHECK(t.at(padded[i][3]) < t.at(starts[i]));
        }
    }
}

TEST_CASE("window escalation doubles w after deadlocks up to the cap") {
    World w(map_from_rows({".."}), HeuristicMode::none());
    EpisodeConfig cfg = basic_cfg(HeuristicMode::none(), 2, 2, 2, 1, 4);
    cfg.escalate_w = true;
    cfg.escalate_cap = 8;
    Simulation sim = w.sim(cfg);
    sim.init_episode();
    CHECK(sim.current_window() == 2);
    sim.step_episode();  // infeasible -> deadlock -> escalate
    CHECK(sim.current_window() == 4);
    sim.step_episode();
    CHECK(sim.current_window() == 8);
    sim.step_episode();
    CHECK(sim.current_window() == 8);  // capped
}

TEST_CASE("episodes conserve per-task timesteps and avoid conflicts") {
    std::mt19937_64 rng(53);
    int episodes_checked = 0;
    for (int trial = 0; trial < 24; ++trial) {
        GridMap map = test::random_map(rng, 4 + rng() % 5, 4 + rng() % 5, 0.2, 10);
        HeuristicMode mode = trial % 3 == 0   ? HeuristicMode::strict()
                             : trial % 3 == 1 ? HeuristicMode::soft(2)
                                              : HeuristicMode::none();
        World w(std::move(map), mode);
        int max_agents = std::min(4, w.planning.num_free() / 3);
        if (max_agents < 2) continue;
        const int ws[] = {2, 3, 5};
        int wv = ws[rng() % 3];
        EpisodeConfig cfg = basic_cfg(mode, 2 + static_cast<int>(rng() % (max_agents - 1)), wv,
                                      1 + static_cast<int>(rng() % wv), rng(), 8);
        Simulation sim = w.sim(cfg);
        sim.run();
        if (sim.failed()) continue;
        ++episodes_checked;

        // executed trajectories are conflict-free at every timestep
        const auto& trace = sim.result().trace;
        REQUIRE_FALSE(trace.empty());
        CHECK_FALSE(test::replay_has_conflict(trace, static_cast<int>(trace[0].size()) - 1));

        // trajectory steps follow the planning graph
        for (const Path& p : trace)
            for (std::size_t i = 0; i + 1 < p.size(); ++i) {
                if (p[i] == p[i + 1]) continue;
                bool ok = false;
                for (int d = 0; d < kNumDirs; ++d)
                    if (w.planning.move_allowed(p[i], d) && w.planning.neighbor(p[i], d) == p[i + 1])
                        ok = true;
                CHECK(ok);
            }

        // conservation per finished task
        for (const TaskRecord& t : sim.result().finished_tasks)
            CHECK(t.idle + t.moving == t.end_timestep - t.start_timestep);

        CHECK(sim.result().executed_timesteps ==
              static_cast<long>(sim.result().iterations.size()) * cfg.planner.h);
    }
    CHECK(episodes_checked >= 10);
}
