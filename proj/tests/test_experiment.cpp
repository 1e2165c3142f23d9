#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hmapf/cli.hpp"
#include "hmapf/experiment.hpp"

using namespace hmapf;

namespace {

std::string tmp_path(const std::string& name) {
    return "/tmp/hmapf_test_" + name;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// rows with the runtime column blanked, for determinism comparisons
std::string strip_runtime(const std::string& csv) {
    std::istringstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        int col = 0;
        std::string kept;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            if (col++ == 8) cell = "-";  // mean_runtime_s
            kept += cell + ",";
        }
        out << kept << "\n";
    }
    return out.str();
}

const char* kTinyConfig =
    "map = warehouse:1\n"
    "mode = none\n"
    "agents = 2\n"
    "w = 5\n"
    "h = 5\n"
    "iterations = 6\n"
    "episodes = 3\n"
    "seed = 5\n";

}  // namespace

TEST_CASE("config parsing") {
    RunConfig cfg = parse_config_text(
        "# comment\n"
        "map = warehouse:3\n"
        "mode = soft\n"
        "c = 2\n"
        "density = 0.05\n"
        "w = 5\n"
        "h = 5\n"
        "iterations = 50\n"
        "episodes = 20\n"
        "seed = 7\n");
    CHECK(cfg.mode.kind == LimitKind::Soft);
    CHECK(cfg.mode.c == 2.0);
    CHECK(cfg.density == doctest::Approx(0.05));
    CHECK(cfg.seed == 7);

    RunConfig inf_cfg = parse_config_text("map=warehouse:1\nmode=soft\nc=inf\nagents=2\n");
    CHECK(inf_cfg.mode.kind == LimitKind::Soft);
    CHECK(std::isinf(inf_cfg.mode.c));

    CHECK_THROWS(parse_config_text("bogus_key = 1\nagents=2\n"));
    CHECK_THROWS(parse_config_text("mode = sideways\nagents=2\n"));
    CHECK_THROWS(parse_config_text("agents = 2\nw = 2\nh = 5\n"));
    CHECK_THROWS(parse_config_text("map = warehouse:1\n"));  // no agents or density
    CHECK_THROWS(parse_config_text("agents=2\nmode=soft\nc=2\npartial=1\n"));
    CHECK_THROWS(parse_config_text("agents=2\nnot a pair\n"));

    // partial planning allowed for exact heuristics
    CHECK(parse_config_text("agents=2\nmode=strict\npartial=1\n").partial);
    CHECK(parse_config_text("agents=2\nmode=soft\nc=inf\npartial=1\n").partial);
}

TEST_CASE("mix_seed is a stable mixing function") {
    CHECK(mix_seed(1, 0) != mix_seed(1, 1));
    CHECK(mix_seed(1, 0) != mix_seed(2, 0));
    CHECK(mix_seed(123, 7) == mix_seed(123, 7));
}

TEST_CASE("batch context wiring") {
    RunConfig cfg = parse_config_text("map=warehouse:3\nmode=strict\nagents=4\n");
    BatchContext ctx = BatchContext::build(cfg);
    CHECK(ctx.map_name == "warehouse3");
    CHECK(ctx.planning_map.blocked_edge_count() > 0);
    CHECK(ctx.plan_tables == ctx.meas_tables);  // strict measures with H_S

    RunConfig soft = parse_config_text("map=warehouse:3\nmode=soft\nc=2\nagents=4\n");
    BatchContext sctx = BatchContext::build(soft);
    CHECK(sctx.planning_map.blocked_edge_count() == 0);
    CHECK(sctx.plan_tables != sctx.meas_tables);  // unweighted measurement
}

TEST_CASE("batch runs are deterministic and parallel-safe") {
    RunConfig cfg = parse_config_text(kTinyConfig);
    BatchContext ctx = BatchContext::build(cfg);
    BatchResult serial = run_batch(cfg, ctx, 1);
    BatchResult parallel = run_batch(cfg, ctx, 2);
    REQUIRE(serial.rows.size() == 3);

    std::string a, b;
    for (const auto& r : serial.rows) a += csv_row(r) + "\n";
    for (const auto& r : parallel.rows) b += csv_row(r) + "\n";
    CHECK(strip_runtime(a) == strip_runtime(b));
    CHECK(serial.summary.fail_count == parallel.summary.fail_count);

    // per-episode seeds derive from the batch seed
    CHECK(serial.rows[0].seed == mix_seed(5, 0));
    CHECK(serial.rows[2].seed == mix_seed(5, 2));
}

TEST_CASE("summary json reports config, means and fail counts") {
    RunConfig cfg = parse_config_text(kTinyConfig);
    BatchContext ctx = BatchContext::build(cfg);
    BatchResult result = run_batch(cfg, ctx, 1);
    auto j = nlohmann::json::parse(summary_json_text(cfg, result));
    CHECK(j["config"]["map"] == "warehouse:1");
    CHECK(j["episodes"] == 3);
    CHECK(j["fail_count"] == 0);
    CHECK(j.contains("means"));
    CHECK(j["means"]["throughput"].get<double>() > 0.0);
}

TEST_CASE("forced timeouts fail every episode and drop the means") {
    RunConfig cfg = parse_config_text(kTinyConfig);
    cfg.time_limit_s = 0.0;
    BatchContext ctx = BatchContext::build(cfg);
    BatchResult result = run_batch(cfg, ctx, 1);
    CHECK(result.summary.fail_count == 3);
    CHECK_FALSE(result.summary.has_means);
    auto j = nlohmann::json::parse(summary_json_text(cfg, result));
    CHECK_FALSE(j.contains("means"));
}

TEST_CASE("sweep cells and the relative-ratio report") {
    RunConfig base = parse_config_text(
        "map=warehouse:1\nmode=soft\nagents=2\nw=5\nh=5\niterations=4\nepisodes=2\nseed=3\n");
    std::vector<SweepAxis> axes{{"c", {"1", "2"}}};
    auto cells = run_sweep(base, axes, 1);
    REQUIRE(cells.size() == 2);
    CHECK(cells[0].name == "c=1");
    CHECK(cells[1].name == "c=2");

    auto j = nlohmann::json::parse(sweep_report_json(base, axes, cells));
    REQUIRE(j["cells"].size() == 2);
    CHECK(j["cells"][0]["relative_to_baseline"]["throughput"].get<double>() ==
          doctest::Approx(1.0));
    CHECK(j["cells"][1].contains("relative_to_baseline"));

    // baseline missing: the c=1 cell is absent
    std::vector<SweepAxis> no_base{{"c", {"2"}}};
    auto orphan = run_sweep(base, no_base, 1);
    CHECK_THROWS(sweep_report_json(base, no_base, orphan));
}

TEST_CASE("cli gen-map writes map and overlay") {
    std::string map_path = tmp_path("gen.map");
    CHECK(cli_main({"gen-map", "--blocks", "1", "--out", map_path}) == 0);
    GridMap map = load_map_file(map_path);
    CHECK(map.width() == 12);
    Highway hw = load_overlay_file(map, map_path + ".highway");
    CHECK(hw.with_edge_count() > 0);

    CHECK(cli_main({"gen-map", "--blocks", "2", "--out", map_path}) == 1);
    CHECK(cli_main({"gen-map"}) == 1);
    CHECK(cli_main({"bogus-subcommand"}) == 1);
}

TEST_CASE("cli run emits csv and json and honors flags") {
    std::string cfg_path = tmp_path("run.cfg");
    write_file(cfg_path, kTinyConfig);
    std::string out = tmp_path("run_out");
    CHECK(cli_main({"run", "--config", cfg_path, "--out", out, "--jobs", "2"}) == 0);

    std::string csv = read_file(out + ".csv");
    CHECK(csv.rfind(csv_header(), 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 episodes

    auto j = nlohmann::json::parse(read_file(out + ".json"));
    CHECK(j["fail_count"] == 0);

    // same config and seed give identical csv modulo runtime
    std::string out2 = tmp_path("run_out2");
    CHECK(cli_main({"run", "--config", cfg_path, "--out", out2}) == 0);
    CHECK(strip_runtime(read_file(out + ".csv")) == strip_runtime(read_file(out2 + ".csv")));

    // all-fail exits with code 2
    std::string fail_cfg = tmp_path("fail.cfg");
    write_file(fail_cfg, std::string(kTinyConfig) + "time_limit = 0\n");
    CHECK(cli_main({"run", "--config", fail_cfg, "--out", tmp_path("fail_out")}) == 2);

    CHECK(cli_main({"run", "--config", tmp_path("missing.cfg")}) == 1);
}

TEST_CASE("cli sweep writes per-cell csv and a ratio report") {
    std::string cfg_path = tmp_path("sweep.cfg");
    write_file(cfg_path,
               "map=warehouse:1\nmode=soft\nagents=2\nw=5\nh=5\niterations=4\nepisodes=2\nseed=3\n");
    std::string dir = tmp_path("sweep_dir");
    std::remove((dir + "/c=1.csv").c_str());
    std::remove((dir + "/c=2.csv").c_str());
    system(("mkdir -p " + dir).c_str());
    CHECK(cli_main({"sweep", "--config", cfg_path, "--axis", "c=1,2", "--out", dir}) == 0);
    CHECK(read_file(dir + "/c=1.csv").rfind(csv_header(), 0) == 0);
    auto j = nlohmann::json::parse(read_file(dir + "/sweep_summary.json"));
    CHECK(j["cells"].size() == 2);
}
