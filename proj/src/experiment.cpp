#include "hmapf/experiment.hpp"

#include <atomic>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace hmapf {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double parse_c(const std::string& v) {
    if (v == "inf" || v == "INF" || v == "infinity") return kUnreachable;
    return std::stod(v);
}

bool parse_bool(const std::string& v) {
    return v == "1" || v == "true" || v == "yes" || v == "on";
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    if (key == "map")
        map_spec = value;
    else if (key == "overlay")
        overlay_spec = value;
    else if (key == "mode") {
        if (value == "none")
            mode = HeuristicMode::none();
        else if (value == "strict")
            mode = HeuristicMode::strict();
        else if (value == "soft")
            mode = HeuristicMode::soft(std::isnan(mode.c) ? 1.0 : std::max(mode.c, 1.0));
        else
            throw std::invalid_argument("config: unknown mode '" + value + "'");
    } else if (key == "c") {
        double c = parse_c(value);
        if (!(c >= 1.0)) throw std::invalid_argument("config: c must be >= 1");
        if (mode.kind == LimitKind::Soft || mode.kind == LimitKind::None)
            mode = c == 1.0 ? HeuristicMode::none() : HeuristicMode::soft(c);
    } else if (key == "agents") {
        agents = std::stoi(value);
        density = 0.0;
    } else if (key == "density") {
        density = std::stod(value);
        agents = 0;
    } else if (key == "w")
        w = std::stoi(value);
    else if (key == "h")
        h = std::stoi(value);
    else if (key == "partial")
        partial = parse_bool(value);
    else if (key == "iterations")
        iterations = std::stoi(value);
    else if (key == "episodes")
        episodes = std::stoi(value);
    else if (key == "time_limit")
        time_limit_s = std::stod(value);
    else if (key == "seed")
        seed = std::stoull(value);
    else if (key == "escalate_w")
        escalate_w = parse_bool(value);
    else if (key == "escalate_cap")
        escalate_cap = std::stoi(value);
    else if (key == "out")
        out = value;
    else
        throw std::invalid_argument("config: unknown key '" + key + "'");
}

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(lineno) +
                                        " is not key=value");
        cfg.set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    if (cfg.h < 1 || cfg.h > cfg.w) throw std::invalid_argument("config: need 1 <= h <= w");
    if (cfg.agents == 0 && cfg.density <= 0.0)
        throw std::invalid_argument("config: set agents or density");
    if (cfg.partial && !cfg.mode.trick_valid())
        throw std::invalid_argument("config: partial planning needs strict mode, c=1, or c=inf");
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

BatchContext BatchContext::build(const RunConfig& cfg) {
    BatchContext ctx;
    if (cfg.map_spec.rfind("warehouse:", 0) == 0) {
        ctx.base_map = generate_warehouse(std::stoi(cfg.map_spec.substr(10)));
    } else {
        ctx.base_map = load_map_file(cfg.map_spec);
    }
    ctx.map_name = ctx.base_map.name.empty() ? cfg.map_spec : ctx.base_map.name;

    if (cfg.overlay_spec == "alternating")
        ctx.highway = assign_highway_alternating(ctx.base_map);
    else if (cfg.overlay_spec == "none")
        ctx.highway = Highway(ctx.base_map, {});
    else
        ctx.highway = load_overlay_file(ctx.base_map, cfg.overlay_spec);

    // Deadlock and rerouting are measured with the strict-graph shortest
    // distance in every mode; with no highway this degenerates to the
    // plain undirected distance.
    if (cfg.mode.kind == LimitKind::Strict) {
        ctx.planning_map = strict_subgraph(ctx.base_map, ctx.highway);
        if (!strongly_connected(ctx.planning_map))
            std::cerr << "warning: strict graph is not strongly connected; "
                         "some goals may be unreachable\n";
        ctx.plan_tables = std::make_shared<HeuristicTableCache>(ctx.planning_map, ctx.highway,
                                                                HeuristicMode::strict());
        ctx.meas_tables = ctx.plan_tables;
    } else {
        ctx.planning_map = ctx.base_map;
        ctx.plan_tables =
            std::make_shared<HeuristicTableCache>(ctx.planning_map, ctx.highway, cfg.mode);
        ctx.meas_tables = std::make_shared<HeuristicTableCache>(ctx.planning_map, ctx.highway,
                                                                HeuristicMode::strict());
    }
    return ctx;
}

uint64_t mix_seed(uint64_t batch_seed, uint64_t index) {
    uint64_t z = batch_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EpisodeConfig episode_config(const RunConfig& cfg, uint64_t episode_seed) {
    EpisodeConfig ec;
    ec.mode = cfg.mode;
    ec.agent_count = cfg.agents;
    ec.density = cfg.density;
    ec.planner.w = cfg.w;
    ec.planner.h = cfg.h;
    ec.planner.partial_planning = cfg.partial;
    ec.iterations = cfg.iterations;
    ec.time_limit_s = cfg.time_limit_s;
    ec.seed = episode_seed;
    ec.escalate_w = cfg.escalate_w;
    ec.escalate_cap = cfg.escalate_cap;
    return ec;
}

BatchResult run_batch(const RunConfig& cfg, const BatchContext& ctx, int jobs) {
    BatchResult out;
    out.rows.resize(cfg.episodes);
    jobs = std::max(1, std::min(jobs, cfg.episodes));

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int e = next.fetch_add(1); e < cfg.episodes; e = next.fetch_add(1)) {
            EpisodeConfig ec = episode_config(cfg, mix_seed(cfg.seed, e));
            Simulation sim(ctx.planning_map, ctx.highway, *ctx.plan_tables, *ctx.meas_tables, ec);
            sim.run();
            EpisodeRow row;
            row.seed = ec.seed;
            row.mode = cfg.mode.kind_name();
            row.c = cfg.mode.kind == LimitKind::Soft ? cfg.mode.c : 1.0;
            if (cfg.mode.kind == LimitKind::Strict) row.c = kUnreachable;
            row.w = cfg.w;
            row.h = cfg.h;
            row.map = ctx.map_name;
            row.agents = static_cast<int>(sim.agents().size());
            row.summary = summarize_episode(sim.result());
            out.rows[e] = std::move(row);
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<EpisodeSummary> summaries;
    summaries.reserve(out.rows.size());
    for (const EpisodeRow& r : out.rows) summaries.push_back(r.summary);
    out.summary = summarize(summaries);
    return out;
}

void write_csv(const std::string& path, const std::vector<EpisodeRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv: " + path);
    out << csv_header() << '\n';
    for (const EpisodeRow& r : rows) out << csv_row(r) << '\n';
}

namespace {

nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    j["map"] = cfg.map_spec;
    j["overlay"] = cfg.overlay_spec;
    j["mode"] = cfg.mode.kind_name();
    j["c"] = format_c(cfg.mode.kind == LimitKind::Strict ? kUnreachable : cfg.mode.c);
    j["agents"] = cfg.agents;
    j["density"] = cfg.density;
    j["w"] = cfg.w;
    j["h"] = cfg.h;
    j["partial"] = cfg.partial;
    j["iterations"] = cfg.iterations;
    j["episodes"] = cfg.episodes;
    j["time_limit"] = cfg.time_limit_s;
    j["seed"] = cfg.seed;
    return j;
}

nlohmann::json means_json(const BatchSummary& s) {
    nlohmann::json j;
    j["throughput"] = s.throughput;
    j["mean_runtime_s"] = s.mean_runtime_s;
    j["mean_generated_nodes"] = s.mean_generated_nodes;
    j["idle_mean"] = s.mean_idle_timesteps;
    j["moving_mean"] = s.mean_moving_timesteps;
    j["avoidance_rate"] = s.highway_avoidance_rate;
    j["rerouting_rate"] = s.rerouting_rate;
    j["deadlock_iterations"] = s.deadlock_iterations;
    return j;
}

}  // namespace

std::string summary_json_text(const RunConfig& cfg, const BatchResult& result) {
    nlohmann::json j;
    j["config"] = config_json(cfg);
    j["episodes"] = result.summary.episodes;
    j["fail_count"] = result.summary.fail_count;
    if (result.summary.has_means) j["means"] = means_json(result.summary);
    return j.dump(2) + "\n";
}

std::vector<SweepCell> run_sweep(const RunConfig& base, const std::vector<SweepAxis>& axes,
                                 int jobs) {
    std::vector<SweepCell> cells;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        SweepCell cell;
        RunConfig cfg = base;
        std::string name;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const std::string& key = axes[a].key;
            const std::string& value = axes[a].values[idx[a]];
            if (key == "n")
                cfg.set("map", "warehouse:" + value);
            else
                cfg.set(key, value);
            cell.coords.emplace_back(key, value);
            if (!name.empty()) name += "_";
            name += key + "=" + value;
        }
        cell.name = name;
        BatchContext ctx = BatchContext::build(cfg);
        cell.result = run_batch(cfg, ctx, jobs);
        cells.push_back(std::move(cell));

        std::size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++idx[a] < axes[a].values.size()) break;
            idx[a] = 0;
        }
        if (a == axes.size()) break;
    }
    return cells;
}

std::string sweep_report_json(const RunConfig& base, const std::vector<SweepAxis>& axes,
                              const std::vector<SweepCell>& cells) {
    auto baseline_coords = [&](const SweepCell& cell) {
        auto coords = cell.coords;
        for (auto& [key, value] : coords) {
            if (key == "c") value = "1";
            if (key == "mode") value = "none";
        }
        return coords;
    };
    auto find_cell = [&](const std::vector<std::pair<std::string, std::string>>& coords)
        -> const SweepCell* {
        for (const SweepCell& c : cells)
            if (c.coords == coords) return &c;
        return nullptr;
    };

    nlohmann::json j;
    j["config"] = config_json(base);
    nlohmann::json jcells = nlohmann::json::array();
    bool any_axis_has_baseline = false;
    for (const SweepAxis& ax : axes)
        if (ax.key == "c" || ax.key == "mode") any_axis_has_baseline = true;

    for (const SweepCell& cell : cells) {
        nlohmann::json jc;
        jc["cell"] = cell.name;
        jc["episodes"] = cell.result.summary.episodes;
        jc["fail_count"] = cell.result.summary.fail_count;
        if (cell.result.summary.has_means) jc["means"] = means_json(cell.result.summary);
        if (any_axis_has_baseline) {
            const SweepCell* baseline = find_cell(baseline_coords(cell));
            if (baseline == nullptr)
                throw std::runtime_error("sweep: missing baseline cell for " + cell.name);
            if (cell.result.summary.has_means && baseline->result.summary.has_means) {
                const BatchSummary& s = cell.result.summary;
                const BatchSummary& b = baseline->result.summary;
                nlohmann::json ratios;
                auto ratio = [](double v, double base) { return base != 0.0 ? v / base : 0.0; };
                ratios["throughput"] = ratio(s.throughput, b.throughput);
                ratios["mean_runtime_s"] = ratio(s.mean_runtime_s, b.mean_runtime_s);
                ratios["mean_generated_nodes"] =
                    ratio(s.mean_generated_nodes, b.mean_generated_nodes);
                jc["relative_to_baseline"] = ratios;
            }
        }
        jcells.push_back(std::move(jc));
    }
    j["cells"] = jcells;
    return j.dump(2) + "\n";
}

}  // namespace hmapf
