#include "hmapf/cli.hpp"

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hmapf/experiment.hpp"

namespace hmapf {

namespace {

std::vector<SweepAxis> parse_axes(const std::vector<std::string>& specs) {
    std::vector<SweepAxis> axes;
    for (const std::string& spec : specs) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("axis must be key=v1,v2,...: " + spec);
        SweepAxis ax;
        ax.key = spec.substr(0, eq);
        std::string rest = spec.substr(eq + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            auto comma = rest.find(',', pos);
            if (comma == std::string::npos) comma = rest.size();
            std::string v = rest.substr(pos, comma - pos);
            if (!v.empty()) ax.values.push_back(v);
            pos = comma + 1;
        }
        if (ax.values.empty()) throw std::invalid_argument("axis has no values: " + spec);
        axes.push_back(std::move(ax));
    }
    return axes;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
    CLI::App app{"lifelong MAPF with highway heuristics"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-map", "generate a warehouse map and highway overlay");
    int blocks = 3;
    std::string gen_out = "warehouse.map";
    std::string gen_overlay;
    gen->add_option("--blocks", blocks, "blocks per side (odd)")->required();
    gen->add_option("--out", gen_out, "map file path")->required();
    gen->add_option("--overlay", gen_overlay, "overlay path (default: <out>.highway)");

    auto* run = app.add_subcommand("run", "run a batch of episodes from a config file");
    std::string run_config;
    std::string run_out;
    uint64_t run_seed = 0;
    bool run_seed_set = false;
    int jobs = 1;
    run->add_option("--config", run_config, "key=value config file")->required();
    run->add_option("--out", run_out, "output stem (writes <out>.csv and <out>.json)");
    run->add_option("--seed", run_seed, "override batch seed")->each([&](const std::string&) {
        run_seed_set = true;
    });
    run->add_option("--jobs", jobs, "episodes run concurrently");

    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep from a config file");
    std::string sweep_config;
    std::string sweep_out;
    std::vector<std::string> axis_specs;
    int sweep_jobs = 1;
    sweep->add_option("--config", sweep_config, "key=value config file")->required();
    sweep->add_option("--axis", axis_specs, "axis key=v1,v2,... (repeatable; keys: mode,c,n,density,w,h)")
        ->required();
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_option("--jobs", sweep_jobs, "episodes run concurrently");

    try {
        std::vector<const char*> argv;
        argv.push_back("hmapf");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (gen->parsed()) {
            GridMap map = generate_warehouse(blocks);
            Highway hw = assign_highway_alternating(map);
            write_map_file(map, gen_out);
            if (gen_overlay.empty()) gen_overlay = gen_out + ".highway";
            write_overlay_file(map, hw, gen_overlay);
            std::cout << "wrote " << gen_out << " (" << map.width() << "x" << map.height()
                      << ") and " << gen_overlay << "\n";
            return 0;
        }
        if (run->parsed()) {
            RunConfig cfg = load_config_file(run_config);
            if (run_seed_set) cfg.seed = run_seed;
            if (!run_out.empty()) cfg.out = run_out;
            BatchContext ctx = BatchContext::build(cfg);
            BatchResult result = run_batch(cfg, ctx, jobs);
            write_csv(cfg.out + ".csv", result.rows);
            write_text(cfg.out + ".json", summary_json_text(cfg, result));
            std::cout << "episodes " << result.summary.episodes << ", fail "
                      << result.summary.fail_count;
            if (result.summary.has_means)
                std::cout << ", throughput " << result.summary.throughput;
            std::cout << "\n";
            return result.summary.has_means ? 0 : 2;
        }
        if (sweep->parsed()) {
            RunConfig base = load_config_file(sweep_config);
            if (!sweep_out.empty()) base.out = sweep_out;
            std::vector<SweepAxis> axes = parse_axes(axis_specs);
            std::vector<SweepCell> cells = run_sweep(base, axes, sweep_jobs);
            bool any_all_failed = false;
            for (const SweepCell& cell : cells) {
                write_csv(base.out + "/" + cell.name + ".csv", cell.result.rows);
                if (!cell.result.summary.has_means) any_all_failed = true;
            }
            write_text(base.out + "/sweep_summary.json", sweep_report_json(base, axes, cells));
            std::cout << "cells " << cells.size() << "\n";
            return any_all_failed ? 2 : 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace hmapf
