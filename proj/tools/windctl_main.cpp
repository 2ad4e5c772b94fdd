// Command-line front end: one subcommand per pipeline stage.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <windctl/bandit.hpp>
#include <windctl/baseline.hpp>
#include <windctl/coordination.hpp>
#include <windctl/farm_model.hpp>
#include <windctl/harness.hpp>
#include <windctl/regimes.hpp>
#include <windctl/table_io.hpp>
#include <windctl/wake_sim.hpp>

using namespace windctl;

namespace {

struct FarmArgs {
    std::string layout;
    bool desk = false;

    void add(CLI::App * app) {
        app->add_option("--layout", layout, "Layout file (JSON); default is the 4x6 farm");
        app->add_flag("--desk", desk, "Use the 3x3 desk farm");
    }
    FarmLayout farm() const {
        if (!layout.empty()) return load_farm_file(layout);
        return desk ? desk_farm() : default_farm();
    }
};

void emit(const std::string & text, const std::string & path) {
    if (path.empty() || path == "-")
        std::cout << text;
    else
        write_text_file(path, text);
}

std::vector<std::size_t> parse_levels(const std::string & s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const auto v = std::stoul(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception &) {
            throw std::invalid_argument("bad set-point level '" + item + "'");
        }
    }
    return out;
}

void write_outputs(const ResultStore & store, const std::string & dir) {
    std::filesystem::create_directories(dir);
    write_text_file((std::filesystem::path(dir) / "store.json").string(), store_to_json(store));
    for (const auto & p : emit_reports(store, dir)) std::cerr << "wrote " << p << "\n";
}

void print_summary(const ResultStore & store) {
    std::size_t failed = 0, violations = 0;
    for (const auto & c : store.cells) {
        if (!c.ok()) {
            ++failed;
            std::cerr << "cell " << c.scenario.direction_deg << " deg / " << c.scenario.demand / 1e6 << " MW / "
                      << c.scenario.high_risk_count << " risk failed: " << c.error << "\n";
            continue;
        }
        for (const auto & r : c.repetitions) violations += r.penalty.at(r.best) > 0;
    }
    std::cerr << store.cells.size() << " cells, " << failed << " failed, " << violations
              << " best configurations with a penalty\n";
}

} // namespace

int main(int argc, char ** argv) {
    CLI::App app{"Wind farm set-point dispatch experiments"};
    app.require_subcommand(1);

    // simulate -------------------------------------------------------------
    auto * sim = app.add_subcommand("simulate", "Evaluate the wake model for one set-point configuration");
    FarmArgs sim_farm;
    sim_farm.add(sim);
    double sim_dir = 0.0, sim_speed = 11.0, sim_k = 0.05;
    std::string sim_levels, sim_out;
    std::size_t sim_level = 2;
    sim->add_option("--direction", sim_dir, "Wind direction in degrees (0 = +x)");
    sim->add_option("--speed", sim_speed, "Freestream speed (m/s)");
    sim->add_option("--level", sim_level, "Menu level for every turbine (0 = lowest)");
    sim->add_option("--levels", sim_levels, "Comma-separated menu level per turbine");
    sim->add_option("--wake-expansion", sim_k, "Wake expansion coefficient");
    sim->add_option("-o,--out", sim_out, "Output file (stdout when absent)");

    // graph ----------------------------------------------------------------
    auto * gr = app.add_subcommand("graph", "Export the coordination graph as an edge list");
    FarmArgs gr_farm;
    gr_farm.add(gr);
    double gr_dir = 0.0;
    GraphParameters gp;
    std::string gr_out;
    gr->add_option("--direction", gr_dir, "Wind direction in degrees");
    gr->add_option("--radius", gp.radius, "Dependency radius (m)");
    gr->add_option("--half-angle", gp.half_angle, "Dependency half angle (deg)");
    gr->add_option("-o,--out", gr_out, "Output file (stdout when absent)");

    // regimes --------------------------------------------------------------
    auto * rg = app.add_subcommand("regimes", "Cluster turbines into regimes and compute demand fractions");
    FarmArgs rg_farm;
    rg_farm.add(rg);
    ScenarioSpec rs;
    std::string rg_k = "auto", rg_mode = "inverse", rg_out, rg_loads_out, rg_loads;
    std::optional<double> rg_floor;
    rg->add_option("--direction", rs.dominant_direction_deg, "Dominant wind direction (deg)");
    rg->add_option("--speed", rs.wind_speed, "Freestream speed (m/s)");
    rg->add_option("--k", rg_k, "Regime count or 'auto'");
    rg->add_option("--fraction-mode", rg_mode, "inverse or complement")->check(CLI::IsMember({"inverse", "complement"}));
    rg->add_option("--damage-floor", rg_floor, "Floor on regime damage share instead of an error");
    rg->add_option("--loads", rg_loads, "Load-revolution table; synthetic loads when absent");
    rg->add_option("--seed", rs.master_seed, "Master seed");
    rg->add_option("-o,--out", rg_out, "Regime table output (stdout when absent)");
    rg->add_option("--loads-out", rg_loads_out, "Write the load-revolution table used");

    // run / grid -----------------------------------------------------------
    auto * run = app.add_subcommand("run", "Run one scenario (SPTS repetitions and the baseline)");
    std::string run_config, run_out = "out";
    FarmArgs run_farm;
    run_farm.add(run);
    std::optional<double> run_dir, run_demand;
    std::optional<std::size_t> run_risk, run_iter, run_reps, run_threads;
    std::optional<std::uint64_t> run_seed;
    run->add_option("--config", run_config, "Grid config (JSON); its first cell is the base");
    run->add_option("--direction", run_dir, "Wind direction (deg)");
    run->add_option("--demand-mw", run_demand, "Demand (MW)");
    run->add_option("--risk", run_risk, "High-risk turbine count");
    run->add_option("--iterations", run_iter, "Iteration budget");
    run->add_option("--repetitions", run_reps, "Repetitions");
    run->add_option("--seed", run_seed, "Master seed");
    run->add_option("--threads", run_threads, "Worker threads (0 = all cores)");
    run->add_option("-o,--out", run_out, "Output directory");

    auto * grid = app.add_subcommand("grid", "Run a full parameter grid");
    std::string grid_config, grid_preset = "default", grid_out = "out";
    FarmArgs grid_farm;
    grid_farm.add(grid);
    std::optional<std::size_t> grid_iter, grid_reps, grid_threads;
    std::optional<std::uint64_t> grid_seed;
    grid->add_option("--config", grid_config, "Grid config (JSON)");
    grid->add_option("--preset", grid_preset, "default or desk (ignored with --config)")
        ->check(CLI::IsMember({"default", "desk"}));
    grid->add_option("--iterations", grid_iter, "Iteration budget override");
    grid->add_option("--repetitions", grid_reps, "Repetition override");
    grid->add_option("--seed", grid_seed, "Master seed override");
    grid->add_option("--threads", grid_threads, "Worker threads (0 = all cores)");
    grid->add_option("-o,--out", grid_out, "Output directory");

    // report ---------------------------------------------------------------
    auto * rep = app.add_subcommand("report", "Write report tables from a stored grid result");
    std::string rep_store, rep_out = "out";
    rep->add_option("--store", rep_store, "store.json written by run or grid")->required();
    rep->add_option("-o,--out", rep_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) {
            const auto farm = sim_farm.farm();
            const SetPointMenu menu;
            JointConfiguration cfg = sim_levels.empty() ? JointConfiguration::uniform(farm.size(), sim_level)
                                                        : JointConfiguration(parse_levels(sim_levels));
            cfg.validate(farm, menu);
            const WindCondition wind(sim_dir, sim_speed);
            WakeParameters wp;
            wp.expansion_k = sim_k;
            const auto flow = WakeModel(wp).evaluate(farm, wind, menu, cfg);
            CsvWriter csv("windctl.flow/1", {"turbine_id", "x_m", "y_m", "setpoint_w", "effective_speed_ms", "power_w"});
            for (std::size_t w = 0; w < farm.size(); ++w) {
                csv.cell(farm[w].id).cell(farm[w].x).cell(farm[w].y).cell(menu[cfg[w]]).cell(flow.effective_speed[w])
                    .cell(flow.power[w]);
                csv.end_row();
            }
            emit(csv.str(), sim_out);
            std::cerr << "farm power " << format_double(flow.farm_total) << " W\n";
        } else if (*gr) {
            const auto farm = gr_farm.farm();
            const auto graph = build_graph(farm, WindCondition(gr_dir, 11.0), gp);
            emit(export_edge_list(farm, graph), gr_out);
            const auto order = elimination_order(graph);
            std::cerr << graph.edge_count() << " edges, frontier width " << frontier_width(graph, order)
                      << ", induced width " << induced_width(graph, order) << "\n";
        } else if (*rg) {
            const auto farm = rg_farm.farm();
            if (rg_k != "auto") rs.regime_count = std::stoul(rg_k);
            rs.fraction_mode = rg_mode == "inverse" ? FractionMode::inverse : FractionMode::complement;
            rs.damage_floor = rg_floor;
            if (!rg_loads.empty()) rs.loads_path = rg_loads;
            const SetPointMenu menu;
            const WakeModel model(rs.wake);
            const auto part = build_partition(rs, farm, menu, model);
            emit(render_regimes(farm, part), rg_out);
            if (!rg_loads_out.empty()) write_text_file(rg_loads_out, render_lrd(farm, scenario_loads(rs, farm, menu, model)));
        } else if (*run) {
            GridSpec g = run_config.empty() ? GridSpec{} : load_grid_config_file(run_config);
            g.directions_deg.resize(1);
            g.demands.resize(1);
            g.high_risk_counts.resize(1);
            if (run_config.empty()) {
                g.demands = {80e6};
                g.high_risk_counts = {3};
            }
            if (run_dir) g.directions_deg = {*run_dir};
            if (run_demand) g.demands = {*run_demand * 1e6};
            if (run_risk) g.high_risk_counts = {*run_risk};
            if (run_iter) g.base.iterations = *run_iter;
            if (run_reps) g.base.repetitions = *run_reps;
            if (run_seed) g.base.master_seed = *run_seed;
            if (run_threads) g.threads = *run_threads;
            const auto farm = (run_farm.layout.empty() && !run_farm.desk) ? g.farm() : run_farm.farm();
            const auto store = run_grid(g, farm);
            write_outputs(store, run_out);
            if (store.cells.front().ok())
                write_text_file((std::filesystem::path(run_out) / "baseline_trace.csv").string(),
                                store.cells.front().baseline.trace);
            print_summary(store);
            if (!store.cells.front().ok()) return 1;
        } else if (*grid) {
            GridSpec g = !grid_config.empty() ? load_grid_config_file(grid_config)
                         : grid_preset == "desk" ? desk_grid()
                                                 : GridSpec{};
            if (grid_iter) g.base.iterations = *grid_iter;
            if (grid_reps) g.base.repetitions = *grid_reps;
            if (grid_seed) g.base.master_seed = *grid_seed;
            if (grid_threads) g.threads = *grid_threads;
            const auto farm = (grid_farm.layout.empty() && !grid_farm.desk) ? g.farm() : grid_farm.farm();
            const auto store = run_grid(g, farm);
            write_outputs(store, grid_out);
            print_summary(store);
        } else if (*rep) {
            const auto store = store_from_json(read_text_file(rep_store));
            for (const auto & p : emit_reports(store, rep_out)) std::cerr << "wrote " << p << "\n";
        }
    } catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
