#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <windctl/baseline.hpp>
#include <windctl/bandit.hpp>
#include <windctl/coordination.hpp>
#include <windctl/farm_model.hpp>
#include <windctl/regimes.hpp>
#include <windctl/solver.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

struct ScenarioSpec {
    double direction_deg = 0.0;
    MetersPerSecond wind_speed = 11.0;
    Watts demand = 80.0e6;
    std::size_t high_risk_count = 0;
    /// Seed for choosing the high-risk turbines; derived from the master seed
    /// and the cell parameters when absent.
    std::optional<std::uint64_t> selection_seed;
    /// Draw a fresh high-risk set per repetition instead of one per cell.
    bool redraw_high_risk = false;

    std::size_t iterations = 200;
    std::size_t repetitions = 100;

    Watts prior_sigma = 1.0e6;
    Watts noise_sigma = 1.0e3;          // assumed by the belief update
    Watts observation_noise = 0.0;      // added to simulated powers
    Watts epsilon = 1.0e4;              // initial solver bin width
    Watts max_epsilon = 1.0e6;          // adaptive widening stops here
    std::size_t max_states = 400000;

    std::optional<std::size_t> regime_count; // nullopt: chosen by BIC
    FractionMode fraction_mode = FractionMode::inverse;
    std::optional<double> damage_floor;

    /// Regimes and loads come from steady operation under this direction.
    double dominant_direction_deg = 0.0;
    /// Load-revolution table to use instead of synthetic loads.
    std::optional<std::string> loads_path;

    GraphParameters graph;
    WakeParameters wake;
    std::uint64_t master_seed = 1;

    /// Throws std::invalid_argument.
    void validate() const;
};

/// Stable key of a cell: direction, demand and high-risk count. Seeds depend
/// on this key rather than on the cell's position in the grid.
std::uint64_t cell_key(const ScenarioSpec & s);

/// Seed of repetition `rep`: derive_seed(master, {tag, cell_key, rep}).
std::uint64_t repetition_seed(const ScenarioSpec & s, std::size_t rep);

/// High-risk turbines for a repetition, drawn without replacement and sorted.
std::vector<std::size_t> draw_high_risk(const ScenarioSpec & s, std::size_t turbines, std::size_t rep);

/// Everything a repetition needs that does not depend on its random stream.
struct ScenarioContext {
    FarmLayout farm;
    SetPointMenu menu;
    WakeModel model;
    WindCondition wind;
    CoordinationGraph graph;
    ArmIndex arms;
    RegimePartition partition;
};

/// The loaded load-revolution table, or synthetic loads seeded from the
/// master seed under the dominant wind.
std::vector<LoadRevolutionDistribution> scenario_loads(const ScenarioSpec & s, const FarmLayout & farm,
                                                       const SetPointMenu & menu, const WakeModel & model);

/// Regimes from all-maximum powers under the dominant wind, fractions from
/// (synthetic or loaded) turbine damage.
RegimePartition build_partition(const ScenarioSpec & s, const FarmLayout & farm, const SetPointMenu & menu,
                                const WakeModel & model);

ScenarioContext prepare_scenario(const ScenarioSpec & s, const FarmLayout & farm);

struct IterationRecord {
    JointConfiguration executed;
    Score score;              // penalty count and regime demand error of simulated powers
    Watts farm_power = 0.0;
    Watts farm_error = 0.0;   // |farm power - demand|
    Watts epsilon = 0.0;      // solver bin width that was used; 0 for the local-search fallback
};

struct RunRecord {
    std::vector<std::size_t> high_risk;
    std::vector<IterationRecord> iterations;
    std::size_t best = 0;                   // index into iterations
    JointConfiguration best_configuration;
    std::vector<Watts> best_powers;
    double seconds = 0.0;                   // wall clock; never written to reports

    const Score & best_score() const { return iterations[best].score; }
};

/// Thompson-sampling loop: sample every arm, solve, simulate, update.
RunRecord run_spts(const ScenarioSpec & s, const ScenarioContext & ctx, std::size_t rep = 0);
RunRecord run_spts(const ScenarioSpec & s, const FarmLayout & farm, std::size_t rep = 0);

struct BaselineRecord {
    std::vector<std::size_t> high_risk;
    JointConfiguration configuration;
    std::vector<Watts> powers;
    Score score;               // same measure as the SPTS iterations
    Watts farm_power = 0.0;
    Watts farm_error = 0.0;
    std::string trace;         // rendered heuristic trace
};

BaselineRecord run_baseline(const ScenarioSpec & s, const ScenarioContext & ctx);

// ---------------------------------------------------------------------------
// Grids

struct GridSpec {
    ScenarioSpec base;
    std::vector<double> directions_deg{0.0, 30.0};
    std::vector<Watts> demands{60e6, 70e6, 80e6, 90e6, 100e6};
    std::vector<std::size_t> high_risk_counts{1, 2, 3, 4};
    std::optional<std::string> layout_path;   // preset farm when absent
    bool desk_farm = false;                   // 3x3 instead of 4x6 preset farm
    std::size_t threads = 0;                  // 0: hardware concurrency

    /// Cells in direction-major, then demand, then risk-count order.
    std::vector<ScenarioSpec> cells() const;
    /// The layout file when given, else the preset farm.
    FarmLayout farm() const;
};

/// Compact per-repetition results kept in the store.
struct RepetitionSummary {
    std::vector<std::size_t> high_risk;
    std::vector<double> error;        // per iteration
    std::vector<std::size_t> penalty; // per iteration
    std::vector<double> farm_error;   // per iteration
    std::size_t fallbacks = 0;        // iterations solved by local search only
    std::size_t best = 0;
    JointConfiguration best_configuration;
    std::vector<Watts> best_powers;
};

struct CellResult {
    ScenarioSpec scenario;
    std::string error;                // empty when the cell completed
    RegimePartition partition;
    BaselineRecord baseline;
    std::vector<RepetitionSummary> repetitions;

    bool ok() const { return error.empty(); }
};

struct ResultStore {
    FarmLayout farm;
    SetPointMenu menu;
    std::vector<CellResult> cells;
};

RepetitionSummary summarize(const RunRecord & run);

/// Runs every cell and repetition. A failing cell records its message and the
/// other cells proceed.
ResultStore run_grid(const GridSpec & grid, const FarmLayout & farm);

/// The 3x3 preset used for quick checks: T = 100, 10 repetitions, demands
/// scaled to the smaller farm.
GridSpec desk_grid();
FarmLayout desk_farm();

/// Grid configuration document (JSON, schema "windctl.grid/1"). Unknown keys
/// are rejected.
GridSpec load_grid_config(const std::string & document);
GridSpec load_grid_config_file(const std::string & path);

std::string store_to_json(const ResultStore & store);
ResultStore store_from_json(const std::string & document);

/// Writes learning_curves.csv, heatmap.csv and farm_power.csv into `dir`
/// (created when missing). Returns the written paths.
std::vector<std::string> emit_reports(const ResultStore & store, const std::string & dir);

std::string render_learning_curves(const ResultStore & store);
std::string render_heatmap(const ResultStore & store);
std::string render_farm_power(const ResultStore & store);

} // namespace windctl
