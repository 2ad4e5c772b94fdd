#include <windctl/harness.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include <windctl/rng.hpp>
#include <windctl/table_io.hpp>

namespace windctl {

namespace {

using nlohmann::json;

// Stream tags for derive_seed; fixed forever so stored results stay valid.
constexpr std::uint64_t kTagRepetition = 0x726570;   // "rep"
constexpr std::uint64_t kTagSelection = 0x7269736b;  // "risk"
constexpr std::uint64_t kTagClustering = 0x676d6d;   // "gmm"
constexpr std::uint64_t kTagLoads = 0x6c6f616473;    // "loads"

std::vector<bool> risk_mask(const std::vector<std::size_t> & chosen, std::size_t n) {
    std::vector<bool> mask(n, false);
    for (auto w : chosen) mask[w] = true;
    return mask;
}

ObjectiveSpec objective_for(const ScenarioSpec & s, const ScenarioContext & ctx, const std::vector<std::size_t> & risk) {
    ObjectiveSpec spec;
    spec.demand = s.demand;
    spec.partition = ctx.partition;
    spec.penalty.high_risk = risk_mask(risk, ctx.farm.size());
    spec.epsilon = s.epsilon;
    return spec;
}

} // namespace

void ScenarioSpec::validate() const {
    if (!std::isfinite(direction_deg)) throw std::invalid_argument("wind direction must be finite");
    if (!(wind_speed > 0.0) || !std::isfinite(wind_speed)) throw std::invalid_argument("wind speed must be positive");
    if (!(demand >= 0.0) || !std::isfinite(demand)) throw std::invalid_argument("demand must be non-negative");
    if (iterations < 1) throw std::invalid_argument("iteration budget must be at least 1");
    if (repetitions < 1) throw std::invalid_argument("repetition count must be at least 1");
    if (!(prior_sigma > 0.0)) throw std::invalid_argument("prior sigma must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    if (!(observation_noise >= 0.0)) throw std::invalid_argument("observation noise must be non-negative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("solver epsilon must be positive");
    if (max_epsilon < epsilon) throw std::invalid_argument("max epsilon must not be below epsilon");
    if (max_states < 1) throw std::invalid_argument("max states must be positive");
    if (regime_count && *regime_count < 1) throw std::invalid_argument("regime count must be at least 1");
}

std::uint64_t cell_key(const ScenarioSpec & s) {
    const auto dir = static_cast<std::uint64_t>(std::llround(s.direction_deg * 1e6));
    const auto dem = static_cast<std::uint64_t>(std::llround(s.demand));
    return derive_seed(0, {dir, dem, s.high_risk_count});
}

std::uint64_t repetition_seed(const ScenarioSpec & s, std::size_t rep) {
    return derive_seed(s.master_seed, {kTagRepetition, cell_key(s), rep});
}

std::vector<std::size_t> draw_high_risk(const ScenarioSpec & s, std::size_t turbines, std::size_t rep) {
    if (s.high_risk_count > turbines)
        throw std::invalid_argument("high-risk count " + std::to_string(s.high_risk_count) + " exceeds turbine count " +
                                    std::to_string(turbines));
    std::uint64_t seed = s.selection_seed.value_or(derive_seed(s.master_seed, {kTagSelection, cell_key(s)}));
    if (s.redraw_high_risk) seed = derive_seed(seed, {rep});
    Rng rng(seed);
    std::vector<std::size_t> pool(turbines);
    std::iota(pool.begin(), pool.end(), 0);
    for (std::size_t i = 0; i < s.high_risk_count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(turbines - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(s.high_risk_count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<LoadRevolutionDistribution> scenario_loads(const ScenarioSpec & s, const FarmLayout & farm,
                                                       const SetPointMenu & menu, const WakeModel & model) {
    if (s.loads_path) return load_lrd(farm, read_text_file(*s.loads_path));
    return generate_synthetic_lrd(farm, WindCondition(s.dominant_direction_deg, s.wind_speed), menu, model,
                                  derive_seed(s.master_seed, {kTagLoads}));
}

RegimePartition build_partition(const ScenarioSpec & s, const FarmLayout & farm, const SetPointMenu & menu,
                                const WakeModel & model) {
    const WindCondition dominant(s.dominant_direction_deg, s.wind_speed);
    const auto flow = model.evaluate(farm, dominant, menu, JointConfiguration::uniform(farm.size(), menu.size() - 1));
    const auto clusters = cluster_regimes(flow.power, s.regime_count, derive_seed(s.master_seed, {kTagClustering}));

    const auto loads = scenario_loads(s, farm, menu, model);

    std::vector<double> damage(farm.size());
    for (std::size_t w = 0; w < farm.size(); ++w) damage[w] = turbine_damage(loads[w], farm[w].spec);

    FractionOptions fo;
    fo.mode = s.fraction_mode;
    fo.damage_floor = s.damage_floor;
    return demand_fractions(regimes_from_assignment(clusters.assignment), damage, fo);
}

ScenarioContext prepare_scenario(const ScenarioSpec & s, const FarmLayout & farm) {
    s.validate();
    ScenarioContext ctx{farm, SetPointMenu{}, WakeModel(s.wake), WindCondition(s.direction_deg, s.wind_speed), {}, {}, {}};
    ctx.graph = build_graph(ctx.farm, ctx.wind, s.graph);
    ctx.arms = ArmIndex(ctx.graph, ctx.menu.size());
    ctx.partition = build_partition(s, ctx.farm, ctx.menu, ctx.model);
    return ctx;
}

RunRecord run_spts(const ScenarioSpec & s, const ScenarioContext & ctx, std::size_t rep) {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t n = ctx.farm.size();

    RunRecord rec;
    rec.high_risk = draw_high_risk(s, n, rep);
    const auto spec = objective_for(s, ctx, rec.high_risk);
    DpOptions opt;
    opt.max_states = s.max_states;
    opt.local_search_fallback = true;

    Rng rng(repetition_seed(s, rep));
    auto beliefs = init_beliefs(ctx.farm, ctx.graph, ctx.menu, ctx.wind, s.prior_sigma, s.noise_sigma);
    std::vector<FlowResult> flows;
    flows.reserve(s.iterations);

    for (std::size_t t = 1; t <= s.iterations; ++t) {
        const auto sampled = beliefs.sample_all(rng);
        const auto solved = solve_dp_adaptive(ctx.graph, ctx.arms, sampled, spec, s.max_epsilon, opt);
        auto config = improve_locally(solved.configuration, ctx.arms, sampled, spec);
        auto flow = ctx.model.evaluate(ctx.farm, ctx.wind, ctx.menu, config);

        auto observed = flow.power;
        if (s.observation_noise > 0.0)
            for (auto & p : observed) p += rng.normal(0.0, s.observation_noise);
        beliefs.update(config, observed, t);

        IterationRecord it;
        it.score = score_powers(flow.power, spec);
        it.farm_power = flow.farm_total;
        it.farm_error = std::abs(flow.farm_total - s.demand);
        it.epsilon = solved.epsilon;
        it.executed = std::move(config);
        if (rec.iterations.empty() || it.score < rec.iterations[rec.best].score) rec.best = rec.iterations.size();
        rec.iterations.push_back(std::move(it));
        flows.push_back(std::move(flow));
    }

    rec.best_configuration = rec.iterations[rec.best].executed;
    rec.best_powers = flows[rec.best].power;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

RunRecord run_spts(const ScenarioSpec & s, const FarmLayout & farm, std::size_t rep) {
    return run_spts(s, prepare_scenario(s, farm), rep);
}

BaselineRecord run_baseline(const ScenarioSpec & s, const ScenarioContext & ctx) {
    BaselineRecord b;
    b.high_risk = draw_high_risk(s, ctx.farm.size(), 0);
    const auto spec = objective_for(s, ctx, b.high_risk);
    auto h = run_heuristic(ctx.farm, ctx.wind, ctx.menu, s.demand, spec.penalty, ctx.model);
    b.configuration = h.configuration;
    b.powers = h.flow.power;
    b.score = score_powers(h.flow.power, spec);
    b.farm_power = h.flow.farm_total;
    b.farm_error = std::abs(h.flow.farm_total - s.demand);
    b.trace = render_heuristic_trace(ctx.farm, ctx.menu, h.trace);
    return b;
}

// ---------------------------------------------------------------------------
// Grids

std::vector<ScenarioSpec> GridSpec::cells() const {
    std::vector<ScenarioSpec> out;
    for (double d : directions_deg)
        for (Watts p : demands)
            for (std::size_t k : high_risk_counts) {
                auto s = base;
                s.direction_deg = d;
                s.demand = p;
                s.high_risk_count = k;
                out.push_back(std::move(s));
            }
    return out;
}

FarmLayout GridSpec::farm() const {
    if (layout_path) return load_farm_file(*layout_path);
    return desk_farm ? windctl::desk_farm() : default_farm();
}

RepetitionSummary summarize(const RunRecord & run) {
    RepetitionSummary r;
    r.high_risk = run.high_risk;
    for (const auto & it : run.iterations) {
        r.error.push_back(it.score.error);
        r.penalty.push_back(it.score.penalty);
        r.farm_error.push_back(it.farm_error);
        if (it.epsilon == 0.0) ++r.fallbacks;
    }
    r.best = run.best;
    r.best_configuration = run.best_configuration;
    r.best_powers = run.best_powers;
    return r;
}

ResultStore run_grid(const GridSpec & grid, const FarmLayout & farm) {
    const auto specs = grid.cells();
    if (specs.empty()) throw std::invalid_argument("grid has no cells");

    ResultStore store{farm, SetPointMenu{}, {}};
    std::vector<std::optional<ScenarioContext>> contexts(specs.size());
    for (std::size_t c = 0; c < specs.size(); ++c) {
        CellResult cell;
        cell.scenario = specs[c];
        try {
            contexts[c] = prepare_scenario(specs[c], farm);
            cell.partition = contexts[c]->partition;
            cell.baseline = run_baseline(specs[c], *contexts[c]);
            cell.repetitions.resize(specs[c].repetitions);
        } catch (const std::exception & e) {
            cell.error = e.what();
            contexts[c].reset();
        }
        store.cells.push_back(std::move(cell));
    }

    struct Job {
        std::size_t cell, rep;
        std::string error;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < specs.size(); ++c)
        if (contexts[c])
            for (std::size_t r = 0; r < specs[c].repetitions; ++r) jobs.push_back({c, r, {}});

    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
            auto & job = jobs[j];
            try {
                store.cells[job.cell].repetitions[job.rep] =
                    summarize(run_spts(specs[job.cell], *contexts[job.cell], job.rep));
            } catch (const std::exception & e) {
                job.error = e.what();
            }
        }
    };
    std::size_t threads = grid.threads ? grid.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, std::max<std::size_t>(jobs.size(), 1));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    }

    // First failure in repetition order marks the cell.
    for (const auto & job : jobs) {
        auto & cell = store.cells[job.cell];
        if (!job.error.empty() && cell.ok()) {
            cell.error = "repetition " + std::to_string(job.rep) + ": " + job.error;
            cell.repetitions.clear();
        }
    }
    return store;
}

FarmLayout desk_farm() { return grid_farm(3, 3, 500.0, 400.0); }

GridSpec desk_grid() {
    GridSpec g;
    g.desk_farm = true;
    g.base.iterations = 100;
    g.base.repetitions = 10;
    // Same per-turbine demand as the 24-turbine grid.
    g.demands.clear();
    for (double d : {60e6, 70e6, 80e6, 90e6, 100e6}) g.demands.push_back(d * 9.0 / 24.0);
    return g;
}

// ---------------------------------------------------------------------------
// Configuration documents

namespace {

const char * fraction_mode_name(FractionMode m) { return m == FractionMode::inverse ? "inverse" : "complement"; }

FractionMode parse_fraction_mode(const std::string & s) {
    if (s == "inverse") return FractionMode::inverse;
    if (s == "complement") return FractionMode::complement;
    throw std::invalid_argument("unknown fraction mode '" + s + "' (expected inverse or complement)");
}

template <class T>
T get_as(const json & j, const std::string & key) {
    try {
        return j.get<T>();
    } catch (const json::exception &) {
        throw std::invalid_argument("config field '" + key + "' has the wrong type");
    }
}

// Scenario fields shared by grid configs and stored cells. Returns false when
// `key` is not one of them.
bool apply_scenario_field(ScenarioSpec & s, const std::string & key, const json & v) {
    if (key == "wind_speed_ms") s.wind_speed = get_as<double>(v, key);
    else if (key == "iterations") s.iterations = get_as<std::size_t>(v, key);
    else if (key == "repetitions") s.repetitions = get_as<std::size_t>(v, key);
    else if (key == "prior_sigma_w") s.prior_sigma = get_as<double>(v, key);
    else if (key == "noise_sigma_w") s.noise_sigma = get_as<double>(v, key);
    else if (key == "observation_noise_w") s.observation_noise = get_as<double>(v, key);
    else if (key == "epsilon_w") s.epsilon = get_as<double>(v, key);
    else if (key == "max_epsilon_w") s.max_epsilon = get_as<double>(v, key);
    else if (key == "max_states") s.max_states = get_as<std::size_t>(v, key);
    else if (key == "regimes") {
        if (v.is_string()) {
            if (v.get<std::string>() != "auto") throw std::invalid_argument("config field 'regimes' must be \"auto\" or a count");
            s.regime_count.reset();
        } else {
            s.regime_count = get_as<std::size_t>(v, key);
        }
    } else if (key == "fraction_mode") s.fraction_mode = parse_fraction_mode(get_as<std::string>(v, key));
    else if (key == "damage_floor") {
        if (v.is_null()) s.damage_floor.reset();
        else s.damage_floor = get_as<double>(v, key);
    } else if (key == "dominant_direction_deg") s.dominant_direction_deg = get_as<double>(v, key);
    else if (key == "loads") {
        if (v.is_null()) s.loads_path.reset();
        else s.loads_path = get_as<std::string>(v, key);
    } else if (key == "graph_radius_m") s.graph.radius = get_as<double>(v, key);
    else if (key == "graph_half_angle_deg") s.graph.half_angle = get_as<double>(v, key);
    else if (key == "wake_expansion") s.wake.expansion_k = get_as<double>(v, key);
    else if (key == "air_density") s.wake.air_density = get_as<double>(v, key);
    else if (key == "master_seed") s.master_seed = get_as<std::uint64_t>(v, key);
    else if (key == "selection_seed") {
        if (v.is_null()) s.selection_seed.reset();
        else s.selection_seed = get_as<std::uint64_t>(v, key);
    } else if (key == "redraw_high_risk") s.redraw_high_risk = get_as<bool>(v, key);
    else return false;
    return true;
}

json scenario_to_json(const ScenarioSpec & s) {
    json j;
    j["direction_deg"] = s.direction_deg;
    j["demand_w"] = s.demand;
    j["high_risk_count"] = s.high_risk_count;
    j["wind_speed_ms"] = s.wind_speed;
    j["iterations"] = s.iterations;
    j["repetitions"] = s.repetitions;
    j["prior_sigma_w"] = s.prior_sigma;
    j["noise_sigma_w"] = s.noise_sigma;
    j["observation_noise_w"] = s.observation_noise;
    j["epsilon_w"] = s.epsilon;
    j["max_epsilon_w"] = s.max_epsilon;
    j["max_states"] = s.max_states;
    j["regimes"] = s.regime_count ? json(*s.regime_count) : json("auto");
    j["fraction_mode"] = fraction_mode_name(s.fraction_mode);
    j["damage_floor"] = s.damage_floor ? json(*s.damage_floor) : json(nullptr);
    j["dominant_direction_deg"] = s.dominant_direction_deg;
    j["loads"] = s.loads_path ? json(*s.loads_path) : json(nullptr);
    j["graph_radius_m"] = s.graph.radius;
    j["graph_half_angle_deg"] = s.graph.half_angle;
    j["wake_expansion"] = s.wake.expansion_k;
    j["air_density"] = s.wake.air_density;
    j["master_seed"] = s.master_seed;
    j["selection_seed"] = s.selection_seed ? json(*s.selection_seed) : json(nullptr);
    j["redraw_high_risk"] = s.redraw_high_risk;
    return j;
}

ScenarioSpec scenario_from_json(const json & j) {
    ScenarioSpec s;
    for (const auto & [key, v] : j.items()) {
        if (key == "direction_deg") s.direction_deg = get_as<double>(v, key);
        else if (key == "demand_w") s.demand = get_as<double>(v, key);
        else if (key == "high_risk_count") s.high_risk_count = get_as<std::size_t>(v, key);
        else if (!apply_scenario_field(s, key, v)) throw std::invalid_argument("unknown scenario field '" + key + "'");
    }
    return s;
}

json parse_json(const std::string & document, const char * what) {
    try {
        return json::parse(document);
    } catch (const json::parse_error & e) {
        throw std::invalid_argument(std::string(what) + " is not valid JSON: " + e.what());
    }
}

} // namespace

GridSpec load_grid_config(const std::string & document) {
    const auto j = parse_json(document, "grid config");
    if (!j.is_object()) throw std::invalid_argument("grid config must be a JSON object");
    if (j.value("schema", std::string()) != "windctl.grid/1")
        throw std::invalid_argument("grid config schema must be \"windctl.grid/1\"");

    GridSpec g;
    if (auto it = j.find("preset"); it != j.end()) {
        const auto p = get_as<std::string>(*it, "preset");
        if (p == "desk") g = desk_grid();
        else if (p != "default") throw std::invalid_argument("unknown preset '" + p + "' (expected default or desk)");
    }
    for (const auto & [key, v] : j.items()) {
        if (key == "schema" || key == "preset") continue;
        if (key == "directions_deg") g.directions_deg = get_as<std::vector<double>>(v, key);
        else if (key == "demands_mw") {
            g.demands.clear();
            for (double d : get_as<std::vector<double>>(v, key)) g.demands.push_back(d * 1e6);
        } else if (key == "high_risk_counts") g.high_risk_counts = get_as<std::vector<std::size_t>>(v, key);
        else if (key == "layout") g.layout_path = get_as<std::string>(v, key);
        else if (key == "threads") g.threads = get_as<std::size_t>(v, key);
        else if (!apply_scenario_field(g.base, key, v)) throw std::invalid_argument("unknown grid config field '" + key + "'");
    }
    if (g.directions_deg.empty() || g.demands.empty() || g.high_risk_counts.empty())
        throw std::invalid_argument("grid config needs at least one direction, demand and high-risk count");
    return g;
}

GridSpec load_grid_config_file(const std::string & path) {
    auto g = load_grid_config(read_text_file(path));
    // Relative paths inside the config are relative to the config file.
    const auto base = std::filesystem::path(path).parent_path();
    const auto resolve = [&](std::optional<std::string> & p) {
        if (p && std::filesystem::path(*p).is_relative()) p = (base / *p).string();
    };
    resolve(g.layout_path);
    resolve(g.base.loads_path);
    return g;
}

// ---------------------------------------------------------------------------
// Store serialization

std::string store_to_json(const ResultStore & store) {
    json j;
    j["schema"] = "windctl.store/1";
    j["farm"] = json::parse(render_farm(store.farm));
    std::vector<double> menu;
    for (std::size_t i = 0; i < store.menu.size(); ++i) menu.push_back(store.menu[i]);
    j["menu_w"] = menu;
    j["cells"] = json::array();
    for (const auto & c : store.cells) {
        json cj;
        cj["scenario"] = scenario_to_json(c.scenario);
        cj["error"] = c.error;
        if (c.ok()) {
            cj["partition"] = {{"regimes", c.partition.regimes},
                               {"damage", c.partition.damage},
                               {"regime_damage", c.partition.regime_damage},
                               {"fractions", c.partition.fractions}};
            const auto & b = c.baseline;
            cj["baseline"] = {{"high_risk", b.high_risk},       {"configuration", b.configuration.levels},
                              {"powers_w", b.powers},           {"penalty", b.score.penalty},
                              {"error_w", b.score.error},       {"farm_power_w", b.farm_power},
                              {"farm_error_w", b.farm_error},   {"trace", b.trace}};
            cj["repetitions"] = json::array();
            for (const auto & r : c.repetitions)
                cj["repetitions"].push_back({{"high_risk", r.high_risk},
                                             {"error_w", r.error},
                                             {"penalty", r.penalty},
                                             {"farm_error_w", r.farm_error},
                                             {"fallbacks", r.fallbacks},
                                             {"best", r.best},
                                             {"best_configuration", r.best_configuration.levels},
                                             {"best_powers_w", r.best_powers}});
        }
        j["cells"].push_back(std::move(cj));
    }
    return j.dump() + "\n";
}

ResultStore store_from_json(const std::string & document) {
    const auto j = parse_json(document, "result store");
    if (!j.is_object() || j.value("schema", std::string()) != "windctl.store/1")
        throw std::invalid_argument("result store schema must be \"windctl.store/1\"");
    try {
        ResultStore store{load_farm(j.at("farm").dump()), SetPointMenu(j.at("menu_w").get<std::vector<double>>()), {}};
        for (const auto & cj : j.at("cells")) {
            CellResult c;
            c.scenario = scenario_from_json(cj.at("scenario"));
            c.error = cj.at("error").get<std::string>();
            if (c.ok()) {
                const auto & pj = cj.at("partition");
                c.partition.regimes = pj.at("regimes").get<std::vector<std::vector<std::size_t>>>();
                c.partition.damage = pj.at("damage").get<std::vector<double>>();
                c.partition.regime_damage = pj.at("regime_damage").get<std::vector<double>>();
                c.partition.fractions = pj.at("fractions").get<std::vector<double>>();
                c.partition.regime_of.assign(store.farm.size(), 0);
                for (std::size_t r = 0; r < c.partition.regimes.size(); ++r)
                    for (auto w : c.partition.regimes[r]) c.partition.regime_of.at(w) = r;

                const auto & bj = cj.at("baseline");
                auto & b = c.baseline;
                b.high_risk = bj.at("high_risk").get<std::vector<std::size_t>>();
                b.configuration.levels = bj.at("configuration").get<std::vector<std::size_t>>();
                b.powers = bj.at("powers_w").get<std::vector<double>>();
                b.score.penalty = bj.at("penalty").get<std::size_t>();
                b.score.error = bj.at("error_w").get<double>();
                b.farm_power = bj.at("farm_power_w").get<double>();
                b.farm_error = bj.at("farm_error_w").get<double>();
                b.trace = bj.at("trace").get<std::string>();
                for (const auto & rj : cj.at("repetitions")) {
                    RepetitionSummary r;
                    r.high_risk = rj.at("high_risk").get<std::vector<std::size_t>>();
                    r.error = rj.at("error_w").get<std::vector<double>>();
                    r.penalty = rj.at("penalty").get<std::vector<std::size_t>>();
                    r.farm_error = rj.at("farm_error_w").get<std::vector<double>>();
                    r.fallbacks = rj.at("fallbacks").get<std::size_t>();
                    r.best = rj.at("best").get<std::size_t>();
                    r.best_configuration.levels = rj.at("best_configuration").get<std::vector<std::size_t>>();
                    r.best_powers = rj.at("best_powers_w").get<std::vector<double>>();
                    c.repetitions.push_back(std::move(r));
                }
            }
            store.cells.push_back(std::move(c));
        }
        return store;
    } catch (const json::exception & e) {
        throw std::invalid_argument(std::string("malformed result store: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Reports

namespace {

struct Stats {
    double mean = 0.0, std = 0.0;
};

// Sample standard deviation; zero for a single value.
Stats stats(const std::vector<double> & v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

std::string ids_of(const FarmLayout & farm, const std::vector<std::size_t> & idx) {
    std::string out;
    for (auto w : idx) {
        if (!out.empty()) out += ' ';
        out += farm[w].id;
    }
    return out;
}

// Cell messages go into a CSV cell; keep them on one line without commas.
std::string one_cell(std::string s) {
    for (auto & ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

void cell_prefix(CsvWriter & csv, const ScenarioSpec & s) {
    csv.cell(s.direction_deg).cell(s.demand).cell(s.high_risk_count);
}

} // namespace

std::string render_learning_curves(const ResultStore & store) {
    CsvWriter csv("windctl.learning_curves/1",
                  {"direction_deg", "demand_w", "high_risk_count", "iteration", "error_mean_w", "error_std_w",
                   "penalty_mean", "penalty_std", "best_error_mean_w", "best_error_std_w", "best_penalty_mean",
                   "farm_error_mean_w"});
    for (const auto & c : store.cells) {
        if (!c.ok() || c.repetitions.empty()) continue;
        const std::size_t reps = c.repetitions.size();
        std::vector<Score> best(reps);
        for (std::size_t t = 0; t < c.scenario.iterations; ++t) {
            std::vector<double> err(reps), pen(reps), berr(reps), bpen(reps), ferr(reps);
            for (std::size_t r = 0; r < reps; ++r) {
                const auto & rep = c.repetitions[r];
                const Score now{rep.penalty.at(t), rep.error.at(t)};
                if (t == 0 || now < best[r]) best[r] = now;
                err[r] = now.error;
                pen[r] = static_cast<double>(now.penalty);
                berr[r] = best[r].error;
                bpen[r] = static_cast<double>(best[r].penalty);
                ferr[r] = rep.farm_error.at(t);
            }
            const auto e = stats(err), p = stats(pen), be = stats(berr), bp = stats(bpen), fe = stats(ferr);
            cell_prefix(csv, c.scenario);
            csv.cell(t + 1).cell(e.mean).cell(e.std).cell(p.mean).cell(p.std).cell(be.mean).cell(be.std).cell(bp.mean)
                .cell(fe.mean);
            csv.end_row();
        }
    }
    return csv.str();
}

std::string render_heatmap(const ResultStore & store) {
    CsvWriter csv("windctl.heatmap/1",
                  {"direction_deg", "demand_w", "high_risk_count", "status", "repetitions", "spts_error_mean_w",
                   "spts_error_std_w", "spts_penalty_mean", "baseline_error_w", "baseline_penalty", "error_diff_w",
                   "penalty_diff", "spts_farm_error_mean_w", "baseline_farm_error_w", "high_risk_policy",
                   "high_risk_ids", "solver_fallbacks", "message"});
    for (const auto & c : store.cells) {
        cell_prefix(csv, c.scenario);
        const char * policy = c.scenario.redraw_high_risk ? "per_repetition" : "per_cell";
        if (!c.ok()) {
            csv.cell("failed").cell(0);
            for (int i = 0; i < 9; ++i) csv.cell("");
            csv.cell(policy).cell("").cell(0).cell(one_cell(c.error));
            csv.end_row();
            continue;
        }
        std::vector<double> err, pen, ferr;
        std::size_t fallbacks = 0;
        for (const auto & r : c.repetitions) {
            fallbacks += r.fallbacks;
            err.push_back(r.error.at(r.best));
            pen.push_back(static_cast<double>(r.penalty.at(r.best)));
            ferr.push_back(r.farm_error.at(r.best));
        }
        const auto e = stats(err), p = stats(pen), f = stats(ferr);
        const auto & b = c.baseline;
        csv.cell("ok")
            .cell(c.repetitions.size())
            .cell(e.mean)
            .cell(e.std)
            .cell(p.mean)
            .cell(b.score.error)
            .cell(b.score.penalty)
            .cell(b.score.error - e.mean)
            .cell(static_cast<double>(b.score.penalty) - p.mean)
            .cell(f.mean)
            .cell(b.farm_error)
            .cell(policy)
            .cell(ids_of(store.farm, b.high_risk))
            .cell(fallbacks)
            .cell("");
        csv.end_row();
    }
    return csv.str();
}

std::string render_farm_power(const ResultStore & store) {
    CsvWriter csv("windctl.farm_power/1",
                  {"direction_deg", "demand_w", "high_risk_count", "turbine_id", "x_m", "y_m", "high_risk",
                   "spts_power_mean_w", "spts_power_std_w", "baseline_power_w"});
    for (const auto & c : store.cells) {
        if (!c.ok() || c.repetitions.empty()) continue;
        std::set<std::size_t> risky(c.baseline.high_risk.begin(), c.baseline.high_risk.end());
        for (std::size_t w = 0; w < store.farm.size(); ++w) {
            std::vector<double> p;
            for (const auto & r : c.repetitions) p.push_back(r.best_powers.at(w));
            const auto s = stats(p);
            cell_prefix(csv, c.scenario);
            csv.cell(store.farm[w].id)
                .cell(store.farm[w].x)
                .cell(store.farm[w].y)
                .cell(risky.count(w) ? 1 : 0)
                .cell(s.mean)
                .cell(s.std)
                .cell(c.baseline.powers.at(w));
            csv.end_row();
        }
    }
    return csv.str();
}

std::vector<std::string> emit_reports(const ResultStore & store, const std::string & dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
    const auto base = std::filesystem::path(dir);
    std::vector<std::string> paths{(base / "learning_curves.csv").string(), (base / "heatmap.csv").string(),
                                   (base / "farm_power.csv").string()};
    write_text_file(paths[0], render_learning_curves(store));
    write_text_file(paths[1], render_heatmap(store));
    write_text_file(paths[2], render_farm_power(store));
    return paths;
}

} // namespace windctl
