// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any fails. Pass criterion numbers as arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <string>

#include <windctl/harness.hpp>
#include <windctl/table_io.hpp>

#include "instances.hpp"
#include "oracles.hpp"

using namespace windctl;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Records the first violation and keeps counting.
struct Tally {
    std::size_t checks = 0, failures = 0;
    std::string first;

    void check(bool ok, const std::string & what) {
        ++checks;
        if (ok) return;
        if (!failures) first = what;
        ++failures;
    }
    Outcome outcome(const std::string & summary) const {
        if (!failures) return {true, summary + " (" + std::to_string(checks) + " checks)"};
        return {false, std::to_string(failures) + "/" + std::to_string(checks) + " checks failed; first: " + first};
    }
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string cell_name(const ScenarioSpec & s) {
    return fmt(s.direction_deg) + "deg/" + fmt(s.demand / 1e6) + "MW/" + std::to_string(s.high_risk_count) + "risk";
}

// The full default grid at 20 repetitions and T = 200, shared by criteria 1 and 4.
const ResultStore & default_grid_store() {
    static const ResultStore store = [] {
        GridSpec g;
        g.base.repetitions = 20;
        g.base.iterations = 200;
        return run_grid(g, g.farm());
    }();
    return store;
}

Outcome zero_penalty() {
    const auto & store = default_grid_store();
    Tally t;
    for (const auto & c : store.cells) {
        t.check(c.ok(), cell_name(c.scenario) + " failed: " + c.error);
        for (std::size_t r = 0; r < c.repetitions.size(); ++r) {
            const auto & rep = c.repetitions[r];
            t.check(rep.penalty[rep.best] == 0, cell_name(c.scenario) + " rep " + std::to_string(r) + " best has penalty " +
                                                    std::to_string(rep.penalty[rep.best]));
        }
    }
    return t.outcome(std::to_string(store.cells.size()) + " cells x 20 repetitions, no penalized best configuration");
}

Outcome solver_oracle() {
    Rng rng(20240601);
    Tally t;
    for (int i = 0; i < 200; ++i) {
        const auto in = testing_support::random_instance(rng, 10, 2, 1.0);
        const auto ex = solve_exhaustive(in.graph, in.arms, in.sampled, in.spec);
        const auto dp = solve_dp(in.graph, in.arms, in.sampled, in.spec);
        const double bound = static_cast<double>(in.graph.size()) * 1.0;
        t.check(dp.score.penalty == ex.score.penalty, "instance " + std::to_string(i) + " penalty differs");
        t.check(std::abs(dp.score.error - ex.score.error) <= bound,
                "instance " + std::to_string(i) + " error " + fmt(dp.score.error) + " vs " + fmt(ex.score.error));
    }
    return t.outcome("200 random instances, penalty exact, error within |W| W");
}

Outcome convergence() {
    ScenarioSpec s;
    s.direction_deg = 0;
    s.demand = 80e6;
    s.high_risk_count = 3;
    s.iterations = 400;
    const auto ctx = prepare_scenario(s, default_farm());
    double at200 = 0, at400 = 0;
    const std::size_t reps = 20;
    for (std::size_t r = 0; r < reps; ++r) {
        const auto run = run_spts(s, ctx, r);
        Score best = run.iterations[0].score;
        for (std::size_t i = 0; i < run.iterations.size(); ++i) {
            if (run.iterations[i].score < best) best = run.iterations[i].score;
            if (i == 199) at200 += best.error / reps;
        }
        at400 += best.error / reps;
    }
    const bool ok = std::abs(at200 - at400) <= 0.05 * at400;
    return {ok, "mean best error at 200 = " + fmt(at200) + " W, at 400 = " + fmt(at400) + " W"};
}

Outcome competitiveness() {
    const auto & store = default_grid_store();
    Tally t;
    std::string worst;
    double margin = -INFINITY;
    for (const auto & c : store.cells) {
        if (c.scenario.demand != 80e6) continue;
        t.check(c.ok(), cell_name(c.scenario) + " failed");
        if (!c.ok()) continue;
        double err = 0, pen = 0;
        for (const auto & rep : c.repetitions) {
            err += rep.error[rep.best];
            pen += static_cast<double>(rep.penalty[rep.best]);
        }
        err /= static_cast<double>(c.repetitions.size());
        pen /= static_cast<double>(c.repetitions.size());
        const auto & base = c.baseline.score;
        t.check(err <= base.error, cell_name(c.scenario) + " SPTS error " + fmt(err) + " > heuristic " + fmt(base.error));
        if (c.scenario.high_risk_count >= 2)
            t.check(static_cast<double>(base.penalty) >= pen,
                    cell_name(c.scenario) + " heuristic penalty " + std::to_string(base.penalty) + " < SPTS " + fmt(pen));
        if (err - base.error > margin) margin = err - base.error, worst = cell_name(c.scenario);
    }
    return t.outcome("80 MW cells; closest cell " + worst + " with SPTS minus heuristic error " + fmt(margin) + " W");
}

Outcome heuristic_determinism() {
    const GridSpec g;
    const auto farm = g.farm();
    Tally t;
    for (const auto & s : g.cells()) {
        const auto ctx = prepare_scenario(s, farm);
        const auto first = run_baseline(s, ctx).trace;
        for (int i = 1; i < 10; ++i) t.check(run_baseline(s, ctx).trace == first, cell_name(s) + " trace differs");
    }
    return t.outcome("40 cells x 10 runs, identical traces");
}

Outcome conjugate_update() {
    Rng rng(606);
    const CoordinationGraph single(std::vector<std::vector<std::size_t>>(1));
    const ArmIndex index(single, 3);
    Tally t;
    for (int i = 0; i < 50; ++i) {
        const double mu = 8e6 * rng.uniform();
        const double sigma = 1e4 + 2e6 * rng.uniform();
        const double noise = 1e2 + 1e5 * rng.uniform();
        BeliefState b(index, {mu, mu, mu}, sigma, noise);
        std::vector<double> ys;
        const auto n = 1 + rng.below(20);
        const double truth = mu + sigma * rng.normal();
        for (std::size_t k = 0; k < n; ++k) {
            ys.push_back(truth + noise * rng.normal());
            b.observe({k + 1, 1, ys.back()});
        }
        const auto [m, v] = oracle::posterior_by_quadrature(mu, sigma, noise, ys);
        const auto p = b.posterior(1);
        t.check(std::abs(p.mean - m) <= 1e-9 * std::abs(m), "case " + std::to_string(i) + " mean " + fmt(p.mean) + " vs " + fmt(m));
        t.check(std::abs(p.variance - v) <= 1e-9 * v, "case " + std::to_string(i) + " variance " + fmt(p.variance) + " vs " + fmt(v));
    }
    return t.outcome("50 random cases against quadrature at 1e-9 relative");
}

Outcome wake_invariants() {
    Rng rng(7070);
    const SetPointMenu menu;
    const WakeModel model;
    Tally t;
    const int cases = 600;
    for (int trial = 0; trial < cases; ++trial) {
        const auto n = 1 + rng.below(8);
        std::vector<Turbine> ts;
        for (std::size_t i = 0; i < n; ++i)
            ts.push_back({"W" + std::to_string(i), 2000.0 * rng.uniform(), 2000.0 * rng.uniform(), default_turbine_spec()});
        const FarmLayout farm(ts);
        const WindCondition wind(360.0 * rng.uniform(), 4.0 + 16.0 * rng.uniform());
        JointConfiguration cfg;
        for (std::size_t i = 0; i < n; ++i) cfg.levels.push_back(rng.below(menu.size()));
        const auto flow = model.evaluate(farm, wind, menu, cfg);
        const auto tag = "case " + std::to_string(trial);

        double sum = 0;
        for (std::size_t w = 0; w < n; ++w) {
            t.check(flow.effective_speed[w] <= wind.speed, tag + " waked speed above freestream");
            t.check(flow.power[w] <= menu[cfg[w]], tag + " power above set-point");
            sum += flow.power[w];
        }
        t.check(flow.farm_total == sum, tag + " farm total is not the turbine sum");

        const auto rot = model.evaluate(farm.rotated(-wind.direction), WindCondition(0.0, wind.speed), menu, cfg);
        for (std::size_t w = 0; w < n; ++w)
            t.check(std::abs(rot.power[w] - flow.power[w]) <= 1e-9 * std::max(1.0, flow.power[w]) &&
                        std::abs(rot.effective_speed[w] - flow.effective_speed[w]) <= 1e-9 * wind.speed,
                    tag + " not rotation equivariant");

        const auto v = static_cast<std::size_t>(rng.below(n));
        if (cfg[v] + 1 < menu.size()) {
            auto up = cfg;
            ++up.levels[v];
            const auto raised = model.evaluate(farm, wind, menu, up);
            t.check(raised.power[v] >= flow.power[v], tag + " raised turbine lost power");
            bool slowed = false;
            for (std::size_t w = 0; w < n; ++w) slowed = slowed || (w != v && raised.effective_speed[w] < flow.effective_speed[w]);
            for (std::size_t w = 0; w < n; ++w)
                if (w != v)
                    t.check(raised.effective_speed[w] <= flow.effective_speed[w] + 1e-12,
                            tag + " derating not monotone: raising " + farm[v].id + " speeds " + farm[w].id + " up by " +
                                fmt(raised.effective_speed[w] - flow.effective_speed[w]) + " m/s" +
                                (slowed ? " through a slowed intermediate turbine" : ""));
        }

        const double a = rng.uniform() / 3.0;
        const double d = single_wake_deficit(a, 82.0, 1.0 + 3000.0 * rng.uniform(), 500.0 * rng.uniform(), 0.05);
        t.check(d >= 0.0, tag + " negative deficit");
    }
    return t.outcome(std::to_string(cases) + " randomized cases");
}

Outcome power_curve_anchors() {
    const auto spec = default_turbine_spec();
    const bool ok = available_power(spec, 6.5) == 1.49e6 && available_power(spec, 10.0) == 6.42e6 &&
                    available_power(spec, 13.5) == 8.0e6;
    return {ok, "P(6.5) = " + fmt(available_power(spec, 6.5)) + ", P(10) = " + fmt(available_power(spec, 10.0)) +
                    ", P(13.5) = " + fmt(available_power(spec, 13.5))};
}

Outcome fraction_properties() {
    Rng rng(909);
    Tally t;
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = 1 + rng.below(8);
        std::vector<std::vector<std::size_t>> regimes(n);
        for (std::size_t i = 0; i < n; ++i) regimes[i] = {i};
        std::vector<double> d(n);
        for (auto & x : d) x = 1e-3 + 1e6 * rng.uniform();
        const auto p = demand_fractions(regimes, d);
        const auto tag = "vector " + std::to_string(trial);
        t.check(std::abs(std::accumulate(p.fractions.begin(), p.fractions.end(), 0.0) - 1.0) <= 1e-12, tag + " sum");
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i] < d[j]) t.check(p.fractions[i] > p.fractions[j], tag + " ordering");
        const double scale = std::exp(10 * rng.normal());
        auto scaled = d;
        for (auto & x : scaled) x *= scale;
        const auto q = demand_fractions(regimes, scaled);
        for (std::size_t i = 0; i < n; ++i) t.check(std::abs(q.fractions[i] - p.fractions[i]) <= 1e-12, tag + " scale");
    }
    return t.outcome("200 random damage vectors");
}

Outcome end_to_end_reproducibility() {
    const auto root = std::filesystem::temp_directory_path() / "windctl_acceptance_repro";
    std::filesystem::remove_all(root);
    std::vector<std::vector<std::string>> files;
    for (int i = 0; i < 2; ++i) {
        const auto g = desk_grid();
        const auto store = run_grid(g, g.farm());
        files.push_back(emit_reports(store, (root / std::to_string(i)).string()));
    }
    Tally t;
    for (std::size_t k = 0; k < files[0].size(); ++k)
        t.check(read_text_file(files[0][k]) == read_text_file(files[1][k]),
                std::filesystem::path(files[0][k]).filename().string() + " differs");
    std::filesystem::remove_all(root);
    return t.outcome("two desk grid runs, " + std::to_string(files[0].size()) + " report files identical");
}

} // namespace

int main(int argc, char ** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"zero-penalty best configurations on the default grid", zero_penalty},
        {"solver matches exhaustive search", solver_oracle},
        {"best-so-far error converges by iteration 200", convergence},
        {"SPTS competitive with the heuristic at 80 MW", competitiveness},
        {"heuristic traces are deterministic", heuristic_determinism},
        {"conjugate update matches numerical integration", conjugate_update},
        {"wake model invariants", wake_invariants},
        {"power curve anchors", power_curve_anchors},
        {"demand fraction properties", fraction_properties},
        {"desk grid reports are reproducible", end_to_end_reproducibility},
    };
    std::set<std::size_t> only;
    for (int i = 1; i < argc; ++i) only.insert(std::stoul(argv[i]));

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!only.empty() && !only.count(i + 1)) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception & e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %zu: %s: %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += !o.pass;
    }
    return failed ? 1 : 0;
}
