#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <windctl/solver.hpp>

#include "instances.hpp"

using namespace windctl;
using testing_support::random_instance;

namespace {

std::vector<std::vector<std::size_t>> singletons(std::size_t n) {
    std::vector<std::vector<std::size_t>> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = {i};
    return r;
}

ObjectiveSpec one_regime(std::size_t n, Watts demand) {
    ObjectiveSpec s;
    s.partition = single_regime(n);
    s.demand = demand;
    s.penalty.high_risk.assign(n, false);
    return s;
}

} // namespace

TEST_CASE("objective examples") {
    auto s = one_regime(2, 10e6);
    CHECK(score_powers({4e6, 6e6}, s) == Score{0, 0.0});

    ObjectiveSpec two;
    two.partition = demand_fractions(singletons(2), {0.75, 0.25});
    two.demand = 80e6;
    two.penalty.high_risk = {false, false};
    const auto sc = score_powers({20e6, 55e6}, two);
    CHECK(sc.penalty == 0);
    CHECK(sc.error == doctest::Approx(5e6).epsilon(1e-12));

    s.penalty.high_risk = {true, false};
    CHECK(score_powers({5.3e6, 4.7e6}, s).penalty == 1);
    CHECK(score_powers({5.2e6, 4.8e6}, s).penalty == 1); // threshold is inclusive
    CHECK(score_powers({5.1e6, 4.9e6}, s).penalty == 0);

    // Penalties dominate any error difference.
    CHECK(Score{0, 1e12} < Score{1, 0.0});
    CHECK(Score{1, 1.0} < Score{1, 2.0});
}

TEST_CASE("exhaustive examples") {
    const CoordinationGraph single(std::vector<std::vector<std::size_t>>(1));
    const ArmIndex arms(single, 3);
    auto s = one_regime(1, 6e6);
    const auto r = solve_exhaustive(single, arms, {1.4e6, 6.0e6, 7.9e6}, s);
    CHECK(r.configuration.levels == std::vector<std::size_t>{1});
    CHECK(r.score.error == 0.0);
    CHECK(r.optimality == Optimality::exact);

    // Every arm penalized: still returns the least penalized configuration.
    s.penalty.high_risk = {true};
    const auto p = solve_exhaustive(single, arms, {6e6, 7e6, 8e6}, s);
    CHECK(p.score.penalty == 1);
    CHECK(p.configuration.levels == std::vector<std::size_t>{0});

    // Two identical independent turbines: {0,2} and {2,0} tie; lexicographic order picks {0,2}.
    const CoordinationGraph pair(std::vector<std::vector<std::size_t>>(2));
    const ArmIndex arms2(pair, 3);
    const auto t = solve_exhaustive(pair, arms2, {1e6, 4e6, 9e6, 1e6, 4e6, 9e6}, one_regime(2, 10e6));
    CHECK(t.configuration.levels == std::vector<std::size_t>{0, 2});

    const CoordinationGraph big{std::vector<std::vector<std::size_t>>(15)};
    const ArmIndex arms15(big, 3);
    CHECK_THROWS_AS(solve_exhaustive(big, arms15, std::vector<Watts>(45, 1.0), one_regime(15, 1.0)), std::invalid_argument);
}

TEST_CASE("dp matches exhaustive on random instances") {
    Rng rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        const auto in = random_instance(rng, 6, 2, 1.0);
        const auto ex = solve_exhaustive(in.graph, in.arms, in.sampled, in.spec);
        const auto dp = solve_dp(in.graph, in.arms, in.sampled, in.spec);
        CHECK(dp.score.penalty == ex.score.penalty);
        CHECK(dp.score.error <= ex.score.error + dp.error_bound);
        CHECK(dp.error_bound == static_cast<double>(in.graph.size()) * 1.0);
    }
}

TEST_CASE("edgeless single regime reduces to subset sum") {
    Rng rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 12;
        const CoordinationGraph g{std::vector<std::vector<std::size_t>>(n)};
        const ArmIndex arms(g, 3);
        std::vector<Watts> sampled(arms.total());
        for (auto & s : sampled) s = std::round(8e6 * rng.uniform());
        auto spec = one_regime(n, 40e6 * rng.uniform());
        spec.epsilon = 1.0;
        const auto ex = solve_exhaustive(g, arms, sampled, spec);
        const auto dp = solve_dp(g, arms, sampled, spec);
        CHECK(dp.score.penalty == ex.score.penalty);
        CHECK(dp.score.error <= ex.score.error + 12.0);
    }
}

TEST_CASE("all-zero samples") {
    Rng rng(2);
    const auto in = random_instance(rng, 6);
    std::vector<Watts> zero(in.arms.total(), 0.0);
    const auto r = solve_dp(in.graph, in.arms, zero, in.spec);
    CHECK(r.score.error == doctest::Approx(in.spec.demand).epsilon(1e-12));
    CHECK(r.configuration.levels == std::vector<std::size_t>(in.graph.size(), 0));
}

TEST_CASE("penalty dominance") {
    Rng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        auto in = random_instance(rng, 8);
        // Level 0 is always safe, so a zero-penalty configuration exists.
        for (std::size_t w = 0; w < in.graph.size(); ++w)
            for (std::size_t a = in.arms.offset(w); a < in.arms.offset(w) + in.arms.arms_of(w); ++a)
                if (in.arms.decode(a).levels.back() == 0) in.sampled[a] = std::min(in.sampled[a], 5.0e6);
        in.spec.epsilon = 1e4;
        CHECK(solve_dp(in.graph, in.arms, in.sampled, in.spec).score.penalty == 0);
    }
}

TEST_CASE("monotone demand response") {
    Rng rng(10);
    for (int trial = 0; trial < 10; ++trial) {
        auto in = random_instance(rng, 7);
        in.spec.partition = single_regime(in.graph.size());
        in.spec.penalty.high_risk.assign(in.graph.size(), false);
        double prev = -1.0;
        for (double d = 0; d <= 60e6; d += 1e6) {
            in.spec.demand = d;
            const auto r = solve_dp(in.graph, in.arms, in.sampled, in.spec);
            double total = 0.0;
            for (std::size_t w = 0; w < in.graph.size(); ++w) total += in.sampled[in.arms.arm_of(w, r.configuration)];
            CHECK(total >= prev);
            prev = total;
        }
    }
}

TEST_CASE("determinism and tie-breaks") {
    Rng rng(12);
    const auto in = random_instance(rng, 9, 2, 1e4);
    const auto a = solve_dp(in.graph, in.arms, in.sampled, in.spec);
    const auto b = solve_dp(in.graph, in.arms, in.sampled, in.spec);
    CHECK(a.configuration == b.configuration);
    CHECK(a.layer_sizes == b.layer_sizes);

    // The DP breaks exact ties the same way as the exhaustive oracle.
    const CoordinationGraph pair(std::vector<std::vector<std::size_t>>(2));
    const ArmIndex arms2(pair, 3);
    auto s = one_regime(2, 10e6);
    const auto t = solve_dp(pair, arms2, {1e6, 4e6, 9e6, 1e6, 4e6, 9e6}, s);
    CHECK(t.configuration.levels == std::vector<std::size_t>{0, 2});
}

TEST_CASE("pruning does not change the answer") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = random_instance(rng, 8, 2, 1e3);
        DpOptions plain;
        plain.prune_with_incumbent = false;
        const auto a = solve_dp(in.graph, in.arms, in.sampled, in.spec);
        const auto b = solve_dp(in.graph, in.arms, in.sampled, in.spec, plain);
        CHECK(a.score.penalty == b.score.penalty);
        CHECK(a.score.error <= b.score.error + a.error_bound);
        CHECK(b.score.error <= a.score.error + a.error_bound);
    }
}

TEST_CASE("state limit, widening and fallback") {
    Rng rng(8);
    const auto in = random_instance(rng, 10, 2, 1.0);
    DpOptions tiny;
    tiny.max_states = 2;
    tiny.prune_with_incumbent = false;
    if (in.graph.size() > 2) {
        CHECK_THROWS_AS(solve_dp(in.graph, in.arms, in.sampled, in.spec, tiny), StateLimitExceeded);
        CHECK_THROWS_AS(solve_dp_adaptive(in.graph, in.arms, in.sampled, in.spec, 4.0, tiny), StateLimitExceeded);
        tiny.local_search_fallback = true;
        const auto fb = solve_dp_adaptive(in.graph, in.arms, in.sampled, in.spec, 4.0, tiny);
        CHECK(fb.epsilon == 0.0);
        CHECK(std::isinf(fb.error_bound));
        CHECK(fb.optimality == Optimality::approximate);
    }
    DpOptions roomy;
    const auto w = solve_dp_adaptive(in.graph, in.arms, in.sampled, in.spec, 1e6, roomy);
    CHECK(w.epsilon == 1.0);

    DpOptions narrow;
    narrow.max_frontier = 0;
    const CoordinationGraph chain({{}, {0}});
    const ArmIndex arms(chain, 3);
    CHECK_THROWS_AS(solve_dp(chain, arms, std::vector<Watts>(arms.total(), 1.0), one_regime(2, 1.0), narrow),
                    std::invalid_argument);
}

TEST_CASE("local improvement never worsens the score") {
    Rng rng(13);
    for (int trial = 0; trial < 50; ++trial) {
        const auto in = random_instance(rng, 10);
        JointConfiguration start;
        for (std::size_t w = 0; w < in.graph.size(); ++w) start.levels.push_back(rng.below(3));
        const auto better = improve_locally(start, in.arms, in.sampled, in.spec);
        CHECK(!(objective(start, in.arms, in.sampled, in.spec) < objective(better, in.arms, in.sampled, in.spec)));
    }
}

TEST_CASE("solver trace and validation") {
    Rng rng(1);
    const auto in = random_instance(rng, 5);
    const auto r = solve_dp(in.graph, in.arms, in.sampled, in.spec);
    const auto text = render_solver_trace(r);
    CHECK(text.rfind("# schema: windctl.solver_trace/1\nstep,states\n", 0) == 0);

    auto bad = in.spec;
    bad.epsilon = 0.0;
    CHECK_THROWS_AS(solve_dp(in.graph, in.arms, in.sampled, bad), std::invalid_argument);
    CHECK_THROWS_AS(solve_dp(in.graph, in.arms, std::vector<Watts>(1, 0.0), in.spec), std::invalid_argument);
}
