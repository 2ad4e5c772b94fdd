#pragma once

#include <compare>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <windctl/bandit.hpp>
#include <windctl/coordination.hpp>
#include <windctl/regimes.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

struct PenaltyRule {
    std::vector<bool> high_risk;       // per turbine
    Watts threshold = 5.2e6;

    bool penalized(std::size_t w, Watts power) const { return w < high_risk.size() && high_risk[w] && power >= threshold; }
};

struct ObjectiveSpec {
    Watts demand = 0.0;
    RegimePartition partition;
    PenaltyRule penalty;
    Watts epsilon = 1.0e4;  // quantization bin width, solver only

    void validate(std::size_t turbines) const;
    Watts target(std::size_t regime) const { return partition.fractions[regime] * demand; }
};

/// Lexicographic score: penalty count first, demand error second. This is
/// how an infinite penalty compares.
struct Score {
    std::size_t penalty = 0;
    double error = 0.0;

    friend bool operator==(const Score &, const Score &) = default;
    friend std::partial_ordering operator<=>(const Score & a, const Score & b) {
        if (auto c = a.penalty <=> b.penalty; c != 0) return c;
        return a.error <=> b.error;
    }
};

enum class Optimality { exact, approximate };

struct SolveResult {
    JointConfiguration configuration;
    Score score;                  // on the (unquantized) sampled powers
    Optimality optimality = Optimality::exact;
    double error_bound = 0.0;     // |W| * epsilon for the DP, 0 when exact
    Watts epsilon = 0.0;
    std::vector<std::size_t> layer_sizes; // DP states per elimination step
};

/// Regime errors and penalties of `config` under per-arm powers.
/// Throws std::invalid_argument when an arm is missing.
Score objective(const JointConfiguration & config, const ArmIndex & arms, const std::vector<Watts> & sampled,
                const ObjectiveSpec & spec);

/// Same objective with one power per turbine (e.g. simulated powers).
Score score_powers(const std::vector<Watts> & powers, const ObjectiveSpec & spec);

class StateLimitExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DpOptions {
    std::size_t max_frontier = 12;
    std::size_t max_states = 400000;   // per elimination step
    bool prune_with_incumbent = true;
    /// solve_dp_adaptive only: once epsilon cannot grow further, return the
    /// local-search optimum (approximate, unbounded error) instead of throwing.
    bool local_search_fallback = false;
};

/// Enumerates every configuration; ties resolve to the lexicographically
/// smallest configuration. Refuses when |menu|^|W| > 1e7.
SolveResult solve_exhaustive(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                             const ObjectiveSpec & spec);

/// Dynamic program along the coordination elimination order. States carry the
/// frontier assignment and per-regime sums in epsilon-wide bins; penalties are
/// exact. The returned demand error is within |W| * epsilon of optimal.
SolveResult solve_dp(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                     const ObjectiveSpec & spec, const DpOptions & opt = {});

/// solve_dp, doubling epsilon on StateLimitExceeded up to `max_epsilon`.
/// A fallback result has epsilon = 0 and an infinite error bound.
SolveResult solve_dp_adaptive(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                              const ObjectiveSpec & spec, Watts max_epsilon, const DpOptions & opt = {});

/// Single-turbine moves accepted only when they strictly improve the score.
JointConfiguration improve_locally(JointConfiguration config, const ArmIndex & arms, const std::vector<Watts> & sampled,
                                   const ObjectiveSpec & spec);

/// step,states: per-elimination-step DP state counts.
std::string render_solver_trace(const SolveResult & result);

} // namespace windctl
