#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <windctl/farm_model.hpp>
#include <windctl/solver.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

struct HeuristicCandidate {
    JointConfiguration configuration;
    std::size_t changed = 0;   // turbine raised to reach this candidate (== size() for the start)
    Watts farm_power = 0.0;
    std::size_t penalty = 0;
    Watts error = 0.0;         // |farm power - demand|
};

struct HeuristicTrace {
    std::vector<HeuristicCandidate> candidates;
    std::size_t selected = 0;
};

struct HeuristicResult {
    JointConfiguration configuration;
    FlowResult flow;
    HeuristicTrace trace;
};

/// Back-to-front set-point allocation: from all-minimum set-points, raise
/// turbines to the maximum level starting with the most downstream one,
/// simulating after each raise; the first raise that reaches the demand also
/// tries every intermediate level. The candidate with the lowest
/// (penalty, |power - demand|) wins, earliest on ties. Regimes are ignored.
HeuristicResult run_heuristic(const FarmLayout & farm, const WindCondition & wind, const SetPointMenu & menu,
                              Watts demand, const PenaltyRule & penalty, const WakeModel & model);

std::string render_heuristic_trace(const FarmLayout & farm, const SetPointMenu & menu, const HeuristicTrace & trace);

} // namespace windctl
