#include <windctl/baseline.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <windctl/table_io.hpp>

namespace windctl {

HeuristicResult run_heuristic(const FarmLayout & farm, const WindCondition & wind, const SetPointMenu & menu,
                              Watts demand, const PenaltyRule & penalty, const WakeModel & model) {
    if (!(demand >= 0.0) || !std::isfinite(demand)) throw std::invalid_argument("demand must be non-negative");
    const std::size_t n = farm.size();
    const std::size_t top = menu.size() - 1;

    // Most downstream first; canonical order among equals.
    const auto frame = wind_frame(farm, wind);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frame.along[a] > frame.along[b]; });

    HeuristicResult out;
    std::vector<FlowResult> flows;
    const auto visit = [&](const JointConfiguration & cfg, std::size_t changed) {
        auto flow = model.evaluate(farm, wind, menu, cfg);
        HeuristicCandidate c;
        c.configuration = cfg;
        c.changed = changed;
        c.farm_power = flow.farm_total;
        for (std::size_t w = 0; w < n; ++w)
            if (penalty.penalized(w, flow.power[w])) ++c.penalty;
        c.error = std::abs(flow.farm_total - demand);
        out.trace.candidates.push_back(std::move(c));
        flows.push_back(std::move(flow));
        return out.trace.candidates.back().farm_power;
    };

    auto cfg = JointConfiguration::uniform(n, 0);
    double power = visit(cfg, n);
    if (top > 0) {
        for (auto t : order) {
            if (power >= demand) break;
            cfg.levels[t] = top;
            power = visit(cfg, t);
            if (power >= demand) {
                for (std::size_t l = 1; l < top; ++l) {
                    auto mid = cfg;
                    mid.levels[t] = l;
                    visit(mid, t);
                }
                break;
            }
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < out.trace.candidates.size(); ++i) {
        const auto & c = out.trace.candidates[i];
        const auto & b = out.trace.candidates[best];
        if (c.penalty < b.penalty || (c.penalty == b.penalty && c.error < b.error)) best = i;
    }
    out.trace.selected = best;
    out.configuration = out.trace.candidates[best].configuration;
    out.flow = flows[best];
    return out;
}

std::string render_heuristic_trace(const FarmLayout & farm, const SetPointMenu & menu, const HeuristicTrace & trace) {
    CsvWriter csv("windctl.heuristic_trace/1",
                  {"candidate", "changed_turbine", "changed_setpoint_w", "farm_power_w", "penalty", "error_w", "selected"});
    for (std::size_t i = 0; i < trace.candidates.size(); ++i) {
        const auto & c = trace.candidates[i];
        const bool start = c.changed >= farm.size();
        csv.cell(i)
            .cell(start ? std::string("-") : farm[c.changed].id)
            .cell(start ? 0.0 : menu[c.configuration[c.changed]])
            .cell(c.farm_power)
            .cell(c.penalty)
            .cell(c.error)
            .cell(i == trace.selected ? 1 : 0);
        csv.end_row();
    }
    return csv.str();
}

} // namespace windctl
