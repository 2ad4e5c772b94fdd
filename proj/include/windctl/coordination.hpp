#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <windctl/farm_model.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

struct GraphParameters {
    Meters radius = 1000.0;
    double half_angle = 22.5; // degrees
};

/// Directed wake-dependency graph. parents(w) holds the upstream turbines
/// whose set-points influence w; scope(w) = {w} u parents(w), both sorted by
/// canonical index.
class CoordinationGraph {
public:
    CoordinationGraph() = default;
    explicit CoordinationGraph(std::vector<std::vector<std::size_t>> parents);

    std::size_t size() const { return parents_.size(); }
    const std::vector<std::size_t> & parents(std::size_t w) const { return parents_[w]; }
    const std::vector<std::size_t> & scope(std::size_t w) const { return scopes_[w]; }
    bool in_scope(std::size_t w, std::size_t v) const;
    std::size_t edge_count() const;

    friend bool operator==(const CoordinationGraph & a, const CoordinationGraph & b) {
        return a.parents_ == b.parents_;
    }

private:
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> scopes_;
};

/// w is a child of ref iff |ref -> w| <= radius and the angle between the
/// wind vector and ref -> w is <= half_angle. Both bounds are inclusive.
CoordinationGraph build_graph(const FarmLayout & farm, const WindCondition & wind,
                              const GraphParameters & params = {});

/// Undirected interaction graph: two turbines are adjacent when some scope
/// contains both.
std::vector<std::vector<std::size_t>> interaction_graph(const CoordinationGraph & graph);

/// Minimum-degree elimination order over the interaction graph. Among equal
/// degrees, vertices adjacent to already-eliminated ones come first, then
/// canonical order.
std::vector<std::size_t> elimination_order(const CoordinationGraph & graph);

/// Largest neighbourhood met while eliminating along `order` (the induced
/// width of the order).
std::size_t induced_width(const CoordinationGraph & graph, const std::vector<std::size_t> & order);

/// Decided turbines that still share a scope with an undecided one, after each
/// step of deciding turbines in `order`.
std::vector<std::vector<std::size_t>> forward_frontiers(const CoordinationGraph & graph,
                                                        const std::vector<std::size_t> & order);
std::size_t frontier_width(const CoordinationGraph & graph, const std::vector<std::size_t> & order);

/// "child,parent" per line with a header row.
std::string export_edge_list(const FarmLayout & farm, const CoordinationGraph & graph);

/// Largest relative change of a turbine's achieved power caused by changing
/// the set-point of a turbine outside its scope, over the given base
/// configurations and every alternative menu level.
struct LeakageReport {
    double max_relative = 0.0;
    std::size_t affected = 0;   // turbine whose power moved most
    std::size_t perturbed = 0;  // turbine whose set-point was changed
};
LeakageReport wake_leakage(const FarmLayout & farm, const WindCondition & wind, const SetPointMenu & menu,
                           const CoordinationGraph & graph, const WakeModel & model,
                           const std::vector<JointConfiguration> & bases);

} // namespace windctl
