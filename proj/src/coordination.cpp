#include <windctl/coordination.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace windctl {

CoordinationGraph::CoordinationGraph(std::vector<std::vector<std::size_t>> parents) :
        parents_(std::move(parents))
{
    const std::size_t n = parents_.size();
    scopes_.resize(n);
    for (std::size_t w = 0; w < n; ++w) {
        auto & p = parents_[w];
        std::sort(p.begin(), p.end());
        p.erase(std::unique(p.begin(), p.end()), p.end());
        for (auto v : p)
            if (v >= n || v == w)
                throw std::invalid_argument("invalid parent index in coordination graph");
        scopes_[w] = p;
        scopes_[w].insert(std::lower_bound(scopes_[w].begin(), scopes_[w].end(), w), w);
    }
}

bool CoordinationGraph::in_scope(std::size_t w, std::size_t v) const {
    return std::binary_search(scopes_[w].begin(), scopes_[w].end(), v);
}

std::size_t CoordinationGraph::edge_count() const {
    std::size_t e = 0;
    for (const auto & p : parents_) e += p.size();
    return e;
}

CoordinationGraph build_graph(const FarmLayout & farm, const WindCondition & wind, const GraphParameters & params) {
    if (!(params.radius > 0.0))
        throw std::invalid_argument("graph radius must be positive");
    if (!(params.half_angle > 0.0 && params.half_angle < 90.0))
        throw std::invalid_argument("graph half-angle must lie in (0, 90) degrees");

    const auto [ux, uy] = wind.unit();
    const double cos_limit = std::cos(params.half_angle * std::numbers::pi / 180.0);
    // Relative slack so that pairs exactly on the boundary stay edges.
    constexpr double slack = 1e-12;

    std::vector<std::vector<std::size_t>> parents(farm.size());
    for (std::size_t ref = 0; ref < farm.size(); ++ref) {
        for (std::size_t w = 0; w < farm.size(); ++w) {
            if (w == ref) continue;
            const double dx = farm[w].x - farm[ref].x;
            const double dy = farm[w].y - farm[ref].y;
            const double dist = std::hypot(dx, dy);
            if (dist > params.radius * (1.0 + slack)) continue;
            const double cos_angle = (dx * ux + dy * uy) / dist;
            if (cos_angle < cos_limit - slack) continue;
            parents[w].push_back(ref);
        }
    }
    return CoordinationGraph(std::move(parents));
}

std::vector<std::vector<std::size_t>> interaction_graph(const CoordinationGraph & graph) {
    std::vector<std::set<std::size_t>> adj(graph.size());
    for (std::size_t w = 0; w < graph.size(); ++w) {
        const auto & s = graph.scope(w);
        for (auto a : s)
            for (auto b : s)
                if (a != b) adj[a].insert(b);
    }
    std::vector<std::vector<std::size_t>> out(graph.size());
    for (std::size_t i = 0; i < adj.size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
    return out;
}

std::vector<std::size_t> elimination_order(const CoordinationGraph & graph) {
    const std::size_t n = graph.size();
    const auto base = interaction_graph(graph);
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) adj[i].insert(base[i].begin(), base[i].end());

    std::vector<bool> gone(n, false);
    std::vector<std::size_t> touched(n, 0); // eliminated neighbours in the original graph
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::size_t best = n;
        for (std::size_t v = 0; v < n; ++v) {
            if (gone[v]) continue;
            if (best == n || adj[v].size() < adj[best].size() ||
                (adj[v].size() == adj[best].size() && touched[v] > touched[best]))
                best = v;
        }
        order.push_back(best);
        gone[best] = true;
        for (auto u : base[best]) ++touched[u];
        // Fill-in among remaining neighbours.
        const std::vector<std::size_t> nb(adj[best].begin(), adj[best].end());
        for (auto a : nb) {
            adj[a].erase(best);
            for (auto b : nb)
                if (a != b) adj[a].insert(b);
        }
        adj[best].clear();
    }
    return order;
}

std::size_t induced_width(const CoordinationGraph & graph, const std::vector<std::size_t> & order) {
    const std::size_t n = graph.size();
    const auto base = interaction_graph(graph);
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t i = 0; i < n; ++i) adj[i].insert(base[i].begin(), base[i].end());
    std::size_t width = 0;
    for (auto v : order) {
        width = std::max(width, adj[v].size());
        const std::vector<std::size_t> nb(adj[v].begin(), adj[v].end());
        for (auto a : nb) {
            adj[a].erase(v);
            for (auto b : nb)
                if (a != b) adj[a].insert(b);
        }
        adj[v].clear();
    }
    return width;
}

std::vector<std::vector<std::size_t>> forward_frontiers(const CoordinationGraph & graph,
                                                        const std::vector<std::size_t> & order) {
    const std::size_t n = graph.size();
    std::vector<std::size_t> position(n, n);
    for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;
    // last_needed[v]: step after which v no longer shares a scope with an
    // undecided turbine.
    std::vector<std::size_t> last_needed(n, 0);
    for (std::size_t w = 0; w < n; ++w) {
        std::size_t complete = 0;
        for (auto v : graph.scope(w)) complete = std::max(complete, position[v]);
        for (auto v : graph.scope(w)) last_needed[v] = std::max(last_needed[v], complete);
    }
    std::vector<std::vector<std::size_t>> out(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        for (std::size_t j = 0; j <= k; ++j)
            if (last_needed[order[j]] > k) out[k].push_back(order[j]);
    return out;
}

std::size_t frontier_width(const CoordinationGraph & graph, const std::vector<std::size_t> & order) {
    std::size_t w = 0;
    for (const auto & f : forward_frontiers(graph, order)) w = std::max(w, f.size());
    return w;
}

std::string export_edge_list(const FarmLayout & farm, const CoordinationGraph & graph) {
    std::ostringstream os;
    os << "# schema: windctl.graph/1\n";
    os << "child,parent\n";
    for (std::size_t w = 0; w < graph.size(); ++w)
        for (auto p : graph.parents(w))
            os << farm[w].id << ',' << farm[p].id << '\n';
    return os.str();
}

LeakageReport wake_leakage(const FarmLayout & farm, const WindCondition & wind, const SetPointMenu & menu,
                           const CoordinationGraph & graph, const WakeModel & model,
                           const std::vector<JointConfiguration> & bases) {
    LeakageReport rep;
    for (const auto & base : bases) {
        const auto ref = model.evaluate(farm, wind, menu, base);
        for (std::size_t v = 0; v < farm.size(); ++v) {
            for (std::size_t level = 0; level < menu.size(); ++level) {
                if (level == base[v]) continue;
                auto cfg = base;
                cfg.levels[v] = level;
                const auto flow = model.evaluate(farm, wind, menu, cfg);
                for (std::size_t w = 0; w < farm.size(); ++w) {
                    if (graph.in_scope(w, v) || ref.power[w] <= 0.0) continue;
                    const double rel = std::abs(flow.power[w] - ref.power[w]) / ref.power[w];
                    if (rel > rep.max_relative) rep = {rel, w, v};
                }
            }
        }
    }
    return rep;
}

} // namespace windctl
