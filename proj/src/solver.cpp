#include <windctl/solver.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>

#include <windctl/table_io.hpp>

namespace windctl {

void ObjectiveSpec::validate(std::size_t turbines) const {
    if (!(demand >= 0.0) || !std::isfinite(demand)) throw std::invalid_argument("demand must be non-negative");
    if (!(epsilon > 0.0)) throw std::invalid_argument("quantization epsilon must be positive");
    if (partition.regime_of.size() != turbines) throw std::invalid_argument("regime partition does not match the farm");
    if (partition.fractions.size() != partition.regimes.size()) throw std::invalid_argument("one fraction per regime is required");
    if (!penalty.high_risk.empty() && penalty.high_risk.size() != turbines)
        throw std::invalid_argument("high-risk flags do not match the farm");
    if (!(penalty.threshold > 0.0)) throw std::invalid_argument("damage threshold must be positive");
}

namespace {

Score finish_score(const std::vector<double> & regime_sum, std::size_t penalty, const ObjectiveSpec & spec) {
    Score s;
    s.penalty = penalty;
    for (std::size_t r = 0; r < regime_sum.size(); ++r) s.error += std::abs(spec.target(r) - regime_sum[r]);
    return s;
}

} // namespace

Score objective(const JointConfiguration & config, const ArmIndex & arms, const std::vector<Watts> & sampled,
                const ObjectiveSpec & spec) {
    const std::size_t n = arms.turbines();
    if (config.size() != n) throw std::invalid_argument("configuration does not match the farm");
    if (sampled.size() != arms.total()) throw std::invalid_argument("sampled powers are missing arms");
    std::vector<double> sums(spec.partition.size(), 0.0);
    std::size_t penalty = 0;
    for (std::size_t w = 0; w < n; ++w) {
        const double p = sampled[arms.arm_of(w, config)];
        sums[spec.partition.regime_of[w]] += p;
        if (spec.penalty.penalized(w, p)) ++penalty;
    }
    return finish_score(sums, penalty, spec);
}

Score score_powers(const std::vector<Watts> & powers, const ObjectiveSpec & spec) {
    if (powers.size() != spec.partition.regime_of.size()) throw std::invalid_argument("power vector does not match the farm");
    std::vector<double> sums(spec.partition.size(), 0.0);
    std::size_t penalty = 0;
    for (std::size_t w = 0; w < powers.size(); ++w) {
        sums[spec.partition.regime_of[w]] += powers[w];
        if (spec.penalty.penalized(w, powers[w])) ++penalty;
    }
    return finish_score(sums, penalty, spec);
}

SolveResult solve_exhaustive(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                             const ObjectiveSpec & spec) {
    const std::size_t n = graph.size();
    const std::size_t m = arms.menu_size();
    spec.validate(n);
    if (sampled.size() != arms.total()) throw std::invalid_argument("sampled powers are missing arms");
    double count = 1.0;
    for (std::size_t i = 0; i < n; ++i) count *= static_cast<double>(m);
    if (count > 1e7) throw std::invalid_argument("too many configurations for exhaustive search; use solve_dp");

    JointConfiguration cfg = JointConfiguration::uniform(n, 0);
    SolveResult best;
    best.configuration = cfg;
    best.score = objective(cfg, arms, sampled, spec);
    while (true) {
        std::size_t i = n;
        while (i > 0) {
            --i;
            if (++cfg.levels[i] < m) break;
            cfg.levels[i] = 0;
            if (i == 0) { i = n; break; }
        }
        if (i == n) break;
        const Score s = objective(cfg, arms, sampled, spec);
        if (s < best.score) {
            best.score = s;
            best.configuration = cfg;
        }
    }
    best.optimality = Optimality::exact;
    return best;
}

// ---------------------------------------------------------------------------
// Dynamic program

namespace {

struct Layer {
    std::size_t n = 0, regimes = 0;
    std::vector<std::uint8_t> cfg;
    std::vector<std::int64_t> q;
    std::vector<std::uint32_t> pen;
    std::vector<double> err;
    std::vector<std::uint32_t> slots;
    std::size_t mask = 0;

    std::size_t size() const { return pen.size(); }

    void reset(std::size_t n_, std::size_t regimes_, std::size_t expected) {
        n = n_;
        regimes = regimes_;
        cfg.clear();
        q.clear();
        pen.clear();
        err.clear();
        std::size_t cap = 64;
        while (cap < 2 * expected) cap <<= 1;
        slots.assign(cap, 0);
        mask = cap - 1;
    }

    void grow() {
        std::size_t cap = slots.size() * 2;
        slots.assign(cap, 0);
        mask = cap - 1;
    }
};

struct DpContext {
    std::size_t n = 0, m = 0, regimes = 0;
    std::vector<std::vector<std::size_t>> frontier;   // per step
    std::vector<std::int64_t> qv;                     // per arm
    std::vector<std::uint8_t> pen;                    // per arm
};

std::uint64_t key_hash(const std::uint8_t * cfg, const std::int64_t * q, const std::vector<std::size_t> & frontier,
                       std::size_t regimes) {
    std::uint64_t h = 0x84222325cbf29ce4ULL;
    for (auto v : frontier) h = (h ^ cfg[v]) * 0x100000001b3ULL;
    for (std::size_t r = 0; r < regimes; ++r) h = mix64(h ^ static_cast<std::uint64_t>(q[r]));
    return mix64(h);
}

bool key_equal(const std::uint8_t * a, const std::int64_t * qa, const std::uint8_t * b, const std::int64_t * qb,
               const std::vector<std::size_t> & frontier, std::size_t regimes) {
    for (auto v : frontier)
        if (a[v] != b[v]) return false;
    for (std::size_t r = 0; r < regimes; ++r)
        if (qa[r] != qb[r]) return false;
    return true;
}

// Sentinel sums of regimes whose final sum is known to stay below (above)
// the target; see the fold in solve_dp.
constexpr std::int64_t kBelow = std::numeric_limits<std::int64_t>::min();
constexpr std::int64_t kAbove = std::numeric_limits<std::int64_t>::max();

double interval_distance(double x, double lo, double hi) {
    if (x < lo) return lo - x;
    if (x > hi) return x - hi;
    return 0.0;
}

} // namespace

SolveResult solve_dp(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                     const ObjectiveSpec & spec, const DpOptions & opt) {
    const std::size_t n = graph.size();
    const std::size_t m = arms.menu_size();
    const std::size_t R = spec.partition.size();
    spec.validate(n);
    if (sampled.size() != arms.total()) throw std::invalid_argument("sampled powers are missing arms");
    if (m > 255) throw std::invalid_argument("menu too large for the DP encoding");
    const double eps = spec.epsilon;

    const auto order = elimination_order(graph);
    const auto frontier = forward_frontiers(graph, order);
    std::size_t width = 0;
    for (const auto & f : frontier) width = std::max(width, f.size());
    if (width > opt.max_frontier)
        throw std::invalid_argument("frontier width " + std::to_string(width) + " exceeds the cap of " +
                                    std::to_string(opt.max_frontier));

    std::vector<std::size_t> position(n);
    for (std::size_t k = 0; k < n; ++k) position[order[k]] = k;
    std::vector<std::vector<std::size_t>> completes(n);
    std::vector<std::size_t> complete_step(n, 0);
    for (std::size_t w = 0; w < n; ++w) {
        std::size_t c = 0;
        for (auto v : graph.scope(w)) c = std::max(c, position[v]);
        completes[c].push_back(w);
        complete_step[w] = c;
    }
    std::vector<std::size_t> regime_close(R, 0);
    for (std::size_t w = 0; w < n; ++w) {
        auto & rc = regime_close[spec.partition.regime_of[w]];
        rc = std::max(rc, complete_step[w]);
    }
    std::vector<std::vector<std::size_t>> closes(n);
    for (std::size_t r = 0; r < R; ++r) closes[regime_close[r]].push_back(r);

    std::vector<std::int64_t> qv(arms.total());
    std::vector<std::uint8_t> penal(arms.total());
    for (std::size_t a = 0; a < arms.total(); ++a) {
        const double scaled = std::round(sampled[a] / eps);
        if (!std::isfinite(scaled) || std::abs(scaled) > 1e15) throw std::invalid_argument("sampled power too large for epsilon");
        qv[a] = static_cast<std::int64_t>(scaled);
        penal[a] = spec.penalty.penalized(arms.turbine_of(a), sampled[a]) ? 1 : 0;
    }

    // Suffix bounds on what the remaining factors can still add.
    std::vector<std::int64_t> lo((n + 1) * R, 0), hi((n + 1) * R, 0);
    std::vector<std::size_t> pen_lb(n + 1, 0);
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t r = 0; r < R; ++r) {
            lo[k * R + r] = lo[(k + 1) * R + r];
            hi[k * R + r] = hi[(k + 1) * R + r];
        }
        pen_lb[k] = pen_lb[k + 1];
        // lo[k]: factors completing at steps > k - 1, i.e. >= k.
        for (auto w : completes[k]) {
            std::int64_t mn = std::numeric_limits<std::int64_t>::max(), mx = std::numeric_limits<std::int64_t>::min();
            bool all_pen = true;
            for (std::size_t a = arms.offset(w); a < arms.offset(w) + arms.arms_of(w); ++a) {
                mn = std::min(mn, qv[a]);
                mx = std::max(mx, qv[a]);
                all_pen = all_pen && penal[a];
            }
            const std::size_t r = spec.partition.regime_of[w];
            lo[k * R + r] += mn;
            hi[k * R + r] += mx;
            if (all_pen) ++pen_lb[k];
        }
    }

    // Incumbent on the quantized objective: best local optimum from the
    // all-minimum and all-maximum starts.
    bool have_incumbent = false;
    std::size_t inc_pen = 0;
    double inc_err = 0.0;
    if (opt.prune_with_incumbent) {
        for (std::size_t start : {std::size_t{0}, m - 1}) {
            const auto cfg = improve_locally(JointConfiguration::uniform(n, start), arms, sampled, spec);
            std::vector<std::int64_t> qs(R, 0);
            std::size_t pen = 0;
            for (std::size_t w = 0; w < n; ++w) {
                const auto a = arms.arm_of(w, cfg);
                qs[spec.partition.regime_of[w]] += qv[a];
                pen += penal[a];
            }
            double err = 0.0;
            for (std::size_t r = 0; r < R; ++r) err += std::abs(spec.target(r) - eps * static_cast<double>(qs[r]));
            if (!have_incumbent || pen < inc_pen || (pen == inc_pen && err < inc_err)) {
                inc_pen = pen;
                inc_err = err;
            }
            have_incumbent = true;
        }
    }
    const double tol = 1e-6 * std::max(1.0, inc_err);

    Layer cur, next;
    cur.reset(n, R, 1);
    cur.cfg.assign(n, 0);
    cur.q.assign(R, 0);
    cur.pen.push_back(0);
    cur.err.push_back(0.0);

    SolveResult result;
    result.layer_sizes.reserve(n);
    std::vector<std::uint8_t> tmp(n);
    std::vector<std::int64_t> tq(R);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t v = order[k];
        const auto & fr = frontier[k];
        next.reset(n, R, std::min(cur.size() * m, opt.max_states));
        for (std::size_t s = 0; s < cur.size(); ++s) {
            for (std::size_t l = 0; l < m; ++l) {
                std::memcpy(tmp.data(), &cur.cfg[s * n], n);
                tmp[v] = static_cast<std::uint8_t>(l);
                std::memcpy(tq.data(), &cur.q[s * R], R * sizeof(std::int64_t));
                std::size_t p = cur.pen[s];
                double e = cur.err[s];
                for (auto w : completes[k]) {
                    std::size_t local = 0;
                    for (auto u : graph.scope(w)) local = local * m + tmp[u];
                    const std::size_t a = arms.offset(w) + local;
                    auto & sum = tq[spec.partition.regime_of[w]];
                    if (sum == kBelow) e -= eps * static_cast<double>(qv[a]);
                    else if (sum == kAbove) e += eps * static_cast<double>(qv[a]);
                    else sum += qv[a];
                    p += penal[a];
                }
                for (auto r : closes[k]) {
                    if (tq[r] != kBelow && tq[r] != kAbove) e += std::abs(spec.target(r) - eps * static_cast<double>(tq[r]));
                    tq[r] = 0;
                }
                // A regime that can no longer cross its target has an error
                // linear in what is still to come: fold it into the value and
                // drop its sum from the key. This merges states exactly.
                for (std::size_t r = 0; r < R; ++r) {
                    if (regime_close[r] <= k || tq[r] == kBelow || tq[r] == kAbove) continue;
                    const double t = spec.target(r) / eps;
                    const auto q = static_cast<double>(tq[r]);
                    if (q + static_cast<double>(hi[(k + 1) * R + r]) <= t) {
                        e += (t - q) * eps;
                        tq[r] = kBelow;
                    } else if (q + static_cast<double>(lo[(k + 1) * R + r]) >= t) {
                        e += (q - t) * eps;
                        tq[r] = kAbove;
                    }
                }
                if (have_incumbent) {
                    const std::size_t lbp = p + pen_lb[k + 1];
                    if (lbp > inc_pen) continue;
                    if (lbp == inc_pen) {
                        double lb = e;
                        for (std::size_t r = 0; r < R; ++r) {
                            if (regime_close[r] <= k) continue;
                            if (tq[r] == kBelow) {
                                lb -= eps * static_cast<double>(hi[(k + 1) * R + r]);
                                continue;
                            }
                            if (tq[r] == kAbove) {
                                lb += eps * static_cast<double>(lo[(k + 1) * R + r]);
                                continue;
                            }
                            lb += interval_distance(spec.target(r) - eps * static_cast<double>(tq[r]),
                                                    eps * static_cast<double>(lo[(k + 1) * R + r]),
                                                    eps * static_cast<double>(hi[(k + 1) * R + r]));
                        }
                        if (lb > inc_err + tol) continue;
                    }
                }

                // Insert or merge.
                std::size_t slot = key_hash(tmp.data(), tq.data(), fr, R) & next.mask;
                while (true) {
                    const std::uint32_t idx = next.slots[slot];
                    if (idx == 0) {
                        if (next.size() >= opt.max_states)
                            throw StateLimitExceeded("DP state count exceeds " + std::to_string(opt.max_states) +
                                                     " at step " + std::to_string(k) + "; increase epsilon");
                        next.cfg.insert(next.cfg.end(), tmp.begin(), tmp.end());
                        next.q.insert(next.q.end(), tq.begin(), tq.end());
                        next.pen.push_back(static_cast<std::uint32_t>(p));
                        next.err.push_back(e);
                        next.slots[slot] = static_cast<std::uint32_t>(next.size());
                        if (2 * next.size() > next.slots.size()) {
                            next.grow();
                            for (std::size_t t = 0; t < next.size(); ++t) {
                                std::size_t sl = key_hash(&next.cfg[t * n], &next.q[t * R], fr, R) & next.mask;
                                while (next.slots[sl] != 0) sl = (sl + 1) & next.mask;
                                next.slots[sl] = static_cast<std::uint32_t>(t + 1);
                            }
                        }
                        break;
                    }
                    const std::size_t t = idx - 1;
                    if (key_equal(&next.cfg[t * n], &next.q[t * R], tmp.data(), tq.data(), fr, R)) {
                        bool better = p < next.pen[t] || (p == next.pen[t] && e < next.err[t]);
                        if (!better && p == next.pen[t] && e == next.err[t])
                            better = std::memcmp(tmp.data(), &next.cfg[t * n], n) < 0;
                        if (better) {
                            std::memcpy(&next.cfg[t * n], tmp.data(), n);
                            next.pen[t] = static_cast<std::uint32_t>(p);
                            next.err[t] = e;
                        }
                        break;
                    }
                    slot = (slot + 1) & next.mask;
                }
            }
        }
        result.layer_sizes.push_back(next.size());
        std::swap(cur, next);
        if (cur.size() == 0) break;
    }

    if (cur.size() == 0) {
        // Only reachable through round-off in the bound; retry without pruning.
        DpOptions plain = opt;
        plain.prune_with_incumbent = false;
        return solve_dp(graph, arms, sampled, spec, plain);
    }

    // All regimes are closed and the frontier is empty, so one state remains;
    // still pick the best defensively.
    std::size_t best = 0;
    for (std::size_t s = 1; s < cur.size(); ++s) {
        const bool better = cur.pen[s] < cur.pen[best] || (cur.pen[s] == cur.pen[best] && cur.err[s] < cur.err[best]) ||
                            (cur.pen[s] == cur.pen[best] && cur.err[s] == cur.err[best] &&
                             std::memcmp(&cur.cfg[s * n], &cur.cfg[best * n], n) < 0);
        if (better) best = s;
    }
    result.configuration.levels.assign(cur.cfg.begin() + static_cast<std::ptrdiff_t>(best * n),
                                       cur.cfg.begin() + static_cast<std::ptrdiff_t>((best + 1) * n));
    result.score = objective(result.configuration, arms, sampled, spec);
    result.optimality = Optimality::approximate;
    result.epsilon = eps;
    result.error_bound = static_cast<double>(n) * eps;
    return result;
}

SolveResult solve_dp_adaptive(const CoordinationGraph & graph, const ArmIndex & arms, const std::vector<Watts> & sampled,
                              const ObjectiveSpec & spec, Watts max_epsilon, const DpOptions & opt) {
    ObjectiveSpec s = spec;
    while (true) {
        try {
            return solve_dp(graph, arms, sampled, s, opt);
        } catch (const StateLimitExceeded &) {
            if (s.epsilon * 2.0 <= max_epsilon) {
                s.epsilon *= 2.0;
                continue;
            }
            if (!opt.local_search_fallback) throw;
            SolveResult r;
            r.configuration = improve_locally(JointConfiguration::uniform(arms.turbines(), 0), arms, sampled, spec);
            r.score = objective(r.configuration, arms, sampled, spec);
            r.optimality = Optimality::approximate;
            r.error_bound = std::numeric_limits<double>::infinity();
            r.epsilon = 0.0;
            return r;
        }
    }
}

JointConfiguration improve_locally(JointConfiguration config, const ArmIndex & arms, const std::vector<Watts> & sampled,
                                   const ObjectiveSpec & spec) {
    const std::size_t n = arms.turbines();
    const std::size_t m = arms.menu_size();
    // Turbines whose factor contains v.
    std::vector<std::vector<std::size_t>> touching(n);
    for (std::size_t w = 0; w < n; ++w)
        for (auto v : arms.scope(w)) touching[v].push_back(w);

    std::vector<double> power(n);
    for (std::size_t w = 0; w < n; ++w) power[w] = sampled[arms.arm_of(w, config)];
    Score cur = score_powers(power, spec);

    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t keep = config.levels[v];
            std::size_t best_level = keep;
            Score best = cur;
            for (std::size_t l = 0; l < m; ++l) {
                if (l == keep) continue;
                config.levels[v] = l;
                auto trial = power;
                for (auto w : touching[v]) trial[w] = sampled[arms.arm_of(w, config)];
                const Score s = score_powers(trial, spec);
                if (s < best) {
                    best = s;
                    best_level = l;
                }
            }
            config.levels[v] = best_level;
            if (best_level != keep) {
                for (auto w : touching[v]) power[w] = sampled[arms.arm_of(w, config)];
                cur = best;
                improved = true;
            }
        }
    }
    return config;
}

std::string render_solver_trace(const SolveResult & result) {
    CsvWriter csv("windctl.solver_trace/1", {"step", "states"});
    for (std::size_t k = 0; k < result.layer_sizes.size(); ++k) {
        csv.cell(k).cell(result.layer_sizes[k]);
        csv.end_row();
    }
    return csv.str();
}

} // namespace windctl
