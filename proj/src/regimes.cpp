#include <windctl/regimes.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <windctl/rng.hpp>
#include <windctl/table_io.hpp>

namespace windctl {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836; // log(2 pi)

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_sum_exp(const std::vector<double> & v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

struct Standardized {
    std::vector<double> z;
    double mean = 0.0, scale = 1.0;
};

Standardized standardize(const std::vector<double> & x) {
    Standardized s;
    const double n = static_cast<double>(x.size());
    s.mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double var = 0.0;
    for (double v : x) var += (v - s.mean) * (v - s.mean);
    var /= n;
    s.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    s.z.reserve(x.size());
    for (double v : x) s.z.push_back((v - s.mean) / s.scale);
    return s;
}

std::size_t distinct_count(std::vector<double> x) {
    std::sort(x.begin(), x.end());
    return static_cast<std::size_t>(std::unique(x.begin(), x.end()) - x.begin());
}

struct Mixture {
    std::vector<double> w, mu, var;
    double ll = -std::numeric_limits<double>::infinity();
};

double mixture_log_likelihood(const std::vector<double> & z, const Mixture & m) {
    std::vector<double> comp(m.w.size());
    double ll = 0.0;
    for (double x : z) {
        for (std::size_t j = 0; j < m.w.size(); ++j)
            comp[j] = m.w[j] > 0.0 ? std::log(m.w[j]) + log_normal_pdf(x, m.mu[j], m.var[j])
                                   : -std::numeric_limits<double>::infinity();
        ll += log_sum_exp(comp);
    }
    return ll;
}

Mixture run_em(const std::vector<double> & z, std::size_t k, Rng & rng, const GmmOptions & opt) {
    const std::size_t n = z.size();

    // k-means++ seeding.
    std::vector<double> centers;
    centers.push_back(z[rng.below(n)]);
    std::vector<double> d2(n);
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (double c : centers) best = std::min(best, (z[i] - c) * (z[i] - c));
            d2[i] = best;
            total += best;
        }
        std::size_t pick = n - 1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                if (u < d2[i]) { pick = i; break; }
                u -= d2[i];
                pick = i;
            }
        }
        centers.push_back(z[pick]);
    }

    Mixture m;
    m.w.assign(k, 0.0);
    m.mu = centers;
    m.var.assign(k, 0.0);
    {
        std::vector<double> cnt(k, 0.0), ss(k, 0.0);
        for (double x : z) {
            std::size_t best = 0;
            for (std::size_t j = 1; j < k; ++j)
                if (std::abs(x - centers[j]) < std::abs(x - centers[best])) best = j;
            cnt[best] += 1.0;
            ss[best] += (x - centers[best]) * (x - centers[best]);
        }
        for (std::size_t j = 0; j < k; ++j) {
            m.w[j] = std::max(cnt[j], 1.0) / static_cast<double>(n);
            m.var[j] = std::max(cnt[j] > 0.0 ? ss[j] / cnt[j] : 1.0, opt.variance_floor);
        }
        const double ws = std::accumulate(m.w.begin(), m.w.end(), 0.0);
        for (auto & w : m.w) w /= ws;
    }

    std::vector<double> resp(n * k);
    std::vector<double> comp(k);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < k; ++j)
                comp[j] = m.w[j] > 0.0 ? std::log(m.w[j]) + log_normal_pdf(z[i], m.mu[j], m.var[j])
                                       : -std::numeric_limits<double>::infinity();
            const double lse = log_sum_exp(comp);
            ll += lse;
            for (std::size_t j = 0; j < k; ++j) resp[i * k + j] = std::exp(comp[j] - lse);
        }
        for (std::size_t j = 0; j < k; ++j) {
            double nk = 0.0, sx = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += resp[i * k + j];
                sx += resp[i * k + j] * z[i];
            }
            if (nk < 1e-12) {
                m.w[j] = 0.0;
                continue;
            }
            const double mu = sx / nk;
            double sv = 0.0;
            for (std::size_t i = 0; i < n; ++i) sv += resp[i * k + j] * (z[i] - mu) * (z[i] - mu);
            m.w[j] = nk / static_cast<double>(n);
            m.mu[j] = mu;
            m.var[j] = std::max(sv / nk, opt.variance_floor);
        }
        if (std::abs(ll - prev) < opt.tolerance) break;
        prev = ll;
    }
    m.ll = mixture_log_likelihood(z, m);
    return m;
}

std::size_t max_responsibility(double x, const GmmFit & fit) {
    std::size_t best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < fit.means.size(); ++j) {
        if (fit.weights[j] <= 0.0) continue;
        const double v = std::log(fit.weights[j]) + log_normal_pdf(x, fit.means[j], fit.variances[j]);
        if (v > best_v) {
            best_v = v;
            best = j;
        }
    }
    return best;
}

} // namespace

GmmFit fit_gmm(const std::vector<double> & data, std::size_t k, std::uint64_t seed, const GmmOptions & opt) {
    if (data.empty()) throw std::invalid_argument("clustering needs at least one turbine");
    for (double v : data)
        if (!std::isfinite(v)) throw std::invalid_argument("clustering features must be finite");
    if (k == 0) throw std::invalid_argument("component count must be positive");
    if (k > distinct_count(data)) throw std::invalid_argument("degenerate clustering request");

    const auto s = standardize(data);
    Mixture best;
    for (std::size_t r = 0; r < std::max<std::size_t>(opt.restarts, 1); ++r) {
        Rng rng(derive_seed(seed, {0x6d6978ULL, k, r}));
        auto m = run_em(s.z, k, rng, opt);
        if (m.ll > best.ll) best = std::move(m);
    }

    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return best.mu[a] < best.mu[b]; });

    GmmFit fit;
    for (auto j : idx) {
        fit.weights.push_back(best.w[j]);
        fit.means.push_back(best.mu[j] * s.scale + s.mean);
        fit.variances.push_back(best.var[j] * s.scale * s.scale);
    }
    fit.log_likelihood = best.ll;
    const double params = 3.0 * static_cast<double>(k) - 1.0;
    fit.bic = -2.0 * best.ll + params * std::log(static_cast<double>(data.size()));
    return fit;
}

Clustering cluster_regimes(const std::vector<double> & features, std::optional<std::size_t> k,
                           std::uint64_t seed, const GmmOptions & opt) {
    if (features.empty()) throw std::invalid_argument("clustering needs at least one turbine");
    const std::size_t distinct = distinct_count(features);
    if (k && (*k == 0 || *k > distinct)) throw std::invalid_argument("degenerate clustering request");

    Clustering out;
    if (distinct == 1) {
        out.assignment.assign(features.size(), 0);
        out.regime_count = 1;
        out.components = 1;
        out.fit.weights = {1.0};
        out.fit.means = {features.front()};
        out.fit.variances = {0.0};
        return out;
    }

    if (k) {
        out.fit = fit_gmm(features, *k, seed, opt);
        out.components = *k;
    } else {
        const std::size_t kmax = std::min(opt.max_auto_components, distinct);
        for (std::size_t c = 1; c <= kmax; ++c) {
            auto f = fit_gmm(features, c, seed, opt);
            if (c == 1 || f.bic < out.fit.bic) {
                out.fit = std::move(f);
                out.components = c;
            }
        }
    }

    std::vector<std::size_t> raw(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) raw[i] = max_responsibility(features[i], out.fit);
    // Drop empty components, keep ascending-mean order.
    std::vector<std::size_t> remap(out.components, out.components);
    std::vector<bool> used(out.components, false);
    for (auto r : raw) used[r] = true;
    std::size_t next = 0;
    for (std::size_t j = 0; j < out.components; ++j)
        if (used[j]) remap[j] = next++;
    out.regime_count = next;
    out.assignment.resize(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) out.assignment[i] = remap[raw[i]];
    return out;
}

std::vector<std::vector<std::size_t>> regimes_from_assignment(const std::vector<std::size_t> & assignment) {
    std::size_t count = 0;
    for (auto a : assignment) count = std::max(count, a + 1);
    std::vector<std::vector<std::size_t>> out(count);
    for (std::size_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
    return out;
}

// ---------------------------------------------------------------------------

void LoadRevolutionDistribution::validate() const {
    if (bins.empty()) throw std::invalid_argument("load revolution distribution needs at least one bin");
    for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto & b = bins[i];
        if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.upper > b.lower))
            throw std::invalid_argument("torque bin " + std::to_string(i) + " has non-increasing edges");
        if (!(b.rotations >= 0.0) || !std::isfinite(b.rotations))
            throw std::invalid_argument("torque bin " + std::to_string(i) + " has a negative rotation count");
        if (i > 0 && b.lower < bins[i - 1].upper)
            throw std::invalid_argument("torque bin " + std::to_string(i) + " overlaps its predecessor");
    }
}

NewtonMeters damage_torque_threshold(const TurbineSpec & spec) {
    return shaft_torque(0.65 * spec.rated_power, spec.rated_rotor_speed());
}

double turbine_damage(const LoadRevolutionDistribution & lrd, const TurbineSpec & spec) {
    lrd.validate();
    const double tau = damage_torque_threshold(spec);
    double total = 0.0;
    for (const auto & b : lrd.bins) {
        if (b.lower >= tau) total += b.rotations;
        else if (b.upper > tau) total += b.rotations * (b.upper - tau) / (b.upper - b.lower);
    }
    return total;
}

RegimePartition single_regime(std::size_t turbines) {
    RegimePartition p;
    p.regimes.assign(1, {});
    for (std::size_t i = 0; i < turbines; ++i) p.regimes[0].push_back(i);
    p.damage.assign(turbines, turbines ? 1.0 / static_cast<double>(turbines) : 0.0);
    p.regime_damage = {1.0};
    p.fractions = {1.0};
    p.regime_of.assign(turbines, 0);
    return p;
}

RegimePartition demand_fractions(const std::vector<std::vector<std::size_t>> & regimes,
                                 const std::vector<double> & damages, const FractionOptions & opt) {
    if (regimes.empty()) throw std::invalid_argument("at least one regime is required");
    const std::size_t n = damages.size();
    RegimePartition p;
    p.regimes = regimes;
    p.regime_of.assign(n, n);
    for (std::size_t r = 0; r < regimes.size(); ++r) {
        if (regimes[r].empty()) throw std::invalid_argument("regime " + std::to_string(r) + " is empty");
        for (auto w : regimes[r]) {
            if (w >= n) throw std::invalid_argument("regime refers to an unknown turbine");
            if (p.regime_of[w] != n) throw std::invalid_argument("regimes overlap");
            p.regime_of[w] = r;
        }
    }
    for (std::size_t w = 0; w < n; ++w)
        if (p.regime_of[w] == n) throw std::invalid_argument("regimes do not cover every turbine");

    double total = 0.0;
    for (double d : damages) {
        if (!(d >= 0.0) || !std::isfinite(d)) throw std::invalid_argument("damages must be finite and non-negative");
        total += d;
    }
    if (!(total > 0.0)) throw std::invalid_argument("total damage must be positive");

    p.damage.resize(n);
    for (std::size_t w = 0; w < n; ++w) p.damage[w] = damages[w] / total;
    p.regime_damage.assign(regimes.size(), 0.0);
    for (std::size_t r = 0; r < regimes.size(); ++r)
        for (auto w : regimes[r]) p.regime_damage[r] += p.damage[w];

    for (auto & d : p.regime_damage) {
        if (opt.damage_floor)
            d = std::max(d, *opt.damage_floor);
        else if (!(d > 0.0))
            throw std::invalid_argument("zero-damage regime; supply a damage floor");
    }

    std::vector<double> weight(regimes.size());
    if (regimes.size() == 1) {
        weight[0] = 1.0;
    } else {
        for (std::size_t r = 0; r < regimes.size(); ++r)
            weight[r] = opt.mode == FractionMode::inverse ? 1.0 / p.regime_damage[r] : 1.0 - p.regime_damage[r];
    }
    double wsum = 0.0;
    for (double w : weight) {
        if (!(w > 0.0)) throw std::invalid_argument("regime fraction would be zero; supply a damage floor");
        wsum += w;
    }
    p.fractions.resize(regimes.size());
    for (std::size_t r = 0; r < regimes.size(); ++r) p.fractions[r] = weight[r] / wsum;
    return p;
}

// ---------------------------------------------------------------------------

LoadRevolutionDistribution synthetic_lrd_for(Watts power, RadiansPerSecond rotor_speed, double variation,
                                             const TurbineSpec & spec, const SyntheticLoadOptions & opt) {
    const double rated_torque = shaft_torque(spec.rated_power, spec.rated_rotor_speed());
    const double centre = shaft_torque(power, rotor_speed);
    const double spread = opt.spread * rated_torque;
    const double top = opt.torque_span * rated_torque;
    const double width = top / static_cast<double>(opt.bins);
    const auto cdf = [&](double t) { return 0.5 * std::erfc(-(t - centre) / (spread * std::numbers::sqrt2)); };

    LoadRevolutionDistribution lrd;
    lrd.bins.reserve(opt.bins);
    const double total = opt.revolutions * variation;
    for (std::size_t b = 0; b < opt.bins; ++b) {
        const double lo = width * static_cast<double>(b);
        const double hi = b + 1 == opt.bins ? top : width * static_cast<double>(b + 1);
        // Torque outside the histogram range folds into the end bins.
        const double plo = b == 0 ? 0.0 : cdf(lo);
        const double phi = b + 1 == opt.bins ? 1.0 : cdf(hi);
        lrd.bins.push_back({lo, hi, total * std::max(0.0, phi - plo)});
    }
    return lrd;
}

std::vector<LoadRevolutionDistribution> generate_synthetic_lrd(const FarmLayout & farm, const WindCondition & wind,
                                                               const SetPointMenu & menu, const WakeModel & model,
                                                               std::uint64_t seed, const SyntheticLoadOptions & opt) {
    const auto flow = model.evaluate(farm, wind, menu, JointConfiguration::uniform(farm.size(), menu.size() - 1));
    std::vector<LoadRevolutionDistribution> out;
    out.reserve(farm.size());
    for (std::size_t w = 0; w < farm.size(); ++w) {
        Rng rng(derive_seed(seed, {0x6c7264ULL, w}));
        const double variation = std::exp(opt.lognormal_sigma * rng.normal());
        const double omega = farm[w].spec.rotor_speed_curve(flow.effective_speed[w]);
        out.push_back(synthetic_lrd_for(flow.power[w], omega, variation, farm[w].spec, opt));
    }
    return out;
}

std::string render_lrd(const FarmLayout & farm, const std::vector<LoadRevolutionDistribution> & lrds) {
    if (lrds.size() != farm.size()) throw std::invalid_argument("one load distribution per turbine is required");
    CsvWriter csv("windctl.lrd/1", {"turbine_id", "torque_bin_lower_Nm", "torque_bin_upper_Nm", "rotations"});
    for (std::size_t w = 0; w < farm.size(); ++w)
        for (const auto & b : lrds[w].bins) {
            csv.cell(farm[w].id).cell(b.lower).cell(b.upper).cell(b.rotations);
            csv.end_row();
        }
    return csv.str();
}

std::vector<LoadRevolutionDistribution> load_lrd(const FarmLayout & farm, const std::string & text) {
    const auto table = parse_csv(text);
    const auto c_id = table.column("turbine_id");
    const auto c_lo = table.column("torque_bin_lower_Nm");
    const auto c_hi = table.column("torque_bin_upper_Nm");
    const auto c_n = table.column("rotations");
    if (table.header.size() != 4) throw std::invalid_argument("load revolution table has unknown columns");
    std::vector<LoadRevolutionDistribution> out(farm.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto & row = table.rows[i];
        const std::string where = "load record " + std::to_string(i + 1) + " (" + row[c_id] + ")";
        std::size_t w = 0;
        try {
            w = farm.index_of(row[c_id]);
        } catch (const std::out_of_range &) {
            throw std::invalid_argument(where + ": turbine is not in the layout");
        }
        out[w].bins.push_back({parse_double(row[c_lo], where + " lower edge"),
                               parse_double(row[c_hi], where + " upper edge"),
                               parse_double(row[c_n], where + " rotations")});
    }
    for (std::size_t w = 0; w < farm.size(); ++w) {
        try {
            out[w].validate();
        } catch (const std::invalid_argument & e) {
            throw std::invalid_argument("turbine \"" + farm[w].id + "\": " + e.what());
        }
    }
    return out;
}

std::string render_regimes(const FarmLayout & farm, const RegimePartition & partition) {
    CsvWriter csv("windctl.regimes/1", {"regime_id", "turbine_ids", "D_r", "f_r"});
    for (std::size_t r = 0; r < partition.size(); ++r) {
        std::string ids;
        for (auto w : partition.regimes[r]) {
            if (!ids.empty()) ids += ' ';
            ids += farm[w].id;
        }
        csv.cell(r).cell(ids).cell(partition.regime_damage[r]).cell(partition.fractions[r]);
        csv.end_row();
    }
    return csv.str();
}

} // namespace windctl
