#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <windctl/farm_model.hpp>
#include <windctl/wake_sim.hpp>

namespace windctl {

// ---------------------------------------------------------------------------
// Clustering

struct GmmOptions {
    std::size_t restarts = 20;
    std::size_t max_iterations = 500;
    double tolerance = 1e-10;       // on the log-likelihood
    double variance_floor = 1e-3;   // on standardized data
    std::size_t max_auto_components = 6;
};

struct GmmFit {
    std::vector<double> weights, means, variances; // original units, ascending means
    double log_likelihood = 0.0;                   // on standardized data
    double bic = 0.0;
};

/// EM for a one-dimensional finite Gaussian mixture with k components,
/// k-means++ seeding and `restarts` restarts; the best log-likelihood wins
/// (lowest restart index on ties).
GmmFit fit_gmm(const std::vector<double> & data, std::size_t k, std::uint64_t seed, const GmmOptions & opt = {});

struct Clustering {
    /// Regime index per turbine; regimes are ordered by ascending mean feature.
    std::vector<std::size_t> assignment;
    std::size_t regime_count = 0;
    std::size_t components = 0; // mixture size that was fitted
    GmmFit fit;
};

/// Fits with k components, or selects k in 1..6 by BIC when k is nullopt.
/// Each turbine joins its maximum-responsibility component; empty components
/// are dropped. Throws std::invalid_argument("degenerate clustering request")
/// when k exceeds the number of distinct feature values.
Clustering cluster_regimes(const std::vector<double> & features, std::optional<std::size_t> k,
                           std::uint64_t seed, const GmmOptions & opt = {});

std::vector<std::vector<std::size_t>> regimes_from_assignment(const std::vector<std::size_t> & assignment);

// ---------------------------------------------------------------------------
// Loads and damage

struct TorqueBin {
    NewtonMeters lower = 0.0;
    NewtonMeters upper = 0.0;
    double rotations = 0.0;

    friend bool operator==(const TorqueBin &, const TorqueBin &) = default;
};

struct LoadRevolutionDistribution {
    std::vector<TorqueBin> bins;

    /// Throws unless bins are ordered, non-overlapping and counts non-negative.
    void validate() const;

    friend bool operator==(const LoadRevolutionDistribution &, const LoadRevolutionDistribution &) = default;
};

/// Torque at 65 % of rated power and rated-region rotor speed.
NewtonMeters damage_torque_threshold(const TurbineSpec & spec);

/// Rotations at torque above the damage threshold; the bin straddling the
/// threshold is counted pro rata.
double turbine_damage(const LoadRevolutionDistribution & lrd, const TurbineSpec & spec);

enum class FractionMode { inverse, complement };

struct FractionOptions {
    FractionMode mode = FractionMode::inverse;
    /// When set, regime damage below this (fraction of total) is raised to it
    /// instead of raising an error.
    std::optional<double> damage_floor;
};

struct RegimePartition {
    std::vector<std::vector<std::size_t>> regimes;
    std::vector<double> damage;          // normalized per turbine, sums to 1
    std::vector<double> regime_damage;   // D_r
    std::vector<double> fractions;       // f_r, sums to 1
    std::vector<std::size_t> regime_of;  // per turbine

    std::size_t size() const { return regimes.size(); }
};

/// One regime holding every turbine, f = 1.
RegimePartition single_regime(std::size_t turbines);

/// f_r = (1 / D_r) / sum(1 / D_r'), or proportional to 1 - D_r in complement mode.
RegimePartition demand_fractions(const std::vector<std::vector<std::size_t>> & regimes,
                                 const std::vector<double> & damages, const FractionOptions & opt = {});

struct SyntheticLoadOptions {
    std::size_t bins = 30;
    double torque_span = 1.5;           // histogram covers [0, span * rated torque]
    double spread = 0.15;               // operating torque spread, fraction of rated torque
    double revolutions = 1.0e7;         // nominal revolutions per turbine
    double lognormal_sigma = 0.25;      // per-turbine variation
};

/// Steady operation at all-maximum set-points under `wind`; each turbine's
/// achieved power becomes an operating torque, smeared into a histogram and
/// scaled by a seeded lognormal factor. Deterministic per seed.
std::vector<LoadRevolutionDistribution> generate_synthetic_lrd(const FarmLayout & farm, const WindCondition & wind,
                                                               const SetPointMenu & menu, const WakeModel & model,
                                                               std::uint64_t seed,
                                                               const SyntheticLoadOptions & opt = {});

/// Histogram for one turbine operating at `power` and `rotor_speed`, scaled by
/// `variation`.
LoadRevolutionDistribution synthetic_lrd_for(Watts power, RadiansPerSecond rotor_speed, double variation,
                                             const TurbineSpec & spec, const SyntheticLoadOptions & opt = {});

/// turbine_id,torque_bin_lower_Nm,torque_bin_upper_Nm,rotations
std::string render_lrd(const FarmLayout & farm, const std::vector<LoadRevolutionDistribution> & lrds);
std::vector<LoadRevolutionDistribution> load_lrd(const FarmLayout & farm, const std::string & text);

/// regime_id,turbine_ids,D_r,f_r (turbine ids separated by spaces)
std::string render_regimes(const FarmLayout & farm, const RegimePartition & partition);

} // namespace windctl
