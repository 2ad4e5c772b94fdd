#pragma once

#include <cstddef>
#include <vector>

#include <windctl/farm_model.hpp>

namespace windctl {

/// One set-point per turbine, stored as an index into the SetPointMenu and
/// laid out in canonical turbine order.
struct JointConfiguration {
    std::vector<std::size_t> levels;

    JointConfiguration() = default;
    explicit JointConfiguration(std::vector<std::size_t> l) : levels(std::move(l)) {}

    static JointConfiguration uniform(std::size_t turbines, std::size_t level) {
        return JointConfiguration(std::vector<std::size_t>(turbines, level));
    }

    std::size_t size() const { return levels.size(); }
    std::size_t operator[](std::size_t i) const { return levels[i]; }

    /// Throws std::invalid_argument unless every turbine has a menu level.
    void validate(const FarmLayout & farm, const SetPointMenu & menu) const;

    friend auto operator<=>(const JointConfiguration &, const JointConfiguration &) = default;
};

struct FlowResult {
    std::vector<MetersPerSecond> effective_speed;
    std::vector<Watts> power;
    Watts farm_total = 0.0;
};

struct WakeParameters {
    double expansion_k = 0.05;  // offshore
    double air_density = 1.225; // kg/m^3
};

/// Jensen top-hat wakes with sum-of-squares superposition and derating
/// through actuator-disk induction.
class WakeModel {
public:
    WakeModel() = default;
    explicit WakeModel(WakeParameters p) : params_(p) {}

    const WakeParameters & parameters() const { return params_; }

    /// Deterministic: identical inputs give bit-identical outputs.
    FlowResult evaluate(const FarmLayout & farm, const WindCondition & wind,
                        const SetPointMenu & menu, const JointConfiguration & config) const;

    /// Same, with set-points given directly in watts.
    FlowResult evaluate_setpoints(const FarmLayout & farm, const WindCondition & wind,
                                  const std::vector<Watts> & set_points) const;

private:
    WakeParameters params_;
};

/// Solves P = 2 rho A u^3 a (1 - a)^2 for a in [0, 1/3] with
/// P = min(set_point, available_power). Returns 1/3 when Betz-limited.
double axial_induction(Watts set_point, const TurbineSpec & spec, MetersPerSecond hub_speed,
                       double air_density = 1.225);

/// Jensen deficit 2a (r0 / (r0 + k x))^2 times the fraction of the
/// downstream rotor disk covered by the wake disk.
double single_wake_deficit(double induction, Meters rotor_radius, Meters downstream_distance,
                           Meters crosswind_offset, double expansion_k,
                           Meters downstream_rotor_radius = -1.0);

/// Fraction of a disk of radius `r` covered by a disk of radius `big_r`
/// whose centre lies `d` away.
double disk_overlap_fraction(double big_r, double r, double d);

/// Along-wind (downstream) coordinate and signed crosswind offset per turbine.
struct WindFrame {
    std::vector<double> along;
    std::vector<double> cross;
};
WindFrame wind_frame(const FarmLayout & farm, const WindCondition & wind);

/// Turbines sorted upstream to downstream; canonical order breaks ties.
std::vector<std::size_t> upstream_order(const FarmLayout & farm, const WindCondition & wind);

/// Separations below this (m) along the wind are treated as side-by-side.
inline constexpr double kAlongWindTolerance = 1e-6;

} // namespace windctl
