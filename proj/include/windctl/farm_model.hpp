#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace windctl {

using Watts = double;
using MetersPerSecond = double;
using RadiansPerSecond = double;
using NewtonMeters = double;
using Meters = double;

/// Piecewise-linear curve through strictly increasing abscissae. Outside the
/// anchor range the end values are held constant.
class PiecewiseLinear {
public:
    PiecewiseLinear() = default;
    explicit PiecewiseLinear(std::vector<std::pair<double, double>> anchors);

    double operator()(double x) const;

    const std::vector<std::pair<double, double>> & anchors() const { return anchors_; }
    bool empty() const { return anchors_.empty(); }

    friend bool operator==(const PiecewiseLinear &, const PiecewiseLinear &) = default;

private:
    std::vector<std::pair<double, double>> anchors_;
};

struct TurbineSpec {
    Meters rotor_diameter = 164.0;
    Watts rated_power = 8.0e6;
    PiecewiseLinear power_curve;        // hub speed (m/s) -> available power (W)
    PiecewiseLinear rotor_speed_curve;  // hub speed (m/s) -> rotor speed (rad/s)

    Meters rotor_radius() const { return 0.5 * rotor_diameter; }
    /// Hub speed at which the power curve first reaches rated power.
    MetersPerSecond rated_speed() const;
    /// Rotor speed in the rated region, used for the damage torque threshold.
    RadiansPerSecond rated_rotor_speed() const { return rotor_speed_curve(rated_speed()); }

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;

    friend bool operator==(const TurbineSpec &, const TurbineSpec &) = default;
};

/// LW-8MW-like defaults: power curve through (6.5, 1.49 MW), (10, 6.42 MW),
/// (13.5, 8 MW) plus the origin; rotor speed ramps 0.6 -> 1.0 rad/s between
/// 4 m/s and rated speed.
TurbineSpec default_turbine_spec(Meters rotor_diameter = 164.0);

struct Turbine {
    std::string id;
    Meters x = 0.0;
    Meters y = 0.0;
    TurbineSpec spec;

    friend bool operator==(const Turbine &, const Turbine &) = default;
};

/// Ordered turbine list. The order is the canonical turbine ordering used by
/// every other module.
class FarmLayout {
public:
    FarmLayout() = default;
    explicit FarmLayout(std::vector<Turbine> turbines);

    std::size_t size() const { return turbines_.size(); }
    const Turbine & operator[](std::size_t i) const { return turbines_[i]; }
    const std::vector<Turbine> & turbines() const { return turbines_; }
    auto begin() const { return turbines_.begin(); }
    auto end() const { return turbines_.end(); }

    /// Index of a turbine id; throws std::out_of_range if absent.
    std::size_t index_of(const std::string & id) const;

    /// Layout rotated about the origin by `degrees` (counter-clockwise).
    FarmLayout rotated(double degrees) const;

    friend bool operator==(const FarmLayout &, const FarmLayout &) = default;

private:
    std::vector<Turbine> turbines_;
};

/// Regular grid: `rows` lines of turbines along x (spacing dx), each holding
/// `per_row` turbines along y (spacing dy). Ids are T01, T02, ... in x-major
/// order, so the front row at 0 degrees comes first.
FarmLayout grid_farm(std::size_t rows, std::size_t per_row, Meters dx, Meters dy,
                     const TurbineSpec & spec = default_turbine_spec());

/// The 24-turbine 4 x 6 farm, 500 m along x and 400 m along y.
FarmLayout default_farm(Meters rotor_diameter = 164.0);

/// Direction 0 blows along +x; 90 along +y.
struct WindCondition {
    double direction = 0.0;       // degrees in [0, 360)
    MetersPerSecond speed = 11.0;

    WindCondition() = default;
    WindCondition(double direction_deg, MetersPerSecond speed_ms);

    /// Unit vector the wind travels along.
    std::pair<double, double> unit() const;

    friend bool operator==(const WindCondition &, const WindCondition &) = default;
};

class SetPointMenu {
public:
    SetPointMenu();  // {1.49, 6.42, 8.0} MW
    explicit SetPointMenu(std::vector<Watts> levels);

    std::size_t size() const { return levels_.size(); }
    Watts operator[](std::size_t i) const { return levels_[i]; }
    const std::vector<Watts> & levels() const { return levels_; }

    friend bool operator==(const SetPointMenu &, const SetPointMenu &) = default;

private:
    std::vector<Watts> levels_;
};

Watts available_power(const TurbineSpec & spec, MetersPerSecond hub_speed);

/// tau = P / omega. Throws std::domain_error when rotor_speed <= 0.
NewtonMeters shaft_torque(Watts power, RadiansPerSecond rotor_speed);

/// Parses a layout document (JSON, see README). Throws std::invalid_argument
/// with a diagnostic naming the offending record.
FarmLayout load_farm(const std::string & document);
FarmLayout load_farm_file(const std::string & path);

/// Renders a layout document that load_farm reads back to an equal farm.
std::string render_farm(const FarmLayout & farm);

} // namespace windctl
