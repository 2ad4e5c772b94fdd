#include <windctl/wake_sim.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace windctl {

void JointConfiguration::validate(const FarmLayout & farm, const SetPointMenu & menu) const {
    if (levels.size() != farm.size())
        throw std::invalid_argument("configuration has " + std::to_string(levels.size()) +
                                    " entries for a farm of " + std::to_string(farm.size()));
    for (std::size_t i = 0; i < levels.size(); ++i)
        if (levels[i] >= menu.size())
            throw std::invalid_argument("turbine \"" + farm[i].id + "\" has no menu level " + std::to_string(levels[i]));
}

double axial_induction(Watts set_point, const TurbineSpec & spec, MetersPerSecond hub_speed, double air_density) {
    if (!(hub_speed > 0.0)) return 0.0;
    const double target = std::min(std::max(set_point, 0.0), available_power(spec, hub_speed));
    if (target <= 0.0) return 0.0;
    const double area = std::numbers::pi * spec.rotor_radius() * spec.rotor_radius();
    const double scale = 2.0 * air_density * area * hub_speed * hub_speed * hub_speed;
    const double betz = 1.0 / 3.0;
    const auto f = [](double a) { return a * (1.0 - a) * (1.0 - a); };
    if (target >= scale * f(betz)) return betz;

    // a(1-a)^2 is increasing on [0, 1/3].
    const double goal = target / scale;
    double lo = 0.0, hi = betz;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < goal) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

double disk_overlap_fraction(double big_r, double r, double d) {
    d = std::abs(d);
    if (r <= 0.0) return 0.0;
    if (d >= big_r + r) return 0.0;
    if (d + r <= big_r) return 1.0;
    if (d + big_r <= r) return (big_r * big_r) / (r * r);
    // Circle-circle lens area.
    const double r2 = r * r, R2 = big_r * big_r, d2 = d * d;
    const double c1 = std::clamp((d2 + r2 - R2) / (2.0 * d * r), -1.0, 1.0);
    const double c2 = std::clamp((d2 + R2 - r2) / (2.0 * d * big_r), -1.0, 1.0);
    const double k = std::max(0.0, (-d + r + big_r) * (d + r - big_r) * (d - r + big_r) * (d + r + big_r));
    const double lens = r2 * std::acos(c1) + R2 * std::acos(c2) - 0.5 * std::sqrt(k);
    return std::clamp(lens / (std::numbers::pi * r2), 0.0, 1.0);
}

double single_wake_deficit(double induction, Meters rotor_radius, Meters downstream_distance,
                           Meters crosswind_offset, double expansion_k, Meters downstream_rotor_radius) {
    if (!(downstream_distance > 0.0) || induction <= 0.0) return 0.0;
    const double r_down = downstream_rotor_radius > 0.0 ? downstream_rotor_radius : rotor_radius;
    const double wake_r = rotor_radius + expansion_k * downstream_distance;
    const double overlap = disk_overlap_fraction(wake_r, r_down, crosswind_offset);
    if (overlap <= 0.0) return 0.0;
    const double ratio = rotor_radius / wake_r;
    return 2.0 * induction * ratio * ratio * overlap;
}

WindFrame wind_frame(const FarmLayout & farm, const WindCondition & wind) {
    const auto [ux, uy] = wind.unit();
    WindFrame f;
    f.along.reserve(farm.size());
    f.cross.reserve(farm.size());
    for (const auto & t : farm) {
        f.along.push_back(t.x * ux + t.y * uy);
        f.cross.push_back(-t.x * uy + t.y * ux);
    }
    return f;
}

std::vector<std::size_t> upstream_order(const FarmLayout & farm, const WindCondition & wind) {
    const auto frame = wind_frame(farm, wind);
    std::vector<std::size_t> order(farm.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frame.along[a] < frame.along[b]; });
    return order;
}

FlowResult WakeModel::evaluate(const FarmLayout & farm, const WindCondition & wind,
                               const SetPointMenu & menu, const JointConfiguration & config) const {
    config.validate(farm, menu);
    std::vector<Watts> sp(farm.size());
    for (std::size_t i = 0; i < farm.size(); ++i) sp[i] = menu[config[i]];
    return evaluate_setpoints(farm, wind, sp);
}

FlowResult WakeModel::evaluate_setpoints(const FarmLayout & farm, const WindCondition & wind,
                                         const std::vector<Watts> & set_points) const {
    const std::size_t n = farm.size();
    if (set_points.size() != n)
        throw std::invalid_argument("set-point vector does not match the farm size");

    const auto frame = wind_frame(farm, wind);
    const auto order = upstream_order(farm, wind);

    FlowResult out;
    out.effective_speed.assign(n, wind.speed);
    out.power.assign(n, 0.0);
    std::vector<double> induction(n, 0.0);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        double sum_sq = 0.0;
        for (std::size_t m = 0; m < k; ++m) {
            const std::size_t i = order[m];
            const double dx = frame.along[j] - frame.along[i];
            if (dx <= kAlongWindTolerance || induction[i] <= 0.0) continue;
            const double d = single_wake_deficit(induction[i], farm[i].spec.rotor_radius(), dx,
                                                 frame.cross[j] - frame.cross[i], params_.expansion_k,
                                                 farm[j].spec.rotor_radius());
            sum_sq += d * d;
        }
        const double total_deficit = std::sqrt(std::clamp(sum_sq, 0.0, 1.0));
        const double u = wind.speed * (1.0 - total_deficit);
        out.effective_speed[j] = u;
        out.power[j] = std::min(std::max(set_points[j], 0.0), available_power(farm[j].spec, u));
        induction[j] = axial_induction(out.power[j], farm[j].spec, u, params_.air_density);
    }

    out.farm_total = 0.0;
    for (std::size_t i = 0; i < n; ++i) out.farm_total += out.power[i];
    return out;
}

} // namespace windctl
