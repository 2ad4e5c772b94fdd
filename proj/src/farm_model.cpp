#include <windctl/farm_model.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace windctl {

using nlohmann::json;

PiecewiseLinear::PiecewiseLinear(std::vector<std::pair<double, double>> anchors) :
        anchors_(std::move(anchors))
{
    if (anchors_.empty())
        throw std::invalid_argument("curve must have at least one anchor");
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        if (!std::isfinite(anchors_[i].first) || !std::isfinite(anchors_[i].second))
            throw std::invalid_argument("curve anchor " + std::to_string(i) + " is not finite");
        if (i > 0 && !(anchors_[i].first > anchors_[i - 1].first))
            throw std::invalid_argument("curve abscissae must be strictly increasing (anchor " + std::to_string(i) + ")");
    }
}

double PiecewiseLinear::operator()(double x) const {
    if (x <= anchors_.front().first) return anchors_.front().second;
    if (x >= anchors_.back().first) return anchors_.back().second;
    const auto hi = std::upper_bound(anchors_.begin(), anchors_.end(), x,
                                     [](double v, const auto & a) { return v < a.first; });
    const auto lo = hi - 1;
    // Exact at anchors.
    if (x == lo->first) return lo->second;
    const double t = (x - lo->first) / (hi->first - lo->first);
    return lo->second + t * (hi->second - lo->second);
}

MetersPerSecond TurbineSpec::rated_speed() const {
    for (const auto & [u, p] : power_curve.anchors())
        if (p >= rated_power) return u;
    return power_curve.anchors().back().first;
}

void TurbineSpec::validate() const {
    if (!(rotor_diameter > 0.0) || !std::isfinite(rotor_diameter))
        throw std::invalid_argument("rotor diameter must be positive");
    if (!(rated_power > 0.0) || !std::isfinite(rated_power))
        throw std::invalid_argument("rated power must be positive");
    if (power_curve.empty())
        throw std::invalid_argument("power curve is empty");
    if (rotor_speed_curve.empty())
        throw std::invalid_argument("rotor speed curve is empty");
    const auto & pc = power_curve.anchors();
    for (std::size_t i = 0; i < pc.size(); ++i) {
        if (pc[i].first < 0.0)
            throw std::invalid_argument("power curve speeds must be non-negative");
        if (pc[i].second < 0.0 || pc[i].second > rated_power)
            throw std::invalid_argument("power curve must lie within [0, rated_power]");
        if (i > 0 && pc[i].second < pc[i - 1].second)
            throw std::invalid_argument("power curve is not monotone at anchor " + std::to_string(i));
    }
    for (const auto & [u, w] : rotor_speed_curve.anchors())
        if (!(w > 0.0))
            throw std::invalid_argument("rotor speed curve must be strictly positive");
}

TurbineSpec default_turbine_spec(Meters rotor_diameter) {
    TurbineSpec spec;
    spec.rotor_diameter = rotor_diameter;
    spec.rated_power = 8.0e6;
    spec.power_curve = PiecewiseLinear({{0.0, 0.0}, {6.5, 1.49e6}, {10.0, 6.42e6}, {13.5, 8.0e6}});
    spec.rotor_speed_curve = PiecewiseLinear({{4.0, 0.6}, {13.5, 1.0}});
    return spec;
}

FarmLayout::FarmLayout(std::vector<Turbine> turbines) : turbines_(std::move(turbines)) {
    if (turbines_.empty())
        throw std::invalid_argument("layout must contain at least one turbine");
    std::set<std::string> ids;
    std::set<std::pair<double, double>> positions;
    for (const auto & t : turbines_) {
        if (t.id.empty())
            throw std::invalid_argument("turbine id must not be empty");
        if (!ids.insert(t.id).second)
            throw std::invalid_argument("duplicate turbine id \"" + t.id + "\"");
        if (!std::isfinite(t.x) || !std::isfinite(t.y))
            throw std::invalid_argument("turbine \"" + t.id + "\" has a non-finite coordinate");
        if (!positions.insert({t.x, t.y}).second)
            throw std::invalid_argument("turbine \"" + t.id + "\" shares its position with another turbine");
        try {
            t.spec.validate();
        } catch (const std::invalid_argument & e) {
            throw std::invalid_argument("turbine \"" + t.id + "\": " + e.what());
        }
    }
}

std::size_t FarmLayout::index_of(const std::string & id) const {
    for (std::size_t i = 0; i < turbines_.size(); ++i)
        if (turbines_[i].id == id) return i;
    throw std::out_of_range("unknown turbine id \"" + id + "\"");
}

FarmLayout FarmLayout::rotated(double degrees) const {
    const double r = degrees * std::numbers::pi / 180.0;
    const double c = std::cos(r), s = std::sin(r);
    auto out = turbines_;
    for (auto & t : out) {
        const double x = t.x, y = t.y;
        t.x = c * x - s * y;
        t.y = s * x + c * y;
    }
    return FarmLayout(std::move(out));
}

FarmLayout grid_farm(std::size_t rows, std::size_t per_row, Meters dx, Meters dy, const TurbineSpec & spec) {
    std::vector<Turbine> ts;
    ts.reserve(rows * per_row);
    const std::size_t n = rows * per_row;
    const int width = n >= 100 ? 3 : 2;
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < per_row; ++j) {
            std::string num = std::to_string(ts.size() + 1);
            num.insert(0, width - std::min<std::size_t>(width, num.size()), '0');
            ts.push_back({"T" + num, static_cast<double>(i) * dx, static_cast<double>(j) * dy, spec});
        }
    }
    return FarmLayout(std::move(ts));
}

FarmLayout default_farm(Meters rotor_diameter) {
    return grid_farm(4, 6, 500.0, 400.0, default_turbine_spec(rotor_diameter));
}

WindCondition::WindCondition(double direction_deg, MetersPerSecond speed_ms) : speed(speed_ms) {
    if (!(speed_ms > 0.0) || !std::isfinite(speed_ms))
        throw std::invalid_argument("wind speed must be positive");
    if (!std::isfinite(direction_deg))
        throw std::invalid_argument("wind direction must be finite");
    direction = std::fmod(direction_deg, 360.0);
    if (direction < 0.0) direction += 360.0;
    if (direction >= 360.0) direction = 0.0;
}

std::pair<double, double> WindCondition::unit() const {
    // Exact axes for the common grid-aligned directions.
    if (direction == 0.0) return {1.0, 0.0};
    if (direction == 90.0) return {0.0, 1.0};
    if (direction == 180.0) return {-1.0, 0.0};
    if (direction == 270.0) return {0.0, -1.0};
    const double r = direction * std::numbers::pi / 180.0;
    return {std::cos(r), std::sin(r)};
}

SetPointMenu::SetPointMenu() : SetPointMenu(std::vector<Watts>{1.49e6, 6.42e6, 8.0e6}) {}

SetPointMenu::SetPointMenu(std::vector<Watts> levels) : levels_(std::move(levels)) {
    if (levels_.empty())
        throw std::invalid_argument("set-point menu must not be empty");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (!(levels_[i] >= 0.0) || !std::isfinite(levels_[i]))
            throw std::invalid_argument("set-point levels must be finite and non-negative");
        if (i > 0 && !(levels_[i] > levels_[i - 1]))
            throw std::invalid_argument("set-point levels must be strictly increasing");
    }
}

Watts available_power(const TurbineSpec & spec, MetersPerSecond hub_speed) {
    if (!(hub_speed > 0.0)) return std::clamp(spec.power_curve(0.0), 0.0, spec.rated_power);
    if (hub_speed >= spec.power_curve.anchors().back().first) return spec.rated_power;
    return std::clamp(spec.power_curve(hub_speed), 0.0, spec.rated_power);
}

NewtonMeters shaft_torque(Watts power, RadiansPerSecond rotor_speed) {
    if (!(rotor_speed > 0.0))
        throw std::domain_error("rotor speed must be positive to compute torque");
    return power / rotor_speed;
}

// ---------------------------------------------------------------------------
// Layout document

namespace {

const char * const kLayoutSchema = "windctl.layout/1";

void reject_unknown(const json & obj, std::initializer_list<const char *> allowed, const std::string & where) {
    for (const auto & [key, _] : obj.items()) {
        bool ok = false;
        for (const char * a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw std::invalid_argument(where + ": unknown field \"" + key + "\"");
    }
}

double number_field(const json & obj, const char * key, const std::string & where) {
    if (!obj.contains(key))
        throw std::invalid_argument(where + ": missing field \"" + key + "\"");
    const auto & v = obj.at(key);
    if (!v.is_number())
        throw std::invalid_argument(where + ": field \"" + key + "\" is not a number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
        throw std::invalid_argument(where + ": field \"" + key + "\" is not finite");
    return d;
}

PiecewiseLinear curve_field(const json & v, const std::string & where) {
    if (!v.is_array())
        throw std::invalid_argument(where + ": curve must be an array of [x, y] pairs");
    std::vector<std::pair<double, double>> anchors;
    for (const auto & p : v) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
            throw std::invalid_argument(where + ": curve anchors must be [number, number]");
        anchors.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    try {
        return PiecewiseLinear(std::move(anchors));
    } catch (const std::invalid_argument & e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
}

TurbineSpec apply_spec(const json & obj, TurbineSpec base, const std::string & where) {
    reject_unknown(obj, {"rotor_diameter_m", "rated_power_w", "power_curve", "rotor_speed_curve"}, where);
    if (obj.contains("rotor_diameter_m")) base.rotor_diameter = number_field(obj, "rotor_diameter_m", where);
    if (obj.contains("rated_power_w")) base.rated_power = number_field(obj, "rated_power_w", where);
    if (obj.contains("power_curve")) base.power_curve = curve_field(obj.at("power_curve"), where + ".power_curve");
    if (obj.contains("rotor_speed_curve")) base.rotor_speed_curve = curve_field(obj.at("rotor_speed_curve"), where + ".rotor_speed_curve");
    return base;
}

json curve_json(const PiecewiseLinear & c) {
    json a = json::array();
    for (const auto & [x, y] : c.anchors()) a.push_back({x, y});
    return a;
}

json spec_json(const TurbineSpec & s) {
    return json{{"rotor_diameter_m", s.rotor_diameter},
                {"rated_power_w", s.rated_power},
                {"power_curve", curve_json(s.power_curve)},
                {"rotor_speed_curve", curve_json(s.rotor_speed_curve)}};
}

} // namespace

FarmLayout load_farm(const std::string & document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error & e) {
        throw std::invalid_argument(std::string("layout is not valid JSON: ") + e.what());
    }
    if (!doc.is_object())
        throw std::invalid_argument("layout document must be an object");
    reject_unknown(doc, {"schema", "defaults", "turbines"}, "layout");
    if (doc.contains("schema") && doc.at("schema") != kLayoutSchema)
        throw std::invalid_argument("layout: unsupported schema " + doc.at("schema").dump());

    TurbineSpec defaults = default_turbine_spec();
    if (doc.contains("defaults")) {
        if (!doc.at("defaults").is_object())
            throw std::invalid_argument("layout: \"defaults\" must be an object");
        defaults = apply_spec(doc.at("defaults"), defaults, "defaults");
    }
    if (!doc.contains("turbines") || !doc.at("turbines").is_array() || doc.at("turbines").empty())
        throw std::invalid_argument("layout must contain at least one turbine");

    std::vector<Turbine> ts;
    std::size_t record = 0;
    for (const auto & rec : doc.at("turbines")) {
        ++record;
        std::string where = "turbine record " + std::to_string(record);
        if (!rec.is_object())
            throw std::invalid_argument(where + ": must be an object");
        if (rec.contains("id") && rec.at("id").is_string())
            where += " (\"" + rec.at("id").get<std::string>() + "\")";
        reject_unknown(rec, {"id", "x_m", "y_m", "override"}, where);
        if (!rec.contains("id") || !rec.at("id").is_string())
            throw std::invalid_argument(where + ": missing string field \"id\"");
        Turbine t;
        t.id = rec.at("id").get<std::string>();
        t.x = number_field(rec, "x_m", where);
        t.y = number_field(rec, "y_m", where);
        t.spec = rec.contains("override") ? apply_spec(rec.at("override"), defaults, where + ".override") : defaults;
        ts.push_back(std::move(t));
    }
    return FarmLayout(std::move(ts));
}

FarmLayout load_farm_file(const std::string & path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open layout file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_farm(ss.str());
}

std::string render_farm(const FarmLayout & farm) {
    // Defaults are taken from the first turbine; others only carry overrides
    // when they differ.
    const TurbineSpec & base = farm[0].spec;
    json doc;
    doc["schema"] = kLayoutSchema;
    doc["defaults"] = spec_json(base);
    json ts = json::array();
    for (const auto & t : farm) {
        json rec{{"id", t.id}, {"x_m", t.x}, {"y_m", t.y}};
        if (!(t.spec == base)) rec["override"] = spec_json(t.spec);
        ts.push_back(std::move(rec));
    }
    doc["turbines"] = std::move(ts);
    return doc.dump(2) + "\n";
}

} // namespace windctl
