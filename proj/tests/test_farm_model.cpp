#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>

#include <windctl/farm_model.hpp>
#include <windctl/rng.hpp>

#include "oracles.hpp"

using namespace windctl;

namespace {

std::string message_of(const std::function<void()> & f) {
    try {
        f();
    } catch (const std::exception & e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("power curve anchors and interpolation") {
    const auto spec = default_turbine_spec();
    CHECK(available_power(spec, 0.0) == 0.0);
    CHECK(available_power(spec, 6.5) == 1.49e6);
    CHECK(available_power(spec, 10.0) == 6.42e6);
    CHECK(available_power(spec, 13.5) == 8.0e6);
    CHECK(available_power(spec, 25.0) == 8.0e6);
    // Halfway between the 6.5 and 10 m/s anchors.
    CHECK(available_power(spec, 8.25) == doctest::Approx(3.955e6).epsilon(1e-12));
    CHECK(available_power(spec, 8.25) == doctest::Approx(oracle::lerp(6.5, 1.49e6, 10.0, 6.42e6, 8.25)).epsilon(1e-12));
    CHECK(available_power(spec, 12.0) == doctest::Approx(oracle::lerp(10.0, 6.42e6, 13.5, 8e6, 12.0)).epsilon(1e-12));
}

TEST_CASE("available power is monotone and capped") {
    const auto spec = default_turbine_spec();
    Rng rng(11);
    for (int i = 0; i < 2000; ++i) {
        const double a = 30.0 * rng.uniform(), b = 30.0 * rng.uniform();
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(available_power(spec, lo) <= available_power(spec, hi));
        CHECK(available_power(spec, hi) <= spec.rated_power);
    }
}

TEST_CASE("shaft torque") {
    CHECK(shaft_torque(8e6, 1.0) == 8e6);
    CHECK(shaft_torque(0.0, 0.8) == 0.0);
    CHECK(shaft_torque(6.42e6, 1.25) == doctest::Approx(5.136e6).epsilon(1e-14));
    CHECK_THROWS_AS(shaft_torque(1e6, 0.0), std::domain_error);
    Rng rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double p = 8e6 * rng.uniform(), w = 0.1 + rng.uniform();
        CHECK(std::abs(shaft_torque(p, w) * w - p) <= 1e-12 * std::max(p, 1.0));
    }
}

TEST_CASE("rated quantities of the default spec") {
    const auto spec = default_turbine_spec();
    CHECK(spec.rated_speed() == 13.5);
    CHECK(spec.rated_rotor_speed() == 1.0);
    CHECK(spec.rotor_radius() == 82.0);
}

TEST_CASE("default farm geometry") {
    const auto farm = default_farm();
    REQUIRE(farm.size() == 24);
    CHECK(farm[0].id == "T01");
    CHECK(farm[23].id == "T24");
    CHECK(farm[0].x == 0.0);
    CHECK(farm[6].x == 500.0);
    CHECK(farm[1].y == 400.0);
    CHECK(farm[23].x == 1500.0);
    CHECK(farm[23].y == 2000.0);
    CHECK(farm.index_of("T07") == 6);
    CHECK_THROWS_AS(farm.index_of("nope"), std::out_of_range);
}

TEST_CASE("layout validation") {
    CHECK(message_of([] { FarmLayout{std::vector<Turbine>{}}; }) == "layout must contain at least one turbine");
    const auto spec = default_turbine_spec();
    const auto msg = message_of([&] {
        FarmLayout{{Turbine{"T07", 0, 0, spec}, Turbine{"T07", 500, 0, spec}}};
    });
    CHECK(msg.find("T07") != std::string::npos);
    CHECK_THROWS_AS((FarmLayout{{Turbine{"A", 0, 0, spec}, Turbine{"B", 0, 0, spec}}}), std::invalid_argument);

    auto bad = spec;
    bad.rotor_diameter = -1;
    CHECK_THROWS_AS((FarmLayout{{Turbine{"A", 0, 0, bad}}}), std::invalid_argument);
}

TEST_CASE("layout file round trip") {
    const auto farm = default_farm();
    CHECK(load_farm(render_farm(farm)) == farm);

    // Per-turbine overrides survive the round trip too.
    auto big = default_turbine_spec(200.0);
    std::vector<Turbine> ts(farm.begin(), farm.end());
    ts[5].spec = big;
    const FarmLayout mixed(ts);
    CHECK(load_farm(render_farm(mixed)) == mixed);

    Rng rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Turbine> rnd;
        const auto n = 1 + rng.below(10);
        for (std::size_t i = 0; i < n; ++i)
            rnd.push_back({"W" + std::to_string(i), 3000.0 * rng.uniform(), 3000.0 * rng.uniform(),
                           default_turbine_spec(100.0 + 100.0 * rng.uniform())});
        const FarmLayout f(rnd);
        CHECK(load_farm(render_farm(f)) == f);
    }
}

TEST_CASE("layout file diagnostics") {
    const std::string dup = R"({"schema":"windctl.layout/1","turbines":[
        {"id":"T07","x_m":0,"y_m":0},{"id":"T07","x_m":500,"y_m":0}]})";
    CHECK(message_of([&] { load_farm(dup); }).find("T07") != std::string::npos);

    const std::string empty = R"({"schema":"windctl.layout/1","turbines":[]})";
    CHECK(message_of([&] { load_farm(empty); }).find("at least one turbine") != std::string::npos);

    const std::string unknown = R"({"schema":"windctl.layout/1","turbines":[{"id":"A","x_m":0,"y_m":0,"z_m":3}]})";
    CHECK_THROWS_AS(load_farm(unknown), std::invalid_argument);
    CHECK_THROWS_AS(load_farm("not json"), std::invalid_argument);
}

TEST_CASE("wind condition normalization") {
    CHECK(WindCondition(-30.0, 11.0).direction == 330.0);
    CHECK(WindCondition(720.0, 11.0).direction == 0.0);
    CHECK(WindCondition(0.0, 11.0).unit() == std::pair<double, double>{1.0, 0.0});
    CHECK(WindCondition(90.0, 11.0).unit() == std::pair<double, double>{0.0, 1.0});
    CHECK_THROWS(WindCondition(0.0, -1.0));
}

TEST_CASE("set-point menu") {
    const SetPointMenu menu;
    REQUIRE(menu.size() == 3);
    CHECK(menu[0] == 1.49e6);
    CHECK(menu[1] == 6.42e6);
    CHECK(menu[2] == 8.0e6);
    CHECK_THROWS_AS(SetPointMenu({2e6, 1e6}), std::invalid_argument);
    CHECK_THROWS_AS(SetPointMenu(std::vector<Watts>{}), std::invalid_argument);
}

TEST_CASE("rotation preserves distances") {
    const auto farm = default_farm();
    const auto r = farm.rotated(30.0);
    for (std::size_t i = 0; i < farm.size(); ++i) {
        CHECK(std::hypot(r[i].x, r[i].y) == doctest::Approx(std::hypot(farm[i].x, farm[i].y)).epsilon(1e-12));
        CHECK(r[i].id == farm[i].id);
    }
}
