#include <cmath>
#include <vector>

#include "doctest.h"
#include "dtrack/errors.hpp"
#include "dtrack/exposure.hpp"
#include "dtrack/portfolio.hpp"
#include "dtrack/vxx.hpp"
#include "support.hpp"

using namespace dtrack;
using testsup::state1;

namespace {

const ModelSpec kCir = make_cir(0.0, 20.0, 0.2, 0.4);

DerivativeSpec index_futures(double maturity) {
    return DerivativeSpec{InstrumentKind::FuturesOnIndex, maturity, 0.0, 0};
}

double futures_price(double t, double s, double maturity) {
    return price(kCir, state1(t, s), index_futures(maturity));
}

} // namespace

TEST_CASE("monthly calendar") {
    const RollCalendar cal = monthly_calendar(7);
    REQUIRE(cal.maturities.size() == 7);
    for (int i = 0; i < 7; ++i)
        CHECK(cal.maturities[i] == doctest::Approx((i + 1) / 12.0).epsilon(1e-15));
}

TEST_CASE("cycle lookup uses half-open intervals from the right") {
    const RollCalendar cal = monthly_calendar(3);
    CHECK(cycle_index(cal, 0.0) == 1);
    CHECK(cycle_index(cal, 0.05) == 1);
    CHECK(cycle_index(cal, 1.0 / 12.0) == 1);        // right endpoint included
    CHECK(cycle_index(cal, 1.0 / 12.0 + 1e-6) == 2); // strictly after the roll
    CHECK(cycle_index(cal, 0.2) == 3);
    CHECK(cycle_index(cal, 0.25) == 3);
    CHECK_THROWS_AS(cycle_index(cal, 0.25 + 1e-6), OutOfCalendar);
    CHECK_THROWS_AS(cycle_index(cal, -0.01), OutOfCalendar);
}

TEST_CASE("roll weights ramp from one to zero within each cycle") {
    const RollCalendar cal = monthly_calendar(3);
    auto [u0, v0] = vxx_weights(cal, 0.0);
    CHECK(u0 == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(v0 == doctest::Approx(0.0).epsilon(1e-14));

    auto [um, vm] = vxx_weights(cal, 1.0 / 24.0);
    CHECK(um == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(vm == doctest::Approx(0.5).epsilon(1e-12));

    // The ramp resets inside the second cycle.
    auto [u2, v2] = vxx_weights(cal, 1.0 / 12.0 + 1.0 / 48.0);
    CHECK(u2 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("roll portfolio replays by hand") {
    const TimeGrid g = make_grid(0.0, 0.25, 63); // daily grid, rolls on-grid
    const auto paths = simulate_paths(kCir, g, state1(0.0, 0.2), 1, 404);
    const SamplePath& path = paths[0];
    const RollCalendar cal = monthly_calendar(4);

    const VxxPath vxx = evolve_vxx(kCir, path, cal, 0.2);
    REQUIRE(vxx.values.size() == 64);
    REQUIRE(vxx.front_weight.size() == 63);
    CHECK(vxx.values[0] == 0.2);

    double v = 0.2;
    for (int k = 0; k < 63; ++k) {
        const double t = path.states[k].t;
        const double s = path.states[k].m[0];
        const double tn = path.states[k + 1].t;
        const double sn = path.states[k + 1].m[0];
        // A step starting on a roll date belongs to the incoming cycle.
        const int i = cycle_index(cal, t + 1e-9);
        const double t_front = cal.maturities[i - 1];
        const double t_next = cal.maturities[i];
        const double t_prev = i == 1 ? 0.0 : cal.maturities[i - 2];
        const double u = (t_front - t) / (t_front - t_prev);

        const double f1 = futures_price(t, s, t_front);
        const double f2 = futures_price(t, s, t_next);
        const double f1n = futures_price(tn, sn, t_front);
        const double f2n = futures_price(tn, sn, t_next);
        v *= 1.0 + u * (f1n - f1) / f1 + (1.0 - u) * (f2n - f2) / f2 +
             kCir.r * g.dt();

        CHECK(vxx.front_weight[k] == doctest::Approx(u).epsilon(1e-12));
        CHECK(vxx.front_price[k] == doctest::Approx(f1).epsilon(1e-13));
        CHECK(vxx.next_price[k] == doctest::Approx(f2).epsilon(1e-13));
        CHECK(vxx.values[k + 1] == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("roll dates must sit on the grid") {
    const TimeGrid g = make_grid(0.0, 0.2, 10); // dt = 0.02 misses 1/12
    const auto paths = simulate_paths(kCir, g, state1(0.0, 0.2), 1, 5);
    CHECK_THROWS_AS(evolve_vxx(kCir, paths[0], monthly_calendar(4), 0.2), ConfigError);
}

TEST_CASE("the calendar must supply a next contract through the horizon") {
    const TimeGrid g = make_grid(0.0, 0.5, 126);
    const auto paths = simulate_paths(kCir, g, state1(0.0, 0.2), 1, 5);
    CHECK_THROWS_AS(evolve_vxx(kCir, paths[0], monthly_calendar(6), 0.2),
                    OutOfCalendar);
    CHECK_NOTHROW(evolve_vxx(kCir, paths[0], monthly_calendar(7), 0.2));
}

TEST_CASE("implied exposure blends the two contracts' index elasticities") {
    const RollCalendar cal = monthly_calendar(3);
    const double t = 1.0 / 24.0, s = 0.25;
    const double tau1 = 1.0 / 12.0 - t, tau2 = 2.0 / 12.0 - t;
    const double f1 = futures_price(t, s, 1.0 / 12.0);
    const double f2 = futures_price(t, s, 2.0 / 12.0);
    const double u = 0.5;
    const double beta = u * (s / f1) * std::exp(-20.0 * tau1) +
                        (1.0 - u) * (s / f2) * std::exp(-20.0 * tau2);

    const ImpliedExposure ie = implied_exposure(kCir, cal, t, s);
    CHECK(ie.beta == doctest::Approx(beta).epsilon(1e-13));
    CHECK(ie.alpha ==
          doctest::Approx(kCir.r + beta * 20.0 * (1.0 - 0.2 / s)).epsilon(1e-13));
    // Dampened exposure: a far-maturity blend reacts less than one-for-one.
    CHECK(ie.beta > 0.0);
    CHECK(ie.beta < 1.0);
}

TEST_CASE("first-cycle implied exposure matches the expanded display") {
    const RollCalendar cal = monthly_calendar(3);
    const double t1 = 1.0 / 12.0, t2 = 2.0 / 12.0;
    testsup::Uniform rng(181);
    for (int i = 0; i < 25; ++i) {
        const double t = rng.in(1e-4, t1 - 1e-4);
        const double s = rng.in(0.1, 0.4);
        const double f1 = futures_price(t, s, t1);
        const double f2 = futures_price(t, s, t2);
        const double literal =
            (s / f1) * std::exp(-20.0 * (t1 - t)) -
            (t * s * std::exp(20.0 * t) / t1) *
                (std::exp(-20.0 * t1) / f1 - std::exp(-20.0 * t2) / f2);
        CHECK(implied_exposure(kCir, cal, t, s).beta ==
              doctest::Approx(literal).epsilon(1e-12));
    }
}

TEST_CASE("rolling tracker uses the single-contract strategy on the front") {
    const TimeGrid g = make_grid(0.0, 0.25, 63);
    const auto paths = simulate_paths(kCir, g, state1(0.0, 0.2), 1, 2121);
    const SamplePath& path = paths[0];
    const RollCalendar cal = monthly_calendar(4);
    const double beta = 1.0, x0 = 100.0;

    const TrackerPath tracker = evolve_rolling_tracker(kCir, path, cal, beta, x0);
    REQUIRE(tracker.values.size() == 64);
    CHECK(tracker.values[0] == x0);

    double x = x0;
    for (int k = 0; k < 63; ++k) {
        const double t = path.states[k].t;
        const double s = path.states[k].m[0];
        const int i = cycle_index(cal, t + 1e-9);
        const DerivativeSpec front = index_futures(cal.maturities[i - 1]);
        const double u = strategy_cir_futures(kCir, t, s, front, beta);
        const double f = futures_price(t, s, front.maturity);
        const double fn =
            futures_price(path.states[k + 1].t, path.states[k + 1].m[0], front.maturity);
        x *= 1.0 + u * (fn - f) / f + kCir.r * g.dt();
        CHECK(tracker.weights[k] == doctest::Approx(u).epsilon(1e-12));
        CHECK(tracker.values[k + 1] == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("roll portfolio realizes less variance than the index") {
    const TimeGrid g = make_grid(0.0, 1.0 / 12.0, 210); // dt = 1/2520
    const auto paths = simulate_paths(kCir, g, state1(0.0, 0.2), 1, 33);
    const VxxPath vxx = evolve_vxx(kCir, paths[0], monthly_calendar(3), 0.2);

    double qv_vxx = 0.0, qv_vix = 0.0;
    for (int k = 0; k < g.n_steps; ++k) {
        const double rv = std::log(vxx.values[k + 1] / vxx.values[k]);
        const double ri =
            std::log(paths[0].states[k + 1].m[0] / paths[0].states[k].m[0]);
        qv_vxx += rv * rv;
        qv_vix += ri * ri;
    }
    CHECK(qv_vxx < qv_vix);
}
