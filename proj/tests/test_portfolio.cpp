#include <cmath>
#include <vector>

#include "doctest.h"
#include "dtrack/errors.hpp"
#include "dtrack/portfolio.hpp"
#include "support.hpp"

using namespace dtrack;
using testsup::state1;
using testsup::state2;

namespace {

DerivativeSpec index_futures(double maturity) {
    return DerivativeSpec{InstrumentKind::FuturesOnIndex, maturity, 0.0, 0};
}

DerivativeSpec factor_futures(double maturity) {
    return DerivativeSpec{InstrumentKind::FuturesOnFactor, maturity, 0.0, 1};
}

DerivativeSpec call(double maturity, double strike) {
    return DerivativeSpec{InstrumentKind::EuropeanCall, maturity, strike, 0};
}

} // namespace

TEST_CASE("lognormal slippage closed form and its sign structure") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const StateVector st = state1(0.0, 50.0);
    auto z = [&](double beta) { return slippage(m, st, beta, {}); };

    CHECK(z(2.0) == doctest::Approx((0.05 + 0.04) * (1.0 - 2.0)).epsilon(1e-14));
    CHECK(z(-1.0) == doctest::Approx((0.05 - 0.02) * 2.0).epsilon(1e-14));

    // Zeros exactly at beta = -2r/sigma^2 = -2.5 and beta = 1.
    CHECK(z(-2.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(z(1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(z(-3.0) < 0.0);
    CHECK(z(-2.0) > 0.0);
    CHECK(z(0.5) > 0.0);
    CHECK(z(1.5) < 0.0);

    // State-independence under the lognormal model.
    CHECK(z(2.0) == slippage(m, state1(0.3, 97.0), 2.0, {}));
}

TEST_CASE("slippage closed forms match hand-expanded expressions") {
    const double beta = 1.3, eta = -0.4;

    const ModelSpec heston = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    const double y = 0.03;
    const double zh = 0.05 - 0.05 * beta - 2.0 * (0.04 / y - 1.0) * eta +
                      0.5 * beta * (1.0 - beta) * y +
                      0.5 * eta * (1.0 - eta) * 0.25 * 0.25 / y -
                      beta * eta * 0.25 * -0.5;
    CHECK(slippage(heston, state2(0.1, 80.0, y), beta, {eta}) ==
          doctest::Approx(zh).epsilon(1e-13));

    const ModelSpec cir = make_cir(0.0, 20.0, 0.2, 0.4);
    const double s = 0.25;
    const double zc =
        -beta * 20.0 * (0.2 / s - 1.0) + 0.5 * beta * (1.0 - beta) * 0.16 / s;
    CHECK(slippage(cir, state1(0.0, s), beta, {}) ==
          doctest::Approx(zc).epsilon(1e-13));

    const ModelSpec csqr = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    const double sc = 0.25, yc = 0.18;
    const double zq = 0.05 - beta * 25.0 * (yc / sc - 1.0) -
                      eta * 20.0 * (0.2 / yc - 1.0) +
                      0.5 * beta * (1.0 - beta) * 0.16 / sc +
                      0.5 * eta * (1.0 - eta) * 0.16 / yc -
                      beta * eta * 0.4 * 0.3 * 0.4 / std::sqrt(sc * yc);
    CHECK(slippage(csqr, state2(0.0, sc, yc), beta, {eta}) ==
          doctest::Approx(zq).epsilon(1e-13));
}

TEST_CASE("model closed forms agree with the generic evaluator") {
    testsup::Uniform u(555);
    const ModelSpec bs = make_bs(0.05, 0.2);
    const ModelSpec heston = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    const ModelSpec cir = make_cir(0.0, 20.0, 0.2, 0.4);
    const ModelSpec csqr = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    for (int i = 0; i < 100; ++i) {
        const double beta = u.in(-3.0, 3.0), eta = u.in(-2.0, 2.0);
        const StateVector s1 = state1(0.0, u.in(0.1, 100.0));
        const StateVector s2 = state2(0.0, u.in(0.1, 100.0), u.in(0.01, 0.5));
        CHECK(std::abs(slippage(bs, s1, beta, {}) - slippage_generic(bs, s1, beta, {})) <
              1e-11);
        CHECK(std::abs(slippage(heston, s2, beta, {eta}) -
                       slippage_generic(heston, s2, beta, {eta})) < 1e-11);
        CHECK(std::abs(slippage(cir, s1, beta, {}) -
                       slippage_generic(cir, s1, beta, {})) < 1e-11);
        CHECK(std::abs(slippage(csqr, s2, beta, {eta}) -
                       slippage_generic(csqr, s2, beta, {eta})) < 1e-11);
    }
    CHECK_THROWS_AS(slippage(heston, state2(0.0, 80.0, 0.03), 1.0, {}), ConfigError);
    CHECK_THROWS_AS(slippage(bs, state1(0.0, 50.0), 1.0, {0.5}), ConfigError);
}

TEST_CASE("futures book: one-step cash accounting") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.1, 1);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 1, 12345);
    const SamplePath& path = paths[0];
    const DerivativeSpec fut = index_futures(1.0);

    const double beta = 2.0, x0 = 100.0;
    const PortfolioPath port = evolve_portfolio(m, path, {fut}, beta, {}, x0);

    const double f0 = price(m, path.states[0], fut);
    const double f1 = price(m, path.states[1], fut);
    // Unit index elasticity: the wealth-fraction weight is beta itself, the
    // futures position is costless, and cash accrues on the whole wealth.
    const double expect = x0 * (1.0 + beta * (f1 - f0) / f0 + 0.05 * g.dt());
    CHECK(port.values[1] == doctest::Approx(expect).epsilon(1e-14));
    REQUIRE(port.weights.size() == 1);
    CHECK(port.weights[0][0] == doctest::Approx(beta).epsilon(1e-13));
}

TEST_CASE("priced book: one-step cash accounting") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.1, 1);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 1, 777);
    const SamplePath& path = paths[0];
    const DerivativeSpec c = call(0.5, 50.0);

    const double beta = 1.5, x0 = 100.0;
    const PortfolioPath port = evolve_portfolio(m, path, {c}, beta, {}, x0);

    const double c0 = price(m, path.states[0], c);
    const double c1 = price(m, path.states[1], c);
    const ElasticityRow row = elasticities(m, path.states[0], c);
    const double w = beta / row.index_elasticity;
    const double expect =
        x0 * (1.0 + w * (c1 - c0) / c0 + 0.05 * (1.0 - w) * g.dt());
    CHECK(port.values[1] == doctest::Approx(expect).epsilon(1e-13));
    CHECK(port.weights[0][0] == doctest::Approx(w).epsilon(1e-13));
}

TEST_CASE("mixed book: priced and futures legs settle separately") {
    const ModelSpec m = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    const TimeGrid g = make_grid(0.0, 0.1, 2);
    const auto paths = simulate_paths(m, g, state2(0.0, 100.0, 0.04), 1, 31);
    const SamplePath& path = paths[0];
    const std::vector<DerivativeSpec> book{index_futures(1.0), factor_futures(0.5)};

    const double beta = 1.0, eta = 0.5, x0 = 100.0;
    const PortfolioPath port = evolve_portfolio(m, path, book, beta, {eta}, x0);

    // Hand-rolled evolution: both instruments are futures, so wealth sits in
    // cash and the legs settle variation margin every step.
    double x = x0;
    for (int k = 0; k < 2; ++k) {
        const StateVector& here = path.states[k];
        std::vector<ElasticityRow> rows{elasticities(m, here, book[0]),
                                        elasticities(m, here, book[1])};
        const WeightSolution sol =
            solve_weights(rows, make_target(m, here, beta, {eta}), m.r);
        double gain = 0.0;
        for (int j = 0; j < 2; ++j) {
            const double pj = price(m, here, book[j]);
            const double pn = price(m, path.states[k + 1], book[j]);
            gain += sol.weights[j] * x / pj * (pn - pj);
        }
        x = x * (1.0 + m.r * g.dt()) + gain;
        CHECK(port.values[k + 1] == doctest::Approx(x).epsilon(1e-13));
    }
}

TEST_CASE("units stay fixed between sparse rebalances") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.25, 6);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 1, 99);
    const SamplePath& path = paths[0];
    const DerivativeSpec fut = index_futures(1.0);
    const double beta = 2.0, x0 = 100.0;

    const PortfolioPath port = evolve_portfolio(m, path, {fut}, beta, {}, x0, 3);

    double x = x0;
    double units = 0.0;
    for (int k = 0; k < 6; ++k) {
        const double fk = price(m, path.states[k], fut);
        const double fn = price(m, path.states[k + 1], fut);
        if (k % 3 == 0) units = beta * x / fk; // refit at the rebalance
        x = x * (1.0 + 0.05 * g.dt()) + units * (fn - fk);
        CHECK(port.values[k + 1] == doctest::Approx(x).epsilon(1e-12));
        // Recorded weights are the implied wealth fractions each step.
        CHECK(port.weights[k][0] ==
              doctest::Approx(units * fk / port.values[k]).epsilon(1e-12));
    }
}

TEST_CASE("portfolio input validation") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.5, 4);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 1, 5);

    CHECK_THROWS_AS(
        evolve_portfolio(m, paths[0], {index_futures(0.25)}, 1.0, {}, 100.0),
        InvalidHorizon);
    CHECK_THROWS_AS(evolve_portfolio(m, paths[0], {}, 1.0, {}, 100.0), ConfigError);
    CHECK_THROWS_AS(
        evolve_portfolio(m, paths[0], {index_futures(1.0)}, 1.0, {}, -5.0),
        ConfigError);
    CHECK_THROWS_AS(
        evolve_portfolio(m, paths[0], {index_futures(1.0)}, 1.0, {}, 100.0, 0),
        ConfigError);
}

TEST_CASE("an unattainable factor target surfaces mid-evolution") {
    const ModelSpec m = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    const TimeGrid g = make_grid(0.0, 0.1, 4);
    const auto paths = simulate_paths(m, g, state2(0.0, 100.0, 0.04), 1, 8);
    const std::vector<DerivativeSpec> two_index{index_futures(0.5), index_futures(1.0)};
    CHECK_THROWS_AS(evolve_portfolio(m, paths[0], two_index, 1.0, {0.5}, 100.0),
                    SingularSystem);
}

TEST_CASE("extreme leverage bankrupts and freezes the path") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.5, 8);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 16, 2024);
    bool saw_bankruptcy = false;
    for (const auto& path : paths) {
        const PortfolioPath port =
            evolve_portfolio(m, path, {index_futures(1.0)}, 60.0, {}, 100.0);
        if (!port.bankrupt) continue;
        saw_bankruptcy = true;
        REQUIRE(port.bankrupt_step >= 0);
        const double frozen = port.values[port.bankrupt_step + 1];
        CHECK(frozen <= 0.0);
        for (int k = port.bankrupt_step + 1; k <= g.n_steps; ++k)
            CHECK(port.values[k] == frozen);
    }
    CHECK(saw_bankruptcy);
}

TEST_CASE("pathwise identity: discrete wealth tracks the closed form") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.5, 500);
    const auto paths = simulate_paths(m, g, state1(0.0, 50.0), 4, 42);
    for (const auto& path : paths) {
        const PortfolioPath port =
            evolve_portfolio(m, path, {index_futures(1.0)}, 2.0, {}, 100.0);
        const double err = verify_prop2(port, path, 2.0, {});
        CHECK(err < 0.02);
        CHECK(err > 0.0);

        // The identity is explicit: X = X0 (S/S0)^beta e^{int Z}, with the
        // integral taken by trapezoid exactly as stored on the portfolio.
        double worst = 0.0;
        for (int k = 0; k <= g.n_steps; ++k) {
            const double s_ratio = path.states[k].m[0] / path.states[0].m[0];
            const double closed =
                100.0 * std::pow(s_ratio, 2.0) * std::exp(port.integrated_slippage[k]);
            worst = std::max(worst, std::abs(port.values[k] - closed) / closed);
        }
        CHECK(err == doctest::Approx(worst).epsilon(1e-12));
    }
}

TEST_CASE("pathwise identity rejects nonpositive states") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const TimeGrid g = make_grid(0.0, 0.1, 2);
    auto paths = simulate_paths(m, g, state1(0.0, 50.0), 1, 6);
    const PortfolioPath port =
        evolve_portfolio(m, paths[0], {index_futures(1.0)}, 1.0, {}, 100.0);
    SamplePath corrupted = paths[0];
    corrupted.states[1].m[0] = 0.0;
    CHECK_THROWS_AS(verify_prop2(port, corrupted, 1.0, {}), NumericalError);
}

TEST_CASE("exposure-weighted benchmark") {
    const ModelSpec m = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    const TimeGrid g = make_grid(0.0, 0.1, 20);
    const auto paths = simulate_paths(m, g, state2(0.0, 0.25, 0.18), 1, 11);
    const double beta = 1.2, eta = -0.3, x0 = 100.0;
    const BenchmarkPath bench = benchmark_series(paths[0], beta, {eta}, x0);
    REQUIRE(bench.values.size() == static_cast<std::size_t>(g.n_points()));
    CHECK(bench.values[0] == x0);
    for (int k = 0; k <= g.n_steps; ++k) {
        const double s_ratio = paths[0].states[k].m[0] / 0.25;
        const double y_ratio = paths[0].states[k].m[1] / 0.18;
        CHECK(bench.values[k] ==
              doctest::Approx(x0 * std::pow(s_ratio, beta) * std::pow(y_ratio, eta))
                  .epsilon(1e-12));
    }
}

TEST_CASE("slippage series evaluates the rate along the path") {
    const ModelSpec m = make_cir(0.0, 20.0, 0.2, 0.4);
    const TimeGrid g = make_grid(0.0, 0.1, 10);
    const auto paths = simulate_paths(m, g, state1(0.0, 0.2), 1, 3);
    const auto series = slippage_series(m, paths[0], 1.0, {});
    REQUIRE(series.size() == static_cast<std::size_t>(g.n_points()));
    for (int k = 0; k <= g.n_steps; ++k)
        CHECK(series[k] == slippage(m, paths[0].states[k], 1.0, {}));
}
