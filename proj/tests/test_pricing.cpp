#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "dtrack/errors.hpp"
#include "dtrack/pricing.hpp"
#include "dtrack/rng.hpp"
#include "support.hpp"

using namespace dtrack;
using testsup::state1;
using testsup::state2;

namespace {

DerivativeSpec call(double maturity, double strike) {
    DerivativeSpec d;
    d.kind = InstrumentKind::EuropeanCall;
    d.maturity = maturity;
    d.strike = strike;
    return d;
}

DerivativeSpec index_futures(double maturity) {
    DerivativeSpec d;
    d.kind = InstrumentKind::FuturesOnIndex;
    d.maturity = maturity;
    return d;
}

DerivativeSpec factor_futures(double maturity, int leg = 1) {
    DerivativeSpec d;
    d.kind = InstrumentKind::FuturesOnFactor;
    d.maturity = maturity;
    d.leg = leg;
    return d;
}

std::string write_temp(const std::string& name, const std::string& text) {
    std::ofstream out(name);
    out << text;
    return name;
}

} // namespace

TEST_CASE("call price: at-the-money oracle") {
    // 30-digit reference evaluation of the lognormal formula, frozen.
    const ModelSpec m = make_bs(0.05, 0.2);
    const double c = price(m, state1(0.0, 50.0), call(0.5, 50.0));
    CHECK(testsup::rel_diff(c, 3.4443642888403088) < 1e-12);
    CHECK(price_bs_call(m, 0.0, 50.0, call(0.5, 50.0)) == c);
}

TEST_CASE("call price: deep in the money stays inside the arbitrage band") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const double c = price(m, state1(0.0, 100.0), call(0.5, 50.0));
    CHECK(testsup::rel_diff(c, 51.234504744174355) < 1e-12);
    CHECK(c > 100.0 - 50.0 * std::exp(-0.05 * 0.5)); // forward intrinsic bound
    CHECK(c < 100.0);
}

TEST_CASE("call price: maturity edge behavior") {
    const ModelSpec m = make_bs(0.05, 0.2);
    // At maturity the call is worth its payoff.
    CHECK(price(m, state1(0.5, 60.0), call(0.5, 50.0)) == doctest::Approx(10.0));
    CHECK(price(m, state1(0.5, 40.0), call(0.5, 50.0)) == 0.0);
    // Slack absorbs grid round-off just past maturity...
    CHECK_NOTHROW(price(m, state1(0.5 + 5e-10, 60.0), call(0.5, 50.0)));
    // ...but a genuinely expired contract is an error.
    CHECK_THROWS_AS(price(m, state1(0.5 + 1e-6, 60.0), call(0.5, 50.0)),
                    ExpiredContract);
    CHECK_THROWS_AS(price(m, state1(0.0, 60.0), call(0.5, 0.0)), ConfigError);
}

TEST_CASE("index futures closed forms") {
    const ModelSpec bs = make_bs(0.05, 0.2);
    CHECK(price(bs, state1(0.0, 50.0), index_futures(1.0)) ==
          doctest::Approx(50.0 * std::exp(0.05)).epsilon(1e-14));

    const ModelSpec heston = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    CHECK(price(heston, state2(0.25, 80.0, 0.03), index_futures(1.0)) ==
          doctest::Approx(80.0 * std::exp(0.05 * 0.75)).epsilon(1e-14));

    // Mean-reverting index: f = theta + (S - theta) e^{-kappa tau}, pinned
    // against an independently computed constant (and e^{5/3} itself).
    const ModelSpec cir = make_cir(0.0, 20.0, 0.2, 0.4);
    const double f = price(cir, state1(0.0, 0.25), index_futures(1.0 / 12.0));
    CHECK(testsup::rel_diff(f, 0.20944378014187809) < 1e-13);
    CHECK(testsup::rel_diff(std::exp(5.0 / 3.0), 5.2944900504700294) < 1e-15);

    // At maturity the futures equals the spot.
    CHECK(price(cir, state1(1.0 / 12.0, 0.31), index_futures(1.0 / 12.0)) ==
          doctest::Approx(0.31).epsilon(1e-14));
}

TEST_CASE("two-speed index futures: distinct and equal reversion speeds") {
    const ModelSpec csqr = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    const double f =
        price(csqr, state2(0.0, 0.25, 0.18), index_futures(1.0 / 12.0));
    CHECK(testsup::rel_diff(f, 0.19978961043286226) < 1e-13);

    const ModelSpec equal = make_csqr(0.05, 20.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    const double fe =
        price(equal, state2(0.0, 0.25, 0.18), index_futures(1.0 / 12.0));
    CHECK(testsup::rel_diff(fe, 0.20314792671395936) < 1e-13);

    // The equal-speed branch is the continuous limit of the general one.
    const ModelSpec near = make_csqr(0.05, 20.0 + 1e-7, 0.4, 20.0, 0.2, 0.4, 0.3);
    const double fn = price(near, state2(0.0, 0.25, 0.18), index_futures(1.0 / 12.0));
    CHECK(testsup::rel_diff(fn, fe) < 1e-8);
}

TEST_CASE("factor futures closed forms") {
    const ModelSpec heston = make_heston(0.05, 2.0, 0.04, 0.25, -0.5);
    const double f = price(heston, state2(0.0, 100.0, 0.03), factor_futures(0.25));
    CHECK(testsup::rel_diff(f, 0.033934693402873666) < 1e-13);

    const ModelSpec csqr = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);
    const double g = price(csqr, state2(0.0, 0.25, 0.18), factor_futures(0.25));
    CHECK(g == doctest::Approx(0.2 + (0.18 - 0.2) * std::exp(-20.0 * 0.25))
                   .epsilon(1e-13));
}

TEST_CASE("unsupported model/instrument pairs are rejected") {
    const StateVector s1 = state1(0.0, 0.25);
    const StateVector s2 = state2(0.0, 100.0, 0.04);
    CHECK_THROWS_AS(price(make_cir(0.0, 20.0, 0.2, 0.4), s1, call(0.5, 0.2)),
                    UnsupportedPair);
    CHECK_THROWS_AS(price(make_heston(0.05, 2.0, 0.04, 0.25, -0.5), s2, call(0.5, 100.0)),
                    UnsupportedPair);
    CHECK_THROWS_AS(price(make_bs(0.05, 0.2), state1(0.0, 100.0), factor_futures(0.5)),
                    UnsupportedPair);
    CHECK_THROWS_AS(price(make_cir(0.0, 20.0, 0.2, 0.4), s1, factor_futures(0.5)),
                    UnsupportedPair);
    // Factor futures address exactly the single factor leg.
    CHECK_THROWS_AS(price(make_heston(0.05, 2.0, 0.04, 0.25, -0.5), s2,
                          factor_futures(0.5, 0)),
                    ConfigError);
    CHECK_THROWS_AS(price(make_heston(0.05, 2.0, 0.04, 0.25, -0.5), s2,
                          factor_futures(0.5, 2)),
                    ConfigError);
}

TEST_CASE("finite-difference sensitivities approximate the closed forms") {
    const ModelSpec m = make_bs(0.05, 0.2);
    const auto fd = greeks_fd(m, state1(0.0, 50.0), call(0.5, 50.0), 1e-4);
    REQUIRE(fd.size() == 1);
    CHECK(std::abs(fd[0] - 0.59773446890843825) < 1e-6);

    // Futures are affine in the state, so central differences are exact to
    // round-off.
    const ModelSpec cir = make_cir(0.0, 20.0, 0.2, 0.4);
    const auto fdc = greeks_fd(cir, state1(0.0, 0.25), index_futures(0.5), 1e-4);
    CHECK(testsup::rel_diff(fdc[0], std::exp(-20.0 * 0.5)) < 1e-10);

    CHECK_THROWS_AS(greeks_fd(m, state1(0.0, 50.0), call(0.5, 50.0), 0.0), ConfigError);
    CHECK_THROWS_AS(greeks_fd(m, state1(0.0, 50.0), call(0.5, 50.0), 0.1), ConfigError);
}

TEST_CASE("curve fit: exact round trip") {
    const double kappa = 5.0, theta = 0.3, s_now = 0.2;
    std::vector<FuturesQuote> quotes;
    for (double tau : {0.1, 0.3, 0.6, 1.0})
        quotes.push_back({tau, theta + (s_now - theta) * std::exp(-kappa * tau)});
    const CirCalibration fit = calibrate_cir(quotes, s_now);
    CHECK(std::abs(fit.kappa - kappa) / kappa < 1e-8);
    CHECK(std::abs(fit.theta - theta) / theta < 1e-8);
    CHECK(fit.residual_norm < 1e-9);
    CHECK_FALSE(fit.degenerate_flat);
}

TEST_CASE("curve fit: flat strip is reported as degenerate") {
    std::vector<FuturesQuote> quotes{{0.25, 0.2}, {0.5, 0.2}, {1.0, 0.2}};
    const CirCalibration fit = calibrate_cir(quotes, 0.2);
    CHECK(fit.degenerate_flat);
    CHECK(fit.theta == doctest::Approx(0.2));
    CHECK(fit.kappa == doctest::Approx(1.0));
    CHECK(fit.residual_norm == 0.0);
}

TEST_CASE("curve fit: input validation") {
    CHECK_THROWS_AS(calibrate_cir({{0.5, 0.2}}, 0.2), InsufficientQuotes);
    CHECK_THROWS_AS(calibrate_cir({{0.5, 0.2}, {0.5, 0.21}}, 0.2), InsufficientQuotes);
    CHECK_THROWS_AS(calibrate_cir({{0.5, 0.2}, {1.0, 0.21}}, 0.0), ConfigError);
    CHECK_THROWS_AS(calibrate_cir({{0.5, -0.2}, {1.0, 0.21}}, 0.2), ConfigError);
    CHECK_THROWS_AS(calibrate_cir({{-0.5, 0.2}, {1.0, 0.21}}, 0.2), ConfigError);
}

TEST_CASE("curve fit: a strip demanding a negative long level diverges") {
    // Prices decaying well below any positive asymptote force the profiled
    // level negative at the best reversion speed.
    std::vector<FuturesQuote> quotes{{0.5, 0.1}, {1.0, 0.005}};
    CHECK_THROWS_AS(calibrate_cir(quotes, 1.0), FitDiverged);
}

TEST_CASE("quote file reader") {
    const std::string good = write_temp(
        "quotes_good.csv", "maturity_years,price\n0.25,0.21\n0.5,0.215\n");
    const auto quotes = read_quotes_csv(good);
    REQUIRE(quotes.size() == 2);
    CHECK(quotes[0].maturity == 0.25);
    CHECK(quotes[1].price == 0.215);

    CHECK_THROWS_AS(read_quotes_csv("no_such_file.csv"), IoError);

    const std::string bad_header =
        write_temp("quotes_bad_header.csv", "tenor,price\n0.25,0.21\n");
    CHECK_THROWS_AS(read_quotes_csv(bad_header), ConfigError);

    const std::string bad_number =
        write_temp("quotes_bad_number.csv", "maturity_years,price\n0.25,abc\n");
    try {
        read_quotes_csv(bad_number);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    std::remove(good.c_str());
    std::remove(bad_header.c_str());
    std::remove(bad_number.c_str());
}

TEST_CASE("normal cdf accuracy at reference points") {
    CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
    // Phi(1) to 16 digits.
    CHECK(testsup::rel_diff(norm_cdf(1.0), 0.8413447460685429) < 1e-14);
    CHECK(testsup::rel_diff(norm_cdf(-1.0), 0.15865525393145705) < 1e-14);
}
