#pragma once

#include <string>
#include <vector>

#include "dtrack/model.hpp"

namespace dtrack {

enum class InstrumentKind { EuropeanCall, FuturesOnIndex, FuturesOnFactor };

const char* to_string(InstrumentKind kind);

// A futures or European call contract. `leg` names the underlying state
// component: 0 is the index, i >= 1 is factor i (futures-on-factor only).
struct DerivativeSpec {
    InstrumentKind kind = InstrumentKind::FuturesOnIndex;
    double maturity = 0.0;
    double strike = 0.0; // calls only
    int leg = 0;
};

// Closed-form price of the contract under the given model. Supported pairs:
//   BlackScholes: call, index futures
//   Heston:       index futures, factor (variance) futures
//   CIR:          index futures
//   CSQR:         index futures, factor futures
// Anything else throws UnsupportedPair. Pricing at t > maturity throws
// ExpiredContract; a slack of 1e-9 absorbs grid round-off, and calls return
// their payoff at t = maturity.
double price(const ModelSpec& model, const StateVector& state, const DerivativeSpec& spec);

// The Black-Scholes call formula, exposed directly.
double price_bs_call(const ModelSpec& model, double t, double s, const DerivativeSpec& spec);

// Futures closed forms for all supported model/leg pairs.
double price_futures(const ModelSpec& model, const StateVector& state, const DerivativeSpec& spec);

// Central finite differences of price() with respect to each state component,
// at relative bump size `bump` in (0, 1e-2]. Oracle for the closed-form
// elasticities.
std::vector<double> greeks_fd(const ModelSpec& model, const StateVector& state,
                              const DerivativeSpec& spec, double bump = 1e-4);

struct FuturesQuote {
    double maturity = 0.0; // years
    double price = 0.0;
};

struct CirCalibration {
    double kappa = 0.0;
    double theta = 0.0;
    double residual_norm = 0.0; // root-mean-square price residual
    bool degenerate_flat = false;
};

// Least-squares fit of the mean-reverting futures curve
// f(tau) = theta + (s_now - theta) e^{-kappa tau} to the quotes, over
// kappa > 0, theta > 0. theta is profiled out in closed form for each kappa;
// the remaining 1-D objective is minimized with multi-start bracketed search
// (starts kappa in {1, 5, 20, 50}) because it is not convex in kappa.
// A flat quote strip equal to s_now is reported as degenerate_flat (theta =
// s_now fits exactly for every kappa).
CirCalibration calibrate_cir(const std::vector<FuturesQuote>& quotes, double s_now);

// Reads a quote CSV with header "maturity_years,price".
std::vector<FuturesQuote> read_quotes_csv(const std::string& path);

} // namespace dtrack
