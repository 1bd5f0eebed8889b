#pragma once

#include <vector>

#include "dtrack/exposure.hpp"
#include "dtrack/pricing.hpp"
#include "dtrack/simulate.hpp"

namespace dtrack {

// A self-financing portfolio evolved along one simulated path.
struct PortfolioPath {
    TimeGrid grid;
    std::vector<double> values;               // X_k, n_steps + 1 entries
    std::vector<std::vector<double>> weights; // per-step wealth fractions, n_steps rows
    std::vector<double> slippage;             // Z at grid points, n_steps + 1 entries
    std::vector<double> integrated_slippage;  // cumulative trapezoid of Z
    bool bankrupt = false;
    int bankrupt_step = -1; // first step whose update produced X <= 0
};

// Evolves the constant-target tracking portfolio along `path`, rebalancing
// every `rebalance_every` steps (1 = every step). Weights come from
// solve_weights on the instruments' elasticity rows; between rebalances the
// instrument UNITS stay fixed and cash accrues at r, which at
// rebalance_every = 1 reduces exactly to the per-step updates
//   X_{k+1} = X_k (1 + sum w dc/c + r (1 - sum w) dt)   (priced derivatives)
//   X_{k+1} = X_k (1 + sum u df/f + r dt)               (futures: costless legs)
// and to their mixed-book combination in general.
// All instrument maturities must reach the grid end. A step that lands at
// X <= 0 marks the path bankrupt; the value is frozen there and reported.
// A singular exposure system mid-path propagates SingularSystem.
PortfolioPath evolve_portfolio(const ModelSpec& model, const SamplePath& path,
                               const std::vector<DerivativeSpec>& instruments,
                               double beta, const std::vector<double>& etas, double x0,
                               int rebalance_every = 1);

// The slippage rate at one state for constant targets: the model's closed
// form (dispatch) and the model-agnostic evaluator built from drift_vol.
// The two agree to round-off; both are exposed so tests can pin it.
double slippage(const ModelSpec& model, const StateVector& state, double beta,
                const std::vector<double>& etas);
double slippage_generic(const ModelSpec& model, const StateVector& state, double beta,
                        const std::vector<double>& etas);

// slippage() evaluated along a path.
std::vector<double> slippage_series(const ModelSpec& model, const SamplePath& path,
                                    double beta, const std::vector<double>& etas);

// Worst relative error, over all grid points, of the portfolio value against
// the closed-form expression X_0 (S/S_0)^beta prod (Y/Y_0)^eta exp(int Z dv)
// with the integral taken by trapezoid on the grid. This is the pathwise
// identity the whole engine is built to satisfy; the discrete defect shrinks
// with dt.
double verify_prop2(const PortfolioPath& portfolio, const SamplePath& path, double beta,
                    const std::vector<double>& etas);

// The exposure-weighted benchmark: log-value increments equal beta times the
// index log-return plus eta-weighted factor log-returns, started at x0.
struct BenchmarkPath {
    std::vector<double> values;
};

BenchmarkPath benchmark_series(const SamplePath& path, double beta,
                               const std::vector<double>& etas, double x0);

} // namespace dtrack
