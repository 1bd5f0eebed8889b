#pragma once

#include <utility>
#include <vector>

#include "dtrack/model.hpp"
#include "dtrack/simulate.hpp"

namespace dtrack {

// Futures maturity calendar T_1 < T_2 < ... with the cycle convention T_0 = 0.
struct RollCalendar {
    std::vector<double> maturities;
};

// T_i = i/12 for i = 1..n_months.
RollCalendar monthly_calendar(int n_months);

// The cycle holding t: the smallest i with T_{i-1} < t <= T_i (t = 0 counts
// as cycle 1). Throws OutOfCalendar outside the calendar span.
int cycle_index(const RollCalendar& calendar, double t);

// Front/next weights of the deterministic roll strategy:
// u = (T_i - t)/(T_i - T_{i-1}) on the front contract, 1-u on the next.
// u reaches 1 at a cycle start and 0 at the roll.
std::pair<double, double> vxx_weights(const RollCalendar& calendar, double t);

// The roll portfolio evolved along a mean-reverting index path:
//   V_{k+1} = V_k (1 + u df1/f1 + (1-u) df2/f2 + r dt).
// A step beginning within 1e-9 of a maturity is attributed to the new cycle
// (the expiring contract's weight is 0 there in the limit), so no contract is
// ever priced past expiry. Requires a calendar long enough to supply a next
// contract through the grid end.
struct VxxPath {
    TimeGrid grid;
    std::vector<double> values;       // V_k, n_steps + 1 entries
    std::vector<double> front_weight; // u used on each step, n_steps entries
    std::vector<double> front_price;  // front futures at step start
    std::vector<double> next_price;   // next futures at step start
};

VxxPath evolve_vxx(const ModelSpec& cir, const SamplePath& path,
                   const RollCalendar& calendar, double v0);

// Index-exposure diagnostics implied by the roll portfolio's SDE at (t, S):
// beta is the mix of the two contracts' index elasticities under the weights
// at t, and alpha = r + beta kappa (1 - theta/S).
struct ImpliedExposure {
    double alpha = 0.0;
    double beta = 0.0;
};

ImpliedExposure implied_exposure(const ModelSpec& cir, const RollCalendar& calendar,
                                 double t, double s);

// The constant-beta comparison strategy on the rolling front-month contract:
// weights from strategy_cir_futures with the current front maturity, rolled
// on the same calendar.
struct TrackerPath {
    TimeGrid grid;
    std::vector<double> values;  // X_k, n_steps + 1 entries
    std::vector<double> weights; // u used on each step, n_steps entries
};

TrackerPath evolve_rolling_tracker(const ModelSpec& cir, const SamplePath& path,
                                   const RollCalendar& calendar, double beta, double x0);

} // namespace dtrack
