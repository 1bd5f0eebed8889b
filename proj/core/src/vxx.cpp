#include "dtrack/vxx.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtrack/errors.hpp"
#include "dtrack/exposure.hpp"
#include "dtrack/pricing.hpp"

namespace dtrack {

namespace {

// Grid points landing this close to a roll date count as the roll itself.
constexpr double kRollSlack = 1e-9;

void check_calendar(const RollCalendar& calendar) {
    if (calendar.maturities.empty()) throw ConfigError("empty roll calendar");
    double prev = 0.0;
    for (double t : calendar.maturities) {
        if (!(t > prev))
            throw ConfigError("roll calendar maturities must be strictly increasing "
                              "and positive");
        prev = t;
    }
}

void check_cir(const ModelSpec& model) {
    if (model.kind != ModelKind::CIR)
        throw ConfigError("roll portfolios are defined on the mean-reverting index");
}

// Roll dates strictly inside the grid span must coincide with grid points, or
// a step would straddle an expiry and mark a contract past its maturity.
void check_roll_alignment(const TimeGrid& grid, const RollCalendar& calendar) {
    const double dt = grid.dt();
    for (double maturity : calendar.maturities) {
        if (maturity <= grid.t0 + kRollSlack || maturity >= grid.T - kRollSlack) continue;
        const double steps = (maturity - grid.t0) / dt;
        const double nearest = grid.t0 + std::round(steps) * dt;
        if (std::abs(nearest - maturity) > kRollSlack)
            throw ConfigError("roll date " + std::to_string(maturity) +
                              " falls between grid points");
    }
}

// Cycle lookup for a step starting at t, with the left-closed convention:
// starting within the slack of a maturity already belongs to the next cycle.
int step_cycle(const RollCalendar& calendar, double t) {
    return cycle_index(calendar, t + kRollSlack);
}

double cycle_start(const RollCalendar& calendar, int i) {
    return i == 1 ? 0.0 : calendar.maturities[static_cast<std::size_t>(i) - 2];
}

double front_maturity(const RollCalendar& calendar, int i) {
    return calendar.maturities[static_cast<std::size_t>(i) - 1];
}

double next_maturity(const RollCalendar& calendar, int i) {
    if (static_cast<std::size_t>(i) >= calendar.maturities.size())
        throw OutOfCalendar("no next contract after maturity " +
                            std::to_string(front_maturity(calendar, i)));
    return calendar.maturities[static_cast<std::size_t>(i)];
}

} // namespace

RollCalendar monthly_calendar(int n_months) {
    if (n_months < 1) throw ConfigError("need at least one contract month");
    RollCalendar calendar;
    calendar.maturities.resize(static_cast<std::size_t>(n_months));
    for (int i = 1; i <= n_months; ++i)
        calendar.maturities[static_cast<std::size_t>(i) - 1] = i / 12.0;
    return calendar;
}

int cycle_index(const RollCalendar& calendar, double t) {
    check_calendar(calendar);
    if (t < -kRollSlack || t > calendar.maturities.back() + kRollSlack)
        throw OutOfCalendar("t = " + std::to_string(t) + " outside the calendar span");
    if (t <= 0.0) return 1;
    for (std::size_t i = 0; i < calendar.maturities.size(); ++i)
        if (t <= calendar.maturities[i]) return static_cast<int>(i) + 1;
    return static_cast<int>(calendar.maturities.size()); // t within slack of the back
}

std::pair<double, double> vxx_weights(const RollCalendar& calendar, double t) {
    const int i = cycle_index(calendar, t);
    const double lo = cycle_start(calendar, i);
    const double hi = front_maturity(calendar, i);
    const double u = (hi - t) / (hi - lo);
    return {u, 1.0 - u};
}

VxxPath evolve_vxx(const ModelSpec& cir, const SamplePath& path,
                   const RollCalendar& calendar, double v0) {
    check_cir(cir);
    check_calendar(calendar);
    if (!(v0 > 0.0)) throw ConfigError("initial value must be > 0");
    const TimeGrid& grid = path.grid;
    if (path.states.size() != static_cast<std::size_t>(grid.n_points())) throw ConfigError("path/grid size mismatch");
    check_roll_alignment(grid, calendar);

    VxxPath out;
    out.grid = grid;
    out.values.assign(grid.n_points(), 0.0);
    out.front_weight.resize(grid.n_steps);
    out.front_price.resize(grid.n_steps);
    out.next_price.resize(grid.n_steps);
    out.values[0] = v0;

    const double dt = grid.dt();
    for (int k = 0; k < grid.n_steps; ++k) {
        const double t_here = grid.t(k);
        const int i = step_cycle(calendar, t_here);
        const double t1 = front_maturity(calendar, i);
        const double t2 = next_maturity(calendar, i);
        const double lo = cycle_start(calendar, i);
        const double u = (t1 - t_here) / (t1 - lo);

        const DerivativeSpec front{InstrumentKind::FuturesOnIndex, t1, 0.0, 0};
        const DerivativeSpec next{InstrumentKind::FuturesOnIndex, t2, 0.0, 0};
        const double f1 = price_futures(cir, path.states[static_cast<std::size_t>(k)], front);
        const double f2 = price_futures(cir, path.states[static_cast<std::size_t>(k)], next);
        const double f1_next =
            price_futures(cir, path.states[static_cast<std::size_t>(k) + 1], front);
        const double f2_next =
            price_futures(cir, path.states[static_cast<std::size_t>(k) + 1], next);

        out.front_weight[static_cast<std::size_t>(k)] = u;
        out.front_price[static_cast<std::size_t>(k)] = f1;
        out.next_price[static_cast<std::size_t>(k)] = f2;
        out.values[static_cast<std::size_t>(k) + 1] =
            out.values[static_cast<std::size_t>(k)] *
            (1.0 + u * (f1_next - f1) / f1 + (1.0 - u) * (f2_next - f2) / f2 +
             cir.r * dt);
    }
    return out;
}

ImpliedExposure implied_exposure(const ModelSpec& cir, const RollCalendar& calendar,
                                 double t, double s) {
    check_cir(cir);
    if (!(s > 0.0)) throw ConfigError("index level must be > 0");
    const int i = cycle_index(calendar, t);
    const double t1 = front_maturity(calendar, i);
    const double t2 = next_maturity(calendar, i);
    const auto [u, u_next] = vxx_weights(calendar, t);

    const StateVector state{t, {s}};
    const double f1 =
        price_futures(cir, state, DerivativeSpec{InstrumentKind::FuturesOnIndex, t1, 0.0, 0});
    const double f2 =
        price_futures(cir, state, DerivativeSpec{InstrumentKind::FuturesOnIndex, t2, 0.0, 0});

    ImpliedExposure out;
    out.beta = u * (s / f1) * std::exp(-cir.kappa * (t1 - t)) +
               u_next * (s / f2) * std::exp(-cir.kappa * (t2 - t));
    out.alpha = cir.r + out.beta * cir.kappa * (1.0 - cir.theta / s);
    return out;
}

TrackerPath evolve_rolling_tracker(const ModelSpec& cir, const SamplePath& path,
                                   const RollCalendar& calendar, double beta, double x0) {
    check_cir(cir);
    check_calendar(calendar);
    if (!(x0 > 0.0)) throw ConfigError("initial wealth must be > 0");
    const TimeGrid& grid = path.grid;
    if (path.states.size() != static_cast<std::size_t>(grid.n_points())) throw ConfigError("path/grid size mismatch");
    check_roll_alignment(grid, calendar);

    TrackerPath out;
    out.grid = grid;
    out.values.assign(grid.n_points(), 0.0);
    out.weights.resize(grid.n_steps);
    out.values[0] = x0;

    const double dt = grid.dt();
    for (int k = 0; k < grid.n_steps; ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        const double t_here = grid.t(k);
        const int i = step_cycle(calendar, t_here);
        const DerivativeSpec front{InstrumentKind::FuturesOnIndex,
                                   front_maturity(calendar, i), 0.0, 0};
        const double s_here = path.states[kk].s();
        const double u = strategy_cir_futures(cir, t_here, s_here, front, beta);
        const double f1 = price_futures(cir, path.states[kk], front);
        const double f1_next = price_futures(cir, path.states[kk + 1], front);
        out.weights[kk] = u;
        out.values[kk + 1] =
            out.values[kk] * (1.0 + u * (f1_next - f1) / f1 + cir.r * dt);
    }
    return out;
}

} // namespace dtrack
