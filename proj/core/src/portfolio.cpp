#include "dtrack/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dtrack/errors.hpp"

namespace dtrack {

namespace {

void check_targets(const ModelSpec& model, const std::vector<double>& etas) {
    if (etas.size() != static_cast<std::size_t>(model.dim()))
        throw ConfigError("expected " + std::to_string(model.dim()) +
                          " factor exposures, got " + std::to_string(etas.size()));
}

} // namespace

double slippage_generic(const ModelSpec& model, const StateVector& state, double beta,
                        const std::vector<double>& etas) {
    check_targets(model, etas);
    const double alpha = tracking_drift(model, state, beta, etas);
    const DriftVol dv = drift_vol(model, state);
    const std::size_t n = state.m.size();

    // Volatility rows normalized by their component level; exposures in the
    // same order (index first).
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v[i][j] = dv.vol[i][j] / state.m[i];
    std::vector<double> expo(n);
    expo[0] = beta;
    for (std::size_t i = 1; i < n; ++i) expo[i] = etas[i - 1];

    auto dot = [&](std::size_t i, std::size_t l) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += v[i][j] * v[l][j];
        return sum;
    };

    double z = alpha;
    for (std::size_t i = 0; i < n; ++i) z += 0.5 * expo[i] * (1.0 - expo[i]) * dot(i, i);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = i + 1; l < n; ++l) z -= expo[i] * expo[l] * dot(i, l);
    return z;
}

double slippage(const ModelSpec& model, const StateVector& state, double beta,
                const std::vector<double>& etas) {
    check_targets(model, etas);
    const double r = model.r;
    switch (model.kind) {
    case ModelKind::BlackScholes:
        return (r + 0.5 * beta * model.sigma * model.sigma) * (1.0 - beta);
    case ModelKind::Heston: {
        const double y = state.y();
        const double eta = etas[0];
        return r - r * beta - model.kappa * (model.theta / y - 1.0) * eta +
               0.5 * beta * (1.0 - beta) * y +
               0.5 * eta * (1.0 - eta) * model.nu * model.nu / y -
               beta * eta * model.nu * model.rho;
    }
    case ModelKind::CIR: {
        const double s = state.s();
        return r - beta * model.kappa * (model.theta / s - 1.0) +
               0.5 * beta * (1.0 - beta) * model.sigma * model.sigma / s;
    }
    case ModelKind::CSQR: {
        const double s = state.s();
        const double y = state.y();
        const double eta = etas[0];
        return r - beta * model.gamma * (y / s - 1.0) -
               eta * model.kappa * (model.theta / y - 1.0) +
               0.5 * beta * (1.0 - beta) * model.sigma * model.sigma / s +
               0.5 * eta * (1.0 - eta) * model.nu * model.nu / y -
               beta * eta * model.nu * model.rho * model.sigma / std::sqrt(s * y);
    }
    }
    throw ConfigError("unknown model kind");
}

std::vector<double> slippage_series(const ModelSpec& model, const SamplePath& path,
                                    double beta, const std::vector<double>& etas) {
    std::vector<double> z(path.states.size());
    for (std::size_t k = 0; k < path.states.size(); ++k)
        z[k] = slippage(model, path.states[k], beta, etas);
    return z;
}

PortfolioPath evolve_portfolio(const ModelSpec& model, const SamplePath& path,
                               const std::vector<DerivativeSpec>& instruments,
                               double beta, const std::vector<double>& etas, double x0,
                               int rebalance_every) {
    check_targets(model, etas);
    if (!(x0 > 0.0)) throw ConfigError("initial wealth must be > 0");
    if (rebalance_every < 1) throw ConfigError("rebalance_every must be >= 1");
    if (instruments.empty()) throw ConfigError("no instruments");
    const TimeGrid& grid = path.grid;
    for (const auto& spec : instruments)
        if (spec.maturity < grid.T - 1e-9)
            throw InvalidHorizon("instrument matures at " + std::to_string(spec.maturity) +
                                 " before the grid ends at " + std::to_string(grid.T));
    if (path.states.size() != static_cast<std::size_t>(grid.n_points()))
        throw ConfigError("path/grid size mismatch");

    const std::size_t n_instr = instruments.size();
    const double dt = grid.dt();

    PortfolioPath out;
    out.grid = grid;
    out.values.assign(grid.n_points(), 0.0);
    out.weights.assign(grid.n_steps, std::vector<double>(n_instr, 0.0));
    out.slippage.resize(grid.n_points());
    out.integrated_slippage.assign(grid.n_points(), 0.0);

    const std::size_t n_pts = static_cast<std::size_t>(grid.n_points());
    for (std::size_t k = 0; k < n_pts; ++k)
        out.slippage[k] = slippage(model, path.states[k], beta, etas);
    for (std::size_t k = 1; k < n_pts; ++k)
        out.integrated_slippage[k] = out.integrated_slippage[k - 1] +
                                     0.5 * (out.slippage[k - 1] + out.slippage[k]) * dt;

    out.values[0] = x0;
    std::vector<double> units(n_instr, 0.0);
    std::vector<double> prices(n_instr, 0.0);
    double cash = 0.0;

    for (std::size_t k = 0; k < static_cast<std::size_t>(grid.n_steps); ++k) {
        const StateVector& here = path.states[k];
        const double x = out.values[k];

        if (out.bankrupt) {
            out.values[k + 1] = x;
            continue;
        }

        for (std::size_t j = 0; j < n_instr; ++j)
            prices[j] = price(model, here, instruments[j]);

        if (k % static_cast<std::size_t>(rebalance_every) == 0) {
            std::vector<ElasticityRow> rows;
            rows.reserve(n_instr);
            for (const auto& spec : instruments)
                rows.push_back(elasticities(model, here, spec));
            const ExposureTarget target = make_target(model, here, beta, etas);
            const WeightSolution sol = solve_weights(rows, target, model.r);
            cash = x;
            for (std::size_t j = 0; j < n_instr; ++j) {
                if (prices[j] == 0.0)
                    throw NumericalError("instrument price hit zero at rebalance");
                units[j] = sol.weights[j] * x / prices[j];
                if (rows[j].priced) cash -= sol.weights[j] * x;
                out.weights[k][j] = sol.weights[j];
            }
        } else {
            for (std::size_t j = 0; j < n_instr; ++j)
                out.weights[k][j] = units[j] * prices[j] / x;
        }

        // Units stay fixed across the step: cash accrues interest and absorbs
        // futures variation margin; priced positions are marked to market.
        double next = cash * (1.0 + model.r * dt);
        cash = next;
        for (std::size_t j = 0; j < n_instr; ++j) {
            const double p_next = price(model, path.states[k + 1], instruments[j]);
            if (instruments[j].kind == InstrumentKind::EuropeanCall) {
                next += units[j] * p_next;
            } else {
                const double gain = units[j] * (p_next - prices[j]);
                next += gain;
                cash += gain;
            }
        }
        out.values[k + 1] = next;
        if (next <= 0.0) {
            out.bankrupt = true;
            out.bankrupt_step = static_cast<int>(k);
        }
    }
    return out;
}

double verify_prop2(const PortfolioPath& portfolio, const SamplePath& path, double beta,
                    const std::vector<double>& etas) {
    const std::size_t n_pts = portfolio.values.size();
    if (path.states.size() != n_pts) throw ConfigError("path/portfolio size mismatch");
    if (n_pts == 0) throw ConfigError("empty portfolio path");
    const StateVector& start = path.states[0];
    if (etas.size() != start.dim()) throw ConfigError("exposure dimension mismatch");
    const double x0 = portfolio.values[0];

    double worst = 0.0;
    for (std::size_t k = 0; k < n_pts; ++k) {
        const StateVector& here = path.states[k];
        for (double v : here.m)
            if (!(v > 0.0))
                throw NumericalError("path left the positive domain; identity undefined");
        double closed = x0 * std::pow(here.s() / start.s(), beta);
        for (std::size_t i = 1; i < here.m.size(); ++i)
            closed *= std::pow(here.m[i] / start.m[i], etas[i - 1]);
        closed *= std::exp(portfolio.integrated_slippage[k]);
        worst = std::max(worst, std::abs(portfolio.values[k] - closed) / std::abs(closed));
    }
    return worst;
}

BenchmarkPath benchmark_series(const SamplePath& path, double beta,
                               const std::vector<double>& etas, double x0) {
    if (path.states.empty()) throw ConfigError("empty path");
    if (etas.size() != path.states[0].dim())
        throw ConfigError("exposure dimension mismatch");
    if (!(x0 > 0.0)) throw ConfigError("initial value must be > 0");
    const StateVector& start = path.states[0];
    BenchmarkPath out;
    out.values.resize(path.states.size());
    for (std::size_t k = 0; k < path.states.size(); ++k) {
        const StateVector& here = path.states[k];
        double v = x0 * std::pow(here.s() / start.s(), beta);
        for (std::size_t i = 1; i < here.m.size(); ++i)
            v *= std::pow(here.m[i] / start.m[i], etas[i - 1]);
        out.values[k] = v;
    }
    return out;
}

} // namespace dtrack
