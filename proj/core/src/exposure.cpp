#include "dtrack/exposure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "closed_form.hpp"
#include "dtrack/errors.hpp"
#include "dtrack/rng.hpp"

namespace dtrack {

namespace {

constexpr double kConditionCutoff = 1e10;
constexpr double kResidualTol = 1e-8;

void check_state(const ModelSpec& model, const StateVector& state) {
    if (state.m.size() != static_cast<std::size_t>(model.dim() + 1))
        throw ConfigError("state has " + std::to_string(state.m.size()) +
                          " components, model needs " + std::to_string(model.dim() + 1));
    for (double v : state.m)
        if (!(v > 0.0)) throw ConfigError("elasticities need strictly positive state levels");
}

} // namespace

ElasticityRow elasticities(const ModelSpec& model, const StateVector& state,
                           const DerivativeSpec& spec) {
    check_state(model, state);
    const double p = price(model, state, spec);
    const std::vector<double> partials = detail::price_partials(model, state, spec);
    const DriftVol dv = drift_vol(model, state);

    ElasticityRow row;
    row.priced = spec.kind == InstrumentKind::EuropeanCall;
    if (p == 0.0 || !std::isfinite(p))
        throw NumericalError("degenerate price: elasticities undefined");
    row.index_elasticity = state.s() * partials[0] / p;
    row.factor_elasticities.resize(state.dim());
    for (std::size_t i = 1; i < state.m.size(); ++i)
        row.factor_elasticities[i - 1] = state.m[i] * partials[i] / p;

    // Priced claims earn the rate on top of the replication drift; futures
    // positions are pure margin and carry only the hedge drift.
    double hedge = 0.0;
    for (std::size_t i = 0; i < state.m.size(); ++i) hedge += dv.drift[i] * partials[i];
    row.drift_coeff = (row.priced ? model.r : 0.0) - hedge / p;
    return row;
}

double null_relation_residual(const ModelSpec& model, const StateVector& state,
                              const DerivativeSpec& spec) {
    const ElasticityRow row = elasticities(model, state, spec);
    const DriftVol dv = drift_vol(model, state);
    double sum = row.excess_drift(model.r);
    double scale = std::max(1.0, std::abs(sum));
    double term = dv.drift[0] / state.s() * row.index_elasticity;
    sum += term;
    scale = std::max(scale, std::abs(term));
    for (std::size_t i = 1; i < state.m.size(); ++i) {
        term = dv.drift[i] / state.m[i] * row.factor_elasticities[i - 1];
        sum += term;
        scale = std::max(scale, std::abs(term));
    }
    return sum / scale;
}

double tracking_drift(const ModelSpec& model, const StateVector& state, double beta,
                      const std::vector<double>& etas) {
    check_state(model, state);
    if (etas.size() != static_cast<std::size_t>(model.dim()))
        throw ConfigError("expected " + std::to_string(model.dim()) +
                          " factor exposures, got " + std::to_string(etas.size()));
    const DriftVol dv = drift_vol(model, state);
    double alpha = model.r - dv.drift[0] / state.s() * beta;
    for (std::size_t i = 1; i < state.m.size(); ++i)
        alpha -= dv.drift[i] / state.m[i] * etas[i - 1];
    return alpha;
}

ExposureTarget make_target(const ModelSpec& model, const StateVector& state, double beta,
                           std::vector<double> etas) {
    ExposureTarget target;
    target.alpha = tracking_drift(model, state, beta, etas);
    target.beta = beta;
    target.etas = std::move(etas);
    return target;
}

namespace {

// Exact singular values of a 2x2 matrix, largest first.
std::pair<double, double> singular_values_2x2(double a, double b, double c, double d) {
    const double e = 0.5 * (a + d);
    const double f = 0.5 * (a - d);
    const double g = 0.5 * (c + b);
    const double h = 0.5 * (c - b);
    const double q = std::hypot(e, h);
    const double p = std::hypot(f, g);
    return {q + p, std::abs(q - p)};
}

void check_drift_row(const std::vector<ElasticityRow>& rows,
                     const std::vector<double>& weights, const ExposureTarget& target,
                     double r) {
    double drift = 0.0;
    double scale = std::max(1.0, std::abs(target.alpha - r));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double term = weights[j] * rows[j].excess_drift(r);
        drift += term;
        scale = std::max(scale, std::abs(term));
    }
    const double defect = std::abs(drift - (target.alpha - r));
    if (defect > kResidualTol * scale)
        throw TrackingConditionError("target drift is inconsistent with the exposures "
                                     "(defect " + std::to_string(defect) + ")");
}

[[noreturn]] void singular(double residual) {
    throw SingularSystem("exposure target not attainable with these instruments "
                         "(residual " + std::to_string(residual) + ")");
}

} // namespace

WeightSolution solve_weights(const std::vector<ElasticityRow>& rows,
                             const ExposureTarget& target, double r) {
    if (rows.empty()) throw ConfigError("no instruments");
    const std::size_t d = target.etas.size();
    for (const auto& row : rows)
        if (row.factor_elasticities.size() != d)
            throw ConfigError("instrument exposure dimension mismatch");
    const std::size_t n_eq = d + 1;
    const std::size_t n = rows.size();

    double b_norm = std::abs(target.beta) * std::abs(target.beta);
    for (double eta : target.etas) b_norm += eta * eta;
    b_norm = std::sqrt(b_norm);
    const double resid_tol = kResidualTol * std::max(1.0, b_norm);

    WeightSolution out;

    if (n_eq == 1 && n == 1) {
        const double g = rows[0].index_elasticity;
        if (g == 0.0) {
            if (std::abs(target.beta) > resid_tol) singular(std::abs(target.beta));
            out.weights = {0.0};
            out.rank_deficient = true;
            out.condition = std::numeric_limits<double>::infinity();
        } else {
            out.weights = {target.beta / g};
            out.condition = 1.0;
        }
        check_drift_row(rows, out.weights, target, r);
        return out;
    }

    if (n_eq == 2 && n == 2) {
        const double a = rows[0].index_elasticity;
        const double b = rows[1].index_elasticity;
        const double c = rows[0].factor_elasticities[0];
        const double dd = rows[1].factor_elasticities[0];
        const auto [s_max, s_min] = singular_values_2x2(a, b, c, dd);
        if (s_min * kConditionCutoff > s_max && s_min > 0.0) {
            const double det = a * dd - b * c;
            out.weights = {(target.beta * dd - b * target.etas[0]) / det,
                           (a * target.etas[0] - target.beta * c) / det};
            out.condition = s_max / s_min;
            check_drift_row(rows, out.weights, target, r);
            return out;
        }
        // fall through to the rank-revealing general path
    }

    Eigen::MatrixXd a(n_eq, n);
    for (std::size_t j = 0; j < n; ++j) {
        a(0, j) = rows[j].index_elasticity;
        for (std::size_t i = 0; i < d; ++i) a(1 + i, j) = rows[j].factor_elasticities[i];
    }
    Eigen::VectorXd b(n_eq);
    b(0) = target.beta;
    for (std::size_t i = 0; i < d; ++i) b(1 + i) = target.etas[i];

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double s_max = sv.size() ? sv(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) * kConditionCutoff > s_max && sv(i) > 0.0) ++rank;

    Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const Eigen::VectorXd proj = svd.matrixU().transpose() * b;
    for (Eigen::Index i = 0; i < rank; ++i) w += proj(i) / sv(i) * svd.matrixV().col(i);

    const double residual = (a * w - b).norm();
    if (residual > resid_tol) singular(residual);

    out.weights.assign(w.data(), w.data() + w.size());
    out.rank_deficient = rank < sv.size();
    const double s_min = sv.size() ? sv(sv.size() - 1) : 0.0;
    out.condition =
        s_min > 0.0 ? s_max / s_min : std::numeric_limits<double>::infinity();
    check_drift_row(rows, out.weights, target, r);
    return out;
}

double strategy_bs_call(const ModelSpec& model, double t, double s,
                        const DerivativeSpec& call, double beta, double x0, double s0) {
    if (model.kind != ModelKind::BlackScholes) throw ConfigError("call strategy needs Black-Scholes");
    if (call.kind != InstrumentKind::EuropeanCall) throw ConfigError("instrument is not a call");
    if (!(s > 0.0 && s0 > 0.0)) throw ConfigError("index levels must be > 0");
    const double tau = call.maturity - t;
    if (!(tau > detail::kExpirySlack))
        throw ExpiredContract("call strategy needs t strictly before maturity");
    const double vol_sqrt_tau = model.sigma * std::sqrt(tau);
    const double d_plus =
        (std::log(s / call.strike) + (model.r + 0.5 * model.sigma * model.sigma) * tau) /
        vol_sqrt_tau;
    const double growth =
        std::exp((model.r + 0.5 * beta * model.sigma * model.sigma) * (1.0 - beta) * t);
    return beta * x0 / s0 * std::pow(s / s0, beta - 1.0) * growth / norm_cdf(d_plus);
}

double strategy_bs_futures(const ModelSpec& model, double t, double s,
                           const DerivativeSpec& futures, double beta, double x0,
                           double s0) {
    if (model.kind != ModelKind::BlackScholes)
        throw ConfigError("futures strategy needs Black-Scholes");
    if (futures.kind != InstrumentKind::FuturesOnIndex)
        throw ConfigError("instrument is not an index futures");
    if (!(s > 0.0 && s0 > 0.0)) throw ConfigError("index levels must be > 0");
    const double tau = detail::time_to_maturity(t, futures);
    const double growth =
        std::exp((model.r + 0.5 * beta * model.sigma * model.sigma) * (1.0 - beta) * t);
    return beta * x0 / s0 * std::pow(s / s0, beta - 1.0) * growth *
           std::exp(-model.r * tau);
}

double strategy_cir_futures(const ModelSpec& model, double t, double s,
                            const DerivativeSpec& futures, double beta) {
    if (model.kind != ModelKind::CIR) throw ConfigError("strategy needs the mean-reverting index");
    if (futures.kind != InstrumentKind::FuturesOnIndex)
        throw ConfigError("instrument is not an index futures");
    if (!(s > 0.0)) throw ConfigError("index level must be > 0");
    const double tau = detail::time_to_maturity(t, futures);
    return beta * (1.0 + model.theta / s * (std::exp(model.kappa * tau) - 1.0));
}

std::pair<double, double> strategy_csqr_two_futures(const ModelSpec& model,
                                                    const StateVector& state, double t1,
                                                    double t2, double beta, double eta) {
    if (model.kind != ModelKind::CSQR) throw ConfigError("strategy needs the two-speed model");
    if (!(t2 > t1))
        throw DegenerateMaturities("need two distinct futures maturities, T1 < T2");
    const double s = state.s();
    const double y = state.y();
    if (!(s > 0.0 && y > 0.0)) throw ConfigError("state levels must be > 0");
    DerivativeSpec near{InstrumentKind::FuturesOnIndex, t1, 0.0, 0};
    DerivativeSpec far{InstrumentKind::FuturesOnIndex, t2, 0.0, 0};
    const double tau1 = detail::time_to_maturity(state.t, near);
    const double tau2 = detail::time_to_maturity(state.t, far);
    const double f1 = price_futures(model, state, near);
    const double f2 = price_futures(model, state, far);

    if (detail::equal_speeds(model)) {
        const double common = beta / s;
        const double shared = eta / (model.gamma * y);
        const double span = tau2 - tau1;
        return {f1 * std::exp(model.gamma * tau1) * (common * tau2 - shared) / span,
                -f2 * std::exp(model.gamma * tau2) * (common * tau1 - shared) / span};
    }
    const double den = std::exp(-model.gamma * tau1 - model.kappa * tau2) -
                       std::exp(-model.gamma * tau2 - model.kappa * tau1);
    const double ratio = 1.0 - model.kappa / model.gamma;
    const double num1 = beta * (std::exp(-model.kappa * tau2) - std::exp(-model.gamma * tau2)) / s -
                        eta * ratio * std::exp(-model.gamma * tau2) / y;
    const double num2 = beta * (std::exp(-model.kappa * tau1) - std::exp(-model.gamma * tau1)) / s -
                        eta * ratio * std::exp(-model.gamma * tau1) / y;
    return {f1 * num1 / den, -f2 * num2 / den};
}

std::pair<double, double> strategy_heston_futures_pair(const ModelSpec& model,
                                                       const StateVector& state,
                                                       double ty, double beta,
                                                       double eta) {
    if (model.kind != ModelKind::Heston) throw ConfigError("strategy needs the stochastic-variance model");
    const double y = state.y();
    if (!(y > 0.0)) throw ConfigError("variance level must be > 0");
    DerivativeSpec var_leg{InstrumentKind::FuturesOnFactor, ty, 0.0, 1};
    const double tau = detail::time_to_maturity(state.t, var_leg);
    // The index futures has unit index elasticity and no variance exposure,
    // so the pair decouples.
    return {beta, eta * (1.0 + model.theta / y * (std::exp(model.kappa * tau) - 1.0))};
}

} // namespace dtrack
