#include "dtrack/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "closed_form.hpp"
#include "dtrack/errors.hpp"
#include "dtrack/rng.hpp"

namespace dtrack {

namespace detail {

double time_to_maturity(double t, const DerivativeSpec& spec) {
    const double tau = spec.maturity - t;
    if (tau < -kExpirySlack)
        throw ExpiredContract("contract matured at " + std::to_string(spec.maturity) +
                              ", priced at " + std::to_string(t));
    return std::max(tau, 0.0);
}

bool equal_speeds(const ModelSpec& model) {
    return std::abs(model.gamma - model.kappa) <
           1e-8 * std::max(model.gamma, model.kappa);
}

double csqr_df_dy(const ModelSpec& model, double tau) {
    if (equal_speeds(model)) return model.gamma * tau * std::exp(-model.gamma * tau);
    return model.gamma / (model.gamma - model.kappa) *
           (std::exp(-model.kappa * tau) - std::exp(-model.gamma * tau));
}

} // namespace detail

namespace {

[[noreturn]] void unsupported(const ModelSpec& model, const DerivativeSpec& spec) {
    throw UnsupportedPair(std::string(to_string(spec.kind)) + " under " +
                          to_string(model.kind) + " has no closed form here");
}

// Factor futures under a square-root factor: the conditional factor mean.
double factor_futures(double y, double kappa, double theta, double tau) {
    const double decay = std::exp(-kappa * tau);
    return y * decay + theta * (1.0 - decay);
}

double bs_d_plus(const ModelSpec& model, double s, double strike, double tau) {
    const double vol_sqrt_tau = model.sigma * std::sqrt(tau);
    return (std::log(s / strike) + (model.r + 0.5 * model.sigma * model.sigma) * tau) /
           vol_sqrt_tau;
}

} // namespace

const char* to_string(InstrumentKind kind) {
    switch (kind) {
    case InstrumentKind::EuropeanCall: return "call";
    case InstrumentKind::FuturesOnIndex: return "futures_index";
    case InstrumentKind::FuturesOnFactor: return "futures_factor";
    }
    return "?";
}

double price_bs_call(const ModelSpec& model, double t, double s, const DerivativeSpec& spec) {
    if (model.kind != ModelKind::BlackScholes) unsupported(model, spec);
    if (!(spec.strike > 0.0)) throw ConfigError("call strike must be > 0");
    const double tau = detail::time_to_maturity(t, spec);
    if (tau == 0.0) return std::max(s - spec.strike, 0.0);
    const double d_plus = bs_d_plus(model, s, spec.strike, tau);
    const double d_minus = d_plus - model.sigma * std::sqrt(tau);
    return s * norm_cdf(d_plus) -
           spec.strike * std::exp(-model.r * tau) * norm_cdf(d_minus);
}

double price_futures(const ModelSpec& model, const StateVector& state,
                     const DerivativeSpec& spec) {
    const double tau = detail::time_to_maturity(state.t, spec);
    if (spec.kind == InstrumentKind::FuturesOnIndex) {
        switch (model.kind) {
        case ModelKind::BlackScholes:
        case ModelKind::Heston:
            return state.s() * std::exp(model.r * tau);
        case ModelKind::CIR:
            return factor_futures(state.s(), model.kappa, model.theta, tau);
        case ModelKind::CSQR:
            return model.theta + (state.s() - model.theta) * std::exp(-model.gamma * tau) +
                   (state.y() - model.theta) * detail::csqr_df_dy(model, tau);
        }
    }
    if (spec.kind == InstrumentKind::FuturesOnFactor) {
        if (spec.leg != 1) throw ConfigError("factor futures leg must be 1");
        switch (model.kind) {
        case ModelKind::Heston:
        case ModelKind::CSQR:
            return factor_futures(state.y(), model.kappa, model.theta, tau);
        default:
            unsupported(model, spec);
        }
    }
    unsupported(model, spec);
}

double price(const ModelSpec& model, const StateVector& state, const DerivativeSpec& spec) {
    if (spec.kind == InstrumentKind::EuropeanCall)
        return price_bs_call(model, state.t, state.s(), spec);
    return price_futures(model, state, spec);
}

namespace detail {

std::vector<double> price_partials(const ModelSpec& model, const StateVector& state,
                                   const DerivativeSpec& spec) {
    const std::size_t n = state.m.size();
    std::vector<double> partials(n, 0.0);
    const double tau = time_to_maturity(state.t, spec);
    if (spec.kind == InstrumentKind::EuropeanCall) {
        if (model.kind != ModelKind::BlackScholes) unsupported(model, spec);
        if (!(spec.strike > 0.0)) throw ConfigError("call strike must be > 0");
        if (tau == 0.0)
            throw ExpiredContract("call sensitivities need t strictly before maturity");
        partials[0] = norm_cdf(bs_d_plus(model, state.s(), spec.strike, tau));
        return partials;
    }
    price_futures(model, state, spec); // validates the pair and the leg
    if (spec.kind == InstrumentKind::FuturesOnIndex) {
        switch (model.kind) {
        case ModelKind::BlackScholes:
        case ModelKind::Heston:
            partials[0] = std::exp(model.r * tau);
            break;
        case ModelKind::CIR:
            partials[0] = std::exp(-model.kappa * tau);
            break;
        case ModelKind::CSQR:
            partials[0] = std::exp(-model.gamma * tau);
            partials[1] = csqr_df_dy(model, tau);
            break;
        }
        return partials;
    }
    partials[1] = std::exp(-model.kappa * tau); // factor futures
    return partials;
}

} // namespace detail

std::vector<double> greeks_fd(const ModelSpec& model, const StateVector& state,
                              const DerivativeSpec& spec, double bump) {
    if (!(bump > 0.0 && bump <= 1e-2))
        throw ConfigError("relative bump must lie in (0, 1e-2], got " +
                          std::to_string(bump));
    const std::size_t n = state.m.size();
    std::vector<double> partials(n);
    StateVector up = state;
    StateVector down = state;
    for (std::size_t j = 0; j < n; ++j) {
        const double h = state.m[j] * bump;
        up.m[j] = state.m[j] + h;
        down.m[j] = state.m[j] - h;
        partials[j] = (price(model, up, spec) - price(model, down, spec)) / (2.0 * h);
        up.m[j] = state.m[j];
        down.m[j] = state.m[j];
    }
    return partials;
}

namespace {

struct ProfiledFit {
    double theta = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

// For fixed kappa the level theta enters the curve affinely, so the best
// theta solves a scalar least-squares problem in closed form.
ProfiledFit profile_theta(const std::vector<FuturesQuote>& quotes, double s_now,
                          double kappa) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& q : quotes) {
        const double e = std::exp(-kappa * q.maturity);
        num += (1.0 - e) * (q.price - s_now * e);
        den += (1.0 - e) * (1.0 - e);
    }
    ProfiledFit fit;
    if (den <= 0.0) return fit;
    fit.theta = num / den;
    fit.sse = 0.0;
    for (const auto& q : quotes) {
        const double e = std::exp(-kappa * q.maturity);
        const double model_price = fit.theta + (s_now - fit.theta) * e;
        fit.sse += (q.price - model_price) * (q.price - model_price);
    }
    return fit;
}

} // namespace

CirCalibration calibrate_cir(const std::vector<FuturesQuote>& quotes, double s_now) {
    if (!(s_now > 0.0)) throw ConfigError("s_now must be > 0");
    for (const auto& q : quotes) {
        if (!(q.maturity > 0.0)) throw ConfigError("quote maturities must be > 0");
        if (!(q.price > 0.0)) throw ConfigError("quote prices must be > 0");
    }
    if (quotes.size() < 2)
        throw InsufficientQuotes("need at least 2 quotes, got " +
                                 std::to_string(quotes.size()));
    {
        auto same = [](double a, double b) { return std::abs(a - b) < 1e-12; };
        bool distinct = false;
        for (std::size_t i = 1; i < quotes.size() && !distinct; ++i)
            distinct = !same(quotes[i].maturity, quotes[0].maturity);
        if (!distinct)
            throw InsufficientQuotes("need at least 2 distinct maturities");
    }

    const double scale = std::max(1.0, s_now);
    bool flat = true;
    for (const auto& q : quotes) flat = flat && std::abs(q.price - s_now) <= 1e-10 * scale;
    if (flat) {
        // theta = s_now reproduces a flat strip exactly for every speed; the
        // reported kappa is an arbitrary representative.
        return CirCalibration{1.0, s_now, 0.0, true};
    }

    auto objective = [&](double kappa) { return profile_theta(quotes, s_now, kappa).sse; };
    const int bits = std::numeric_limits<double>::digits;
    double best_kappa = 0.0;
    double best_sse = std::numeric_limits<double>::infinity();
    for (const double start : {1.0, 5.0, 20.0, 50.0}) {
        const double lo = std::max(1e-4, start / 10.0);
        const double hi = start * 10.0;
        const auto [kappa, sse] =
            boost::math::tools::brent_find_minima(objective, lo, hi, bits);
        if (sse < best_sse) {
            best_sse = sse;
            best_kappa = kappa;
        }
    }
    const ProfiledFit fit = profile_theta(quotes, s_now, best_kappa);
    if (!std::isfinite(fit.sse) || !std::isfinite(fit.theta) || !(best_kappa > 0.0) ||
        !(fit.theta > 0.0))
        throw FitDiverged("calibration did not reach a positive (kappa, theta)");
    return CirCalibration{best_kappa, fit.theta,
                          std::sqrt(fit.sse / static_cast<double>(quotes.size())), false};
}

std::vector<FuturesQuote> read_quotes_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open quote file " + path);
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("quote file " + path + " is empty");
    auto strip = [](std::string s) {
        s.erase(s.find_last_not_of(" \t\r\n") + 1);
        s.erase(0, s.find_first_not_of(" \t\r\n"));
        return s;
    };
    if (strip(line) != "maturity_years,price")
        throw ConfigError("quote file must start with header 'maturity_years,price'");
    std::vector<FuturesQuote> quotes;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (strip(line).empty()) continue;
        std::istringstream row(line);
        std::string a;
        std::string b;
        if (!std::getline(row, a, ',') || !std::getline(row, b))
            throw ConfigError("malformed quote at line " + std::to_string(line_no));
        try {
            quotes.push_back(FuturesQuote{std::stod(strip(a)), std::stod(strip(b))});
        } catch (const std::exception&) {
            throw ConfigError("malformed quote at line " + std::to_string(line_no));
        }
    }
    return quotes;
}

} // namespace dtrack
