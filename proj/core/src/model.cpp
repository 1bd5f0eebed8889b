#include "dtrack/model.hpp"

#include <cmath>
#include <string>

#include "dtrack/errors.hpp"

namespace dtrack {

const char* to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::BlackScholes: return "bs";
    case ModelKind::Heston: return "heston";
    case ModelKind::CIR: return "cir";
    case ModelKind::CSQR: return "csqr";
    }
    return "?";
}

int ModelSpec::dim() const {
    switch (kind) {
    case ModelKind::BlackScholes:
    case ModelKind::CIR: return 0;
    case ModelKind::Heston:
    case ModelKind::CSQR: return 1;
    }
    return 0;
}

namespace {

void require_positive(double value, const char* name) {
    if (!(value > 0.0))
        throw NonPositiveParameter(std::string(name) + " must be > 0, got " +
                                   std::to_string(value));
}

void require_rho(double rho) {
    if (!(rho > -1.0 && rho < 1.0))
        throw NonPositiveParameter("rho must lie in (-1, 1), got " + std::to_string(rho));
}

void require_feller(double kappa, double theta, double vol, const char* vol_name) {
    if (2.0 * kappa * theta < vol * vol)
        throw FellerViolation("2*kappa*theta = " + std::to_string(2.0 * kappa * theta) +
                              " < " + vol_name + "^2 = " + std::to_string(vol * vol));
}

} // namespace

void validate(const ModelSpec& model) {
    if (!(model.r >= 0.0))
        throw NonPositiveParameter("r must be >= 0, got " + std::to_string(model.r));
    switch (model.kind) {
    case ModelKind::BlackScholes:
        require_positive(model.sigma, "sigma");
        break;
    case ModelKind::Heston:
        require_positive(model.kappa, "kappa");
        require_positive(model.theta, "theta");
        require_positive(model.nu, "nu");
        require_rho(model.rho);
        if (model.strict_feller) require_feller(model.kappa, model.theta, model.nu, "nu");
        break;
    case ModelKind::CIR:
        require_positive(model.kappa, "kappa");
        require_positive(model.theta, "theta");
        require_positive(model.sigma, "sigma");
        if (model.strict_feller)
            require_feller(model.kappa, model.theta, model.sigma, "sigma");
        break;
    case ModelKind::CSQR:
        // No positivity inequality is imposed here: none is established for
        // the two-speed model. The simulator counts truncation events instead.
        require_positive(model.gamma, "gamma");
        require_positive(model.sigma, "sigma");
        require_positive(model.kappa, "kappa");
        require_positive(model.theta, "theta");
        require_positive(model.nu, "nu");
        require_rho(model.rho);
        break;
    }
    if (!model.mpr.empty() &&
        model.mpr.size() != static_cast<std::size_t>(model.brownian_dim()))
        throw ConfigError("market price of risk must have dimension " +
                          std::to_string(model.brownian_dim()) + ", got " +
                          std::to_string(model.mpr.size()));
}

ModelSpec make_bs(double r, double sigma) {
    ModelSpec m;
    m.kind = ModelKind::BlackScholes;
    m.r = r;
    m.sigma = sigma;
    validate(m);
    return m;
}

ModelSpec make_heston(double r, double kappa, double theta, double nu, double rho,
                      bool strict_feller) {
    ModelSpec m;
    m.kind = ModelKind::Heston;
    m.r = r;
    m.kappa = kappa;
    m.theta = theta;
    m.nu = nu;
    m.rho = rho;
    m.strict_feller = strict_feller;
    validate(m);
    return m;
}

ModelSpec make_cir(double r, double kappa, double theta, double sigma, bool strict_feller) {
    ModelSpec m;
    m.kind = ModelKind::CIR;
    m.r = r;
    m.kappa = kappa;
    m.theta = theta;
    m.sigma = sigma;
    m.strict_feller = strict_feller;
    validate(m);
    return m;
}

ModelSpec make_csqr(double r, double gamma, double sigma, double kappa, double theta,
                    double nu, double rho) {
    ModelSpec m;
    m.kind = ModelKind::CSQR;
    m.r = r;
    m.gamma = gamma;
    m.sigma = sigma;
    m.kappa = kappa;
    m.theta = theta;
    m.nu = nu;
    m.rho = rho;
    validate(m);
    return m;
}

DriftVol drift_vol(const ModelSpec& model, const StateVector& state) {
    DriftVol dv;
    const int n = model.brownian_dim();
    dv.drift.assign(n, 0.0);
    dv.vol.assign(n, std::vector<double>(n, 0.0));
    switch (model.kind) {
    case ModelKind::BlackScholes: {
        const double s = state.s();
        dv.drift[0] = model.r * s;
        dv.vol[0][0] = model.sigma * s;
        break;
    }
    case ModelKind::Heston: {
        const double s = state.s();
        const double y = state.y();
        const double root_y = std::sqrt(y);
        dv.drift[0] = model.r * s;
        dv.drift[1] = model.kappa * (model.theta - y);
        dv.vol[0][0] = root_y * s;
        dv.vol[1][0] = model.nu * model.rho * root_y;
        dv.vol[1][1] = model.nu * std::sqrt(1.0 - model.rho * model.rho) * root_y;
        break;
    }
    case ModelKind::CIR: {
        const double s = state.s();
        dv.drift[0] = model.kappa * (model.theta - s);
        dv.vol[0][0] = model.sigma * std::sqrt(s);
        break;
    }
    case ModelKind::CSQR: {
        const double s = state.s();
        const double y = state.y();
        const double root_y = std::sqrt(y);
        dv.drift[0] = model.gamma * (y - s);
        dv.drift[1] = model.kappa * (model.theta - y);
        dv.vol[0][0] = model.sigma * std::sqrt(s);
        dv.vol[1][0] = model.nu * model.rho * root_y;
        dv.vol[1][1] = model.nu * std::sqrt(1.0 - model.rho * model.rho) * root_y;
        break;
    }
    }
    return dv;
}

} // namespace dtrack
