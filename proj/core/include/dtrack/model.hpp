#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dtrack {

enum class ModelKind { BlackScholes, Heston, CIR, CSQR };

const char* to_string(ModelKind kind);

// Time-stamped market state: m[0] is the index level S, m[1..d] are the
// factor levels Y^1..Y^d. Entries are assumed strictly positive wherever
// prices, elasticities, or weights are evaluated.
struct StateVector {
    double t = 0.0;
    std::vector<double> m;

    double s() const { return m[0]; }
    double y(std::size_t i = 1) const { return m[i]; }
    std::size_t dim() const { return m.size() - 1; }
};

// One of the four supported diffusions plus the risk-free rate. Parameter
// roles by kind:
//   BlackScholes  sigma: lognormal volatility of S
//   Heston        kappa/theta/nu/rho: variance factor Y (speed, level, vol of
//                 vol, correlation with the index Brownian)
//   CIR           kappa/theta/sigma: the index itself mean-reverts
//   CSQR          gamma/sigma: index reversion speed toward Y and index vol
//                 scale; kappa/theta/nu/rho: the factor Y as in Heston
struct ModelSpec {
    ModelKind kind = ModelKind::BlackScholes;
    double r = 0.0;
    double sigma = 0.0;
    double kappa = 0.0;
    double theta = 0.0;
    double nu = 0.0;
    double rho = 0.0;
    double gamma = 0.0;
    // Market price of risk, size d+1. Stored for real-world-drift simulation;
    // everything else in the library works under the pricing measure.
    std::vector<double> mpr;
    // When set, square-root models with a stated positivity condition
    // (Heston, CIR) must satisfy 2*kappa*theta >= vol^2 at build time.
    bool strict_feller = true;

    int dim() const;
    int brownian_dim() const { return dim() + 1; }
};

ModelSpec make_bs(double r, double sigma);
ModelSpec make_heston(double r, double kappa, double theta, double nu, double rho,
                      bool strict_feller = true);
ModelSpec make_cir(double r, double kappa, double theta, double sigma,
                   bool strict_feller = true);
ModelSpec make_csqr(double r, double gamma, double sigma, double kappa, double theta,
                    double nu, double rho);

// Validates positivity of parameters, the correlation range, and — in strict
// mode, for the models whose positivity condition is known — the Feller
// inequality. CSQR has no stated condition; its positivity is handled by
// truncation accounting in the simulator.
void validate(const ModelSpec& model);

// Drift vector and lower-triangular volatility matrix of the state SDE under
// the pricing measure. Correlation enters only through the triangular
// factorization; the driving Brownian components are independent.
struct DriftVol {
    std::vector<double> drift;            // size d+1
    std::vector<std::vector<double>> vol; // (d+1) x (d+1), lower-triangular
};

DriftVol drift_vol(const ModelSpec& model, const StateVector& state);

} // namespace dtrack
