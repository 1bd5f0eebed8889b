#pragma once

#include <utility>
#include <vector>

#include "dtrack/model.hpp"
#include "dtrack/pricing.hpp"

namespace dtrack {

// Percentage price sensitivities of one instrument at one state.
// For priced derivatives (calls) drift_coeff is the price drift coefficient C
// and the elasticities are D/E; for futures it is F with elasticities G/H.
// The two kinds enter the cash account differently, hence the flag.
struct ElasticityRow {
    double drift_coeff = 0.0;                 // C (priced) or F (futures), 1/year
    double index_elasticity = 0.0;            // D or G
    std::vector<double> factor_elasticities;  // E or H, length d
    bool priced = false;

    // The quantity the tracking algebra actually uses: C - r or F.
    double excess_drift(double r) const { return priced ? drift_coeff - r : drift_coeff; }
};

// Closed-form elasticity row for a supported model/instrument pair.
// Calls require t strictly before maturity; futures rows are defined up to
// and including maturity.
ElasticityRow elasticities(const ModelSpec& model, const StateVector& state,
                           const DerivativeSpec& spec);

// Signed residual of the linear-dependence relation between an instrument's
// drift coefficient and its exposure-weighted drift terms, normalized by the
// largest participating term. Zero (to round-off) for every supported pair.
double null_relation_residual(const ModelSpec& model, const StateVector& state,
                              const DerivativeSpec& spec);

// The portfolio drift forced by the tracking condition for exposure targets
// (beta, etas) at the given state: alpha = r - (drift0/S) beta - sum_i
// (drift_i/Y_i) eta_i.
double tracking_drift(const ModelSpec& model, const StateVector& state, double beta,
                      const std::vector<double>& etas);

// Target exposures plus the implied drift at a particular state.
struct ExposureTarget {
    double beta = 0.0;
    std::vector<double> etas; // length d
    double alpha = 0.0;       // must satisfy the tracking condition
};

ExposureTarget make_target(const ModelSpec& model, const StateVector& state, double beta,
                           std::vector<double> etas);

struct WeightSolution {
    std::vector<double> weights;
    double drift_residual = 0.0; // scaled consistency defect of the drift row
    double condition = 1.0;      // exposure submatrix condition estimate
    bool rank_deficient = false; // solved via truncated pseudo-inverse
};

// Solves the exposure subsystem (index row = beta, factor rows = etas) for
// instrument weights. The drift row is linearly dependent by construction, so
// it is checked, not solved: a residual above 1e-8 (a target drift that
// contradicts the tracking condition) throws TrackingConditionError.
// N = d+1 instruments give the unique solution; N > d+1 the minimum-norm one.
// Rank deficiency is detected at condition 1e10: if the target is still
// representable the truncated solve succeeds with rank_deficient set,
// otherwise SingularSystem is thrown.
WeightSolution solve_weights(const std::vector<ElasticityRow>& rows,
                             const ExposureTarget& target, double r);

// Closed-form strategies. Time is measured from the strategy's inception at
// t = 0, where the index was at s0 and the portfolio at x0.

// Units of the call held by the constant-beta tracking strategy under
// Black-Scholes. Requires t < call maturity.
double strategy_bs_call(const ModelSpec& model, double t, double s,
                        const DerivativeSpec& call, double beta, double x0, double s0);

// Contracts of the index futures held by the same strategy. Requires
// t <= futures maturity.
double strategy_bs_futures(const ModelSpec& model, double t, double s,
                           const DerivativeSpec& futures, double beta, double x0,
                           double s0);

// Wealth-fraction weight of a single index-futures position tracking a
// mean-reverting index with target beta.
double strategy_cir_futures(const ModelSpec& model, double t, double s,
                            const DerivativeSpec& futures, double beta);

// Weights (u1, u2) on index futures of maturities T1 < T2 achieving (beta,
// eta) under the two-speed square-root model. Routes to the equal-speed
// closed form when gamma and kappa coincide to relative 1e-8. T1 = T2 is the
// degenerate system.
std::pair<double, double> strategy_csqr_two_futures(const ModelSpec& model,
                                                    const StateVector& state, double t1,
                                                    double t2, double beta, double eta);

// Weights (u1, u2) on an index futures plus a variance futures of maturity Ty
// achieving (beta, eta) under Heston: u1 = beta and u2 follows the factor leg.
std::pair<double, double> strategy_heston_futures_pair(const ModelSpec& model,
                                                       const StateVector& state,
                                                       double ty, double beta,
                                                       double eta);

} // namespace dtrack
