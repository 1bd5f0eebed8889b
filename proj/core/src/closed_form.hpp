#pragma once

// Internal closed-form plumbing shared by pricing and exposure. Not installed.

#include <vector>

#include "dtrack/model.hpp"
#include "dtrack/pricing.hpp"

namespace dtrack::detail {

// Slack absorbing float jitter when grids and maturities are built from the
// same arithmetic; anything later than this is a genuinely expired contract.
inline constexpr double kExpirySlack = 1e-9;

// Non-negative time to maturity; throws ExpiredContract beyond the slack.
double time_to_maturity(double t, const DerivativeSpec& spec);

// Whether the two CSQR reversion speeds coincide to relative 1e-8, which
// selects the analytic limit branch of the index futures curve.
bool equal_speeds(const ModelSpec& model);

// Factor-level sensitivity of the two-speed index futures price.
double csqr_df_dy(const ModelSpec& model, double tau);

// Analytic partial derivatives of price() with respect to each state
// component. Same supported pairs and expiry rules as price(); calls
// additionally require t strictly before maturity.
std::vector<double> price_partials(const ModelSpec& model, const StateVector& state,
                                   const DerivativeSpec& spec);

} // namespace dtrack::detail
