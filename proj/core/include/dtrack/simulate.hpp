#pragma once

#include <cstdint>
#include <vector>

#include "dtrack/grid.hpp"
#include "dtrack/model.hpp"

namespace dtrack {

// One simulated path: the states on the grid and the Brownian increments that
// produced them. The increments are exposed so portfolio evolution and the
// pathwise identity checks can run on exactly the same noise.
struct SamplePath {
    TimeGrid grid;
    std::vector<StateVector> states;     // n_steps + 1 entries
    std::vector<std::vector<double>> dW; // n_steps rows of dimension d+1, each N(0, dt)
    std::uint64_t stream_seed = 0;       // per-path RNG stream seed
    long truncation_events = 0;          // clamp activations during stepping
};

enum class Measure { Pricing, RealWorld };

// Simulates n_paths paths starting from x0 (whose t must equal grid.t0).
// The Black-Scholes index uses the exact log-normal step; the square-root
// models use the Euler scheme with full truncation: negative values are
// clamped to zero inside the square roots and the mean-reversion terms only,
// the stored state is the raw iterate, and each clamp activation is counted.
//
// Path p draws from the stream seeded by (seed, first_path + p), so chunked
// generation reproduces exactly the paths of one big call, and results are
// independent of the worker count.
std::vector<SamplePath> simulate_paths(const ModelSpec& model, const TimeGrid& grid,
                                       const StateVector& x0, int n_paths,
                                       std::uint64_t seed,
                                       Measure measure = Measure::Pricing,
                                       int n_threads = 1, int first_path = 0);

// Runs the same discretization on externally supplied Brownian increments
// (dW[k] must have dimension d+1 and variance dt). Used by refinement
// studies that need coupled coarse/fine paths.
SamplePath evolve_with_increments(const ModelSpec& model, const TimeGrid& grid,
                                  const StateVector& x0,
                                  const std::vector<std::vector<double>>& dW,
                                  Measure measure = Measure::Pricing);

// Halves the resolution of `fine` (even step count required): coarse
// increments are pairwise sums of the fine ones, and the coarse path re-runs
// the scheme on them. The pair shares one Brownian motion, which is what
// makes dt-vs-2dt error ratios meaningful.
SamplePath coarsen_path(const ModelSpec& model, const SamplePath& fine,
                        Measure measure = Measure::Pricing);

} // namespace dtrack
