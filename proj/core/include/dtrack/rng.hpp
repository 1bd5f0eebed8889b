#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace dtrack {

// One SplitMix64 step. Used to turn (seed, path index) pairs into
// well-decorrelated engine seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Deterministic stream seed for a given (experiment seed, path index). Each
// path owns its stream, so results do not depend on how paths are scheduled
// across worker threads.
inline std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path_index) {
    std::uint64_t s = seed + 0x9E3779B97F4A7C15ULL * (path_index + 1);
    return splitmix64(s);
}

// Stream of independent N(0,1) draws backed by mt19937_64 and Box-Muller.
// Box-Muller has no rejection branch, so the number of engine draws consumed
// per normal is fixed and the stream layout is reproducible.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t stream_seed) : eng_(stream_seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_pos();
        const double u2 = uniform_pos();
        const double mag = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * 3.14159265358979323846 * u2;
        spare_ = mag * std::sin(ang);
        has_spare_ = true;
        return mag * std::cos(ang);
    }

private:
    // Uniform on (0,1]: the +1 keeps log() away from zero.
    double uniform_pos() {
        return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;
    }

    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Standard normal CDF via erfc; absolute error is at the few-ulp level, well
// inside the 1e-12 budget documented for call-price reproducibility.
inline double norm_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

inline double norm_pdf(double x) {
    return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

} // namespace dtrack
