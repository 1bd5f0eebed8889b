#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dtrack/model.hpp"

namespace testsup {

// |a - b| / max(1, |b|): absolute near zero, relative away from it.
inline double rel_diff(double a, double b) {
    return std::abs(a - b) / std::max(1.0, std::abs(b));
}

// Deterministic uniforms straight from engine bits, so test fixtures do not
// depend on the standard library's distribution implementations.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : eng_(seed) {}

    double unit() { return static_cast<double>(eng_() >> 11) * 0x1p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * unit(); }

private:
    std::mt19937_64 eng_;
};

inline dtrack::StateVector state1(double t, double s) {
    dtrack::StateVector x;
    x.t = t;
    x.m = {s};
    return x;
}

inline dtrack::StateVector state2(double t, double s, double y) {
    dtrack::StateVector x;
    x.t = t;
    x.m = {s, y};
    return x;
}

} // namespace testsup
