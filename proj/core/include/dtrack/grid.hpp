#pragma once

namespace dtrack {

// Uniform time grid on [t0, T] with n_steps steps of size dt = (T-t0)/n_steps.
struct TimeGrid {
    double t0 = 0.0;
    double T = 0.0;
    int n_steps = 0;

    double dt() const { return (T - t0) / n_steps; }
    double t(int k) const { return t0 + k * dt(); }
    int n_points() const { return n_steps + 1; }
};

// Throws InvalidHorizon unless T > t0 and n_steps >= 1.
TimeGrid make_grid(double t0, double T, int n_steps);

} // namespace dtrack
