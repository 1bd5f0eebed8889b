#include "dtrack/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "dtrack/errors.hpp"
#include "dtrack/rng.hpp"

namespace dtrack {

TimeGrid make_grid(double t0, double T, int n_steps) {
    if (!(T > t0))
        throw InvalidHorizon("grid end " + std::to_string(T) + " must exceed start " +
                             std::to_string(t0));
    if (n_steps < 1)
        throw InvalidHorizon("n_steps must be >= 1, got " + std::to_string(n_steps));
    return TimeGrid{t0, T, n_steps};
}

namespace {

double clamp0(double x, long& events) {
    if (x < 0.0) {
        ++events;
        return 0.0;
    }
    return x;
}

// One Euler step with full truncation for the square-root models: negative
// values are replaced by zero inside the square roots and the mean-reversion
// terms, the stored iterate stays raw, and each activation is counted.
void euler_step(const ModelSpec& model, const std::vector<double>& x, double dt,
                const double* dw, bool real_world, std::vector<double>& out,
                long& events) {
    switch (model.kind) {
    case ModelKind::CIR: {
        const double sp = clamp0(x[0], events);
        const double vol = model.sigma * std::sqrt(sp);
        double drift = model.kappa * (model.theta - sp);
        if (real_world && !model.mpr.empty()) drift += vol * model.mpr[0];
        out[0] = x[0] + drift * dt + vol * dw[0];
        break;
    }
    case ModelKind::Heston: {
        const double yp = clamp0(x[1], events);
        const double root_y = std::sqrt(yp);
        const double vol_s = root_y * x[0];
        const double vol_y0 = model.nu * model.rho * root_y;
        const double vol_y1 = model.nu * std::sqrt(1.0 - model.rho * model.rho) * root_y;
        double drift_s = model.r * x[0];
        double drift_y = model.kappa * (model.theta - yp);
        if (real_world && !model.mpr.empty()) {
            drift_s += vol_s * model.mpr[0];
            drift_y += vol_y0 * model.mpr[0] + vol_y1 * model.mpr[1];
        }
        out[0] = x[0] + drift_s * dt + vol_s * dw[0];
        out[1] = x[1] + drift_y * dt + vol_y0 * dw[0] + vol_y1 * dw[1];
        break;
    }
    case ModelKind::CSQR: {
        const double sp = clamp0(x[0], events);
        const double yp = clamp0(x[1], events);
        const double root_y = std::sqrt(yp);
        const double vol_s = model.sigma * std::sqrt(sp);
        const double vol_y0 = model.nu * model.rho * root_y;
        const double vol_y1 = model.nu * std::sqrt(1.0 - model.rho * model.rho) * root_y;
        double drift_s = model.gamma * (yp - sp);
        double drift_y = model.kappa * (model.theta - yp);
        if (real_world && !model.mpr.empty()) {
            drift_s += vol_s * model.mpr[0];
            drift_y += vol_y0 * model.mpr[0] + vol_y1 * model.mpr[1];
        }
        out[0] = x[0] + drift_s * dt + vol_s * dw[0];
        out[1] = x[1] + drift_y * dt + vol_y0 * dw[0] + vol_y1 * dw[1];
        break;
    }
    case ModelKind::BlackScholes:
        break; // handled by the exact step
    }
}

SamplePath run_scheme(const ModelSpec& model, const TimeGrid& grid, const StateVector& x0,
                      std::vector<std::vector<double>> dw, Measure measure,
                      std::uint64_t stream_seed) {
    const bool real_world = measure == Measure::RealWorld;
    const int n = grid.n_steps;
    const double dt = grid.dt();
    SamplePath path;
    path.grid = grid;
    path.stream_seed = stream_seed;
    path.states.resize(n + 1);
    path.states[0] = x0;
    path.states[0].t = grid.t0;

    if (model.kind == ModelKind::BlackScholes) {
        // Exact log-normal step.
        double mu = model.r - 0.5 * model.sigma * model.sigma;
        if (real_world && !model.mpr.empty()) mu += model.sigma * model.mpr[0];
        double s = x0.m[0];
        for (int k = 0; k < n; ++k) {
            s *= std::exp(mu * dt + model.sigma * dw[k][0]);
            path.states[k + 1].t = grid.t(k + 1);
            path.states[k + 1].m = {s};
        }
    } else {
        std::vector<double> next(x0.m.size());
        for (int k = 0; k < n; ++k) {
            euler_step(model, path.states[k].m, dt, dw[k].data(), real_world, next,
                       path.truncation_events);
            path.states[k + 1].t = grid.t(k + 1);
            path.states[k + 1].m = next;
        }
    }
    path.dW = std::move(dw);
    return path;
}

std::vector<std::vector<double>> draw_increments(int n_steps, int dim, double dt,
                                                 std::uint64_t stream_seed) {
    GaussianStream gauss(stream_seed);
    const double root_dt = std::sqrt(dt);
    std::vector<std::vector<double>> dw(n_steps, std::vector<double>(dim));
    for (int k = 0; k < n_steps; ++k)
        for (int j = 0; j < dim; ++j) dw[k][j] = gauss.next() * root_dt;
    return dw;
}

} // namespace

SamplePath evolve_with_increments(const ModelSpec& model, const TimeGrid& grid,
                                  const StateVector& x0,
                                  const std::vector<std::vector<double>>& dW,
                                  Measure measure) {
    if (dW.size() != static_cast<std::size_t>(grid.n_steps))
        throw ConfigError("increment count " + std::to_string(dW.size()) +
                          " does not match n_steps " + std::to_string(grid.n_steps));
    if (x0.m.size() != static_cast<std::size_t>(model.brownian_dim()))
        throw ConfigError("initial state dimension does not match the model");
    return run_scheme(model, grid, x0, dW, measure, 0);
}

std::vector<SamplePath> simulate_paths(const ModelSpec& model, const TimeGrid& grid,
                                       const StateVector& x0, int n_paths,
                                       std::uint64_t seed, Measure measure,
                                       int n_threads, int first_path) {
    validate(model);
    if (n_paths < 0) throw ConfigError("n_paths must be >= 0");
    if (x0.m.size() != static_cast<std::size_t>(model.brownian_dim()))
        throw ConfigError("initial state dimension does not match the model");
    const int dim = model.brownian_dim();
    std::vector<SamplePath> paths(n_paths);

    auto worker = [&](int begin, int end) {
        for (int p = begin; p < end; ++p) {
            const std::uint64_t stream =
                path_stream_seed(seed, static_cast<std::uint64_t>(first_path + p));
            auto dw = draw_increments(grid.n_steps, dim, grid.dt(), stream);
            paths[p] = run_scheme(model, grid, x0, std::move(dw), measure, stream);
        }
    };

    int workers = n_threads;
    if (workers <= 0)
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, std::max(1, n_paths));
    if (workers <= 1) {
        worker(0, n_paths);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_paths + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const int begin = w * chunk;
            const int end = std::min(n_paths, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    return paths;
}

SamplePath coarsen_path(const ModelSpec& model, const SamplePath& fine, Measure measure) {
    const int n_fine = fine.grid.n_steps;
    if (n_fine % 2 != 0)
        throw ConfigError("coarsen_path needs an even step count, got " +
                          std::to_string(n_fine));
    TimeGrid coarse = make_grid(fine.grid.t0, fine.grid.T, n_fine / 2);
    std::vector<std::vector<double>> dw(coarse.n_steps);
    for (int k = 0; k < coarse.n_steps; ++k) {
        const auto& a = fine.dW[2 * k];
        const auto& b = fine.dW[2 * k + 1];
        dw[k].resize(a.size());
        for (std::size_t j = 0; j < a.size(); ++j) dw[k][j] = a[j] + b[j];
    }
    SamplePath path = run_scheme(model, coarse, fine.states[0], std::move(dw), measure,
                                 fine.stream_seed);
    return path;
}

} // namespace dtrack
