#include <benchmark/benchmark.h>

#include "dtrack/exposure.hpp"
#include "dtrack/portfolio.hpp"
#include "dtrack/pricing.hpp"
#include "dtrack/simulate.hpp"
#include "dtrack/vxx.hpp"

namespace {

using namespace dtrack;

const ModelSpec kBs = make_bs(0.05, 0.2);
const ModelSpec kCir = make_cir(0.0, 20.0, 0.2, 0.4);
const ModelSpec kCsqr = make_csqr(0.05, 25.0, 0.4, 20.0, 0.2, 0.4, 0.3);

void bm_simulate_bs_daily(benchmark::State& state) {
    const TimeGrid grid = make_grid(0.0, 0.5, 126);
    const StateVector x0{0.0, {50.0}};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto paths = simulate_paths(kBs, grid, x0, 16, seed++);
        benchmark::DoNotOptimize(paths);
    }
}
BENCHMARK(bm_simulate_bs_daily)->Unit(benchmark::kMicrosecond);

void bm_simulate_cir_fine(benchmark::State& state) {
    const TimeGrid grid = make_grid(0.0, 0.5, 1260);
    const StateVector x0{0.0, {0.2}};
    std::uint64_t seed = 1;
    for (auto _ : state) {
        auto paths = simulate_paths(kCir, grid, x0, 4, seed++);
        benchmark::DoNotOptimize(paths);
    }
}
BENCHMARK(bm_simulate_cir_fine)->Unit(benchmark::kMicrosecond);

void bm_price_call(benchmark::State& state) {
    const DerivativeSpec call{InstrumentKind::EuropeanCall, 0.5, 50.0, 0};
    const StateVector at{0.1, {52.0}};
    for (auto _ : state) benchmark::DoNotOptimize(price(kBs, at, call));
}
BENCHMARK(bm_price_call);

void bm_elasticities_csqr(benchmark::State& state) {
    const DerivativeSpec fut{InstrumentKind::FuturesOnIndex, 0.5, 0.0, 0};
    const StateVector at{0.1, {0.25, 0.18}};
    for (auto _ : state) benchmark::DoNotOptimize(elasticities(kCsqr, at, fut));
}
BENCHMARK(bm_elasticities_csqr);

void bm_solve_weights_pair(benchmark::State& state) {
    const StateVector at{0.1, {0.25, 0.18}};
    const std::vector<ElasticityRow> rows{
        elasticities(kCsqr, at, DerivativeSpec{InstrumentKind::FuturesOnIndex, 0.25, 0.0, 0}),
        elasticities(kCsqr, at, DerivativeSpec{InstrumentKind::FuturesOnIndex, 0.5, 0.0, 0})};
    const ExposureTarget target = make_target(kCsqr, at, 1.0, {0.3});
    for (auto _ : state) benchmark::DoNotOptimize(solve_weights(rows, target, kCsqr.r));
}
BENCHMARK(bm_solve_weights_pair);

void bm_evolve_portfolio_bs(benchmark::State& state) {
    const TimeGrid grid = make_grid(0.0, 0.5, 126);
    const StateVector x0{0.0, {50.0}};
    const auto paths = simulate_paths(kBs, grid, x0, 1, 7);
    const std::vector<DerivativeSpec> instruments{
        DerivativeSpec{InstrumentKind::FuturesOnIndex, 1.0, 0.0, 0}};
    for (auto _ : state) {
        auto port = evolve_portfolio(kBs, paths[0], instruments, 2.0, {}, 100.0);
        benchmark::DoNotOptimize(port);
    }
}
BENCHMARK(bm_evolve_portfolio_bs)->Unit(benchmark::kMicrosecond);

void bm_evolve_vxx(benchmark::State& state) {
    const TimeGrid grid = make_grid(0.0, 0.5, 1260);
    const StateVector x0{0.0, {0.2}};
    const auto paths = simulate_paths(kCir, grid, x0, 1, 7);
    const RollCalendar calendar = monthly_calendar(7);
    for (auto _ : state) {
        auto roll = evolve_vxx(kCir, paths[0], calendar, 0.2);
        benchmark::DoNotOptimize(roll);
    }
}
BENCHMARK(bm_evolve_vxx)->Unit(benchmark::kMicrosecond);

} // namespace

BENCHMARK_MAIN();
