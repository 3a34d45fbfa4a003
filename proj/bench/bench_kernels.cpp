// Serial reference kernels against their OpenMP versions.
#include <cmath>
#include <memory>

#include <benchmark/benchmark.h>

#include "emcel/parallel.hpp"
#include "emcel/scale.hpp"
#include "emcel/simulate.hpp"

namespace {

const emcel::SpeedMeasure& cosh_measure() {
    static const emcel::SpeedMeasure m =
        emcel::from_sde([](double x) { return std::cosh(x); }, emcel::StateInterval::real_line());
    return m;
}

const emcel::SpeedMeasure& sticky_measure() {
    static const emcel::SpeedMeasure m(emcel::StateInterval::real_line(),
                                       {emcel::constant_piece(-emcel::kInf, emcel::kInf, 2.0)}, {{0.0, 1.0}});
    return m;
}

void BM_TableSerial(benchmark::State& state) {
    const emcel::ScaleSolver solver(cosh_measure(), 0.01);
    const auto grid = emcel::make_grid(-6.0, 6.0, 12.0 / static_cast<double>(state.range(0) - 1));
    for (auto _ : state) benchmark::DoNotOptimize(emcel::scale_table_serial(solver, grid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TableParallel(benchmark::State& state) {
    const emcel::ScaleSolver solver(cosh_measure(), 0.01);
    const auto grid = emcel::make_grid(-6.0, 6.0, 12.0 / static_cast<double>(state.range(0) - 1));
    for (auto _ : state) benchmark::DoNotOptimize(emcel::scale_table(solver, grid, emcel::TableMode::bisect_all));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TableOde(benchmark::State& state) {
    const emcel::ScaleSolver solver(cosh_measure(), 0.01);
    const auto grid = emcel::make_grid(-6.0, 6.0, 12.0 / static_cast<double>(state.range(0) - 1));
    for (auto _ : state) benchmark::DoNotOptimize(emcel::scale_table(solver, grid, emcel::TableMode::ode_hybrid));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

emcel::SimConfig sim_config(std::size_t paths) {
    emcel::SimConfig cfg;
    cfg.h = 1.0 / 400.0;
    cfg.T = 1.0;
    cfg.n_paths = paths;
    cfg.seed = 11;
    cfg.record = emcel::Record::terminal;
    return cfg;
}

void BM_ChainSerial(benchmark::State& state) {
    const emcel::TabulatedScale scale(emcel::ScaleSolver(sticky_measure(), 1.0 / 400.0), -5.0, 5.0, 1e-3);
    const auto cfg = sim_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(emcel::simulate_chain_serial(cfg, scale));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 400);
}

void BM_ChainParallel(benchmark::State& state) {
    const emcel::TabulatedScale scale(emcel::ScaleSolver(sticky_measure(), 1.0 / 400.0), -5.0, 5.0, 1e-3);
    const auto cfg = sim_config(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(emcel::simulate_chain(cfg, scale));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 400);
}

}  // namespace

BENCHMARK(BM_TableSerial)->Arg(1201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TableParallel)->Arg(1201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TableOde)->Arg(1201)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainSerial)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChainParallel)->Arg(20000)->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    emcel::configure_threads();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) return 1;
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
