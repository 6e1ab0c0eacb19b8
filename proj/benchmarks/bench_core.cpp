#include "odelay/loopsim.hpp"
#include "odelay/satcore.hpp"
#include "odelay/staticmap.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace odelay;

namespace {

void saturating_integral_smooth(benchmark::State& state) {
    const GridFunction f{[](double x) { return x + 0.5 * std::cos(10.0 * x); }};
    for (auto _ : state) {
        benchmark::DoNotOptimize(saturating_integral(f, -2.0, 1.0));
    }
}
BENCHMARK(saturating_integral_smooth);

void solve_cycle_one_line(benchmark::State& state) {
    const auto spec = InterferenceSpec::from_lines({{50.0, 0.2, 0.7}});
    const ComparatorParams cmp{1.0, 1.0, 0.5};
    const RampCycleInput in{1.0, 1.0, 0.0, 0.0};
    const double horizon = default_horizon(in, spec, cmp, delay_integral_bound(spec));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_cycle(in, spec, cmp, horizon));
    }
}
BENCHMARK(solve_cycle_one_line);

void k3_one_line(benchmark::State& state) {
    const auto spec = InterferenceSpec::from_lines({{10.0, 0.5, 0.0}});
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_K3(spec));
    }
}
BENCHMARK(k3_one_line)->Unit(benchmark::kMillisecond);

void static_map_one_line(benchmark::State& state) {
    const auto spec = InterferenceSpec::from_lines({{10.0, 0.5, 0.0}});
    for (auto _ : state) {
        benchmark::DoNotOptimize(static_map(0.2, 0.3, spec));
    }
}
BENCHMARK(static_map_one_line);

} // namespace

BENCHMARK_MAIN();
