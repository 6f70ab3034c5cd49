#include "degenctl/carleman.hpp"
#include "degenctl/hum.hpp"
#include "degenctl/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

using namespace degenctl;

namespace {

ControlProblem default_problem(const Grid& g) {
    return {DiffusionProfile::power_law(0.4, 0.6, 2.0, 2.0), Potential::zero(), {0.3, 0.7}, g.T,
            SpaceSlice::sample(g, [](double x) { return std::sin(std::numbers::pi * x); })};
}

void BM_ForwardSolve(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const Grid g = build_grid(n, 2 * (n + 1), 0.5);
    const auto problem = default_problem(g);
    const DiscreteOperator op(problem, g);
    const auto f = SpaceTimeField::zeros(g);
    for (auto _ : state) benchmark::DoNotOptimize(solve_forward(op, problem.u0, f));
    state.SetItemsProcessed(state.iterations() * g.n * g.m);
}
BENCHMARK(BM_ForwardSolve)->Arg(99)->Arg(199)->Arg(399);

void BM_TimeDependentPotential(benchmark::State& state) {
    const Grid g = build_grid(199, 400, 0.5);
    auto problem = default_problem(g);
    problem.c = Potential::sin_cos(1.0);
    const DiscreteOperator op(problem, g);
    const auto f = SpaceTimeField::zeros(g);
    for (auto _ : state) benchmark::DoNotOptimize(solve_forward(op, problem.u0, f));
    state.SetItemsProcessed(state.iterations() * g.n * g.m);
}
BENCHMARK(BM_TimeDependentPotential);

void BM_GramianApply(benchmark::State& state) {
    const Grid g = build_grid(199, 400, 0.5);
    const auto problem = default_problem(g);
    const Gramian gramian(problem, g);
    for (auto _ : state) benchmark::DoNotOptimize(gramian.apply(problem.u0));
}
BENCHMARK(BM_GramianApply);

void BM_HumSolve(benchmark::State& state) {
    const Grid g = build_grid(199, 400, 0.5);
    const auto problem = default_problem(g);
    const Gramian gramian(problem, g);
    const double eps = std::pow(10.0, -static_cast<double>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(hum_solve(gramian, problem, eps));
}
BENCHMARK(BM_HumSolve)->DenseRange(1, 5)->Unit(benchmark::kMillisecond);

void BM_WeightTables(benchmark::State& state) {
    const Grid g = build_grid(199, 400, 0.5);
    const auto problem = default_problem(g);
    const auto params = CarlemanParams::for_profile(problem.profile, 8.0, 4.0, g.T, 0.15);
    for (auto _ : state) benchmark::DoNotOptimize(WeightTables(params, g));
}
BENCHMARK(BM_WeightTables)->Unit(benchmark::kMillisecond);

void BM_CarlemanReport(benchmark::State& state) {
    const Grid g = build_grid(199, 400, 0.5);
    const auto problem = default_problem(g);
    const DiscreteOperator op(problem, g);
    const WeightTables w(CarlemanParams::for_profile(problem.profile, 8.0, 4.0, g.T, 0.15), g);
    const StudySample sample = random_fourier_sample(op, 1, 0);
    const SpaceTimeField v = solve_adjoint(op, sample.vT, sample.h);
    for (auto _ : state) benchmark::DoNotOptimize(carleman_report(v, sample.h, problem, w));
}
BENCHMARK(BM_CarlemanReport)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
