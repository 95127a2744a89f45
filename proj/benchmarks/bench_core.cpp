#include <numbers>

#include <benchmark/benchmark.h>

#include "spincool/lindblad.hpp"
#include "spincool/protocol.hpp"

using namespace spincool;

namespace {

ModelParams model(int n_spins, double lambda, int d, Basis basis = Basis::product) {
    ModelParams p;
    p.n_spins = n_spins;
    p.lambda = lambda;
    p.t = std::numbers::pi / 2.0;
    p.nbar = 10.0;
    p.fock_dim = d;
    p.basis = basis;
    return p;
}

void BM_Displacement(benchmark::State &state) {
    const int d = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(displacement_matrix(cplx{0.12, -0.12}, d));
    }
}
BENCHMARK(BM_Displacement)->Arg(60)->Arg(150);

void BM_CollectiveStep(benchmark::State &state) {
    const ModelParams p = model(50, 0.028, 150, Basis::collective);
    const Strategy st = Strategy::collective(50);
    const MechState th = thermal_density(10.0, 150);
    for (auto _ : state) {
        const StepMap map = build_step_superoperator(p, st);
        benchmark::DoNotOptimize(map.apply(th.rho()));
    }
}
BENCHMARK(BM_CollectiveStep)->Unit(benchmark::kMillisecond);

void BM_SingleStepEvaluator(benchmark::State &state) {
    const ModelParams p = model(1, 0.12, 150);
    const SingleStepEvaluator eval(p, Strategy::independent(1));
    double lambda = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(eval(lambda));
        lambda = lambda > 0.3 ? 0.0 : lambda + 1e-3;
    }
}
BENCHMARK(BM_SingleStepEvaluator);

void BM_LiouvillianApply(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    const ModelParams p = model(n, 0.12, 40);
    const QuantumState q =
        QuantumState::product(p.spin_basis(), equal_superposition(1 << n), thermal_density(3.0, 40));
    const LindbladRates rates{1e-3, 1e-3, 1e-2, std::nullopt};
    for (auto _ : state) {
        benchmark::DoNotOptimize(liouvillian_apply(q, p, rates));
    }
}
BENCHMARK(BM_LiouvillianApply)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_RatioSweep(benchmark::State &state) {
    const ModelParams p = model(1, 0.12, 150);
    std::vector<double> lambdas;
    for (int i = 0; i <= 60; ++i) {
        lambdas.push_back(0.005 * i);
    }
    const std::vector<double> times{std::numbers::pi / 4.0, std::numbers::pi / 2.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(sweep_ratio(p, Strategy::independent(1), lambdas, times, 1));
    }
}
BENCHMARK(BM_RatioSweep)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
