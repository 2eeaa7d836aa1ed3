#include <benchmark/benchmark.h>

#include <random>

#include "ministep/solvers.hpp"
#include "support/generators.hpp"

using namespace ministep;

namespace {

LinearSystem make_system(int n) {
    testgen::Rng rng(static_cast<unsigned>(n) * 7919u + 1u);
    LinearSystem sys;
    sys.a = testgen::random_dominant_matrix(rng, n);
    sys.b = testgen::random_vector(rng, n);
    return sys;
}

void BM_SolveLU(benchmark::State& state) {
    const LinearSystem sys = make_system(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_direct(sys));
    }
}

void BM_SolveJacobi(benchmark::State& state) {
    const LinearSystem sys = make_system(static_cast<int>(state.range(0)));
    SolverConfig cfg;
    cfg.method = SolverMethod::Jacobi;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_jacobi(sys, cfg));
    }
}

void BM_SolveGaussSeidel(benchmark::State& state) {
    const LinearSystem sys = make_system(static_cast<int>(state.range(0)));
    SolverConfig cfg;
    cfg.method = SolverMethod::GaussSeidel;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_gauss_seidel(sys, cfg));
    }
}

void BM_SolveBlockJacobi(benchmark::State& state) {
    const LinearSystem sys = make_system(static_cast<int>(state.range(0)));
    SolverConfig cfg;
    cfg.method = SolverMethod::BlockJacobi;
    cfg.block_count = static_cast<int>(state.range(1));
    cfg.parallel_blocks = state.range(2) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_block_jacobi(sys, cfg));
    }
}

}  // namespace

BENCHMARK(BM_SolveLU)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_SolveJacobi)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_SolveGaussSeidel)->Arg(16)->Arg(64)->Arg(256);
BENCHMARK(BM_SolveBlockJacobi)
    ->Args({64, 4, 0})
    ->Args({64, 4, 1})
    ->Args({256, 4, 0})
    ->Args({256, 4, 1});
