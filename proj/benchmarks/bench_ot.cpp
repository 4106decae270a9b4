#include <benchmark/benchmark.h>

#include "greg/ot.hpp"
#include "greg/rng.hpp"

namespace {

greg::ot::Vector random_simplex(greg::Rng& rng, int n) {
    greg::ot::Vector w(n);
    for (int i = 0; i < n; ++i) w(i) = 0.02 + rng.uniform_real();
    return w / w.sum();
}

greg::ot::Matrix random_cost(greg::Rng& rng, int n, int m) {
    greg::ot::Matrix M(n, m);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) M(i, j) = 2.0 * rng.uniform_real();
    return M;
}

void bm_sinkhorn(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    greg::Rng rng(42);
    auto a = random_simplex(rng, n), b = random_simplex(rng, n);
    auto M = random_cost(rng, n, n);
    greg::ot::SinkhornConfig cfg;  // lambda 100, threshold 0.005
    for (auto _ : state) {
        auto res = greg::ot::sinkhorn(a, b, M, cfg);
        benchmark::DoNotOptimize(res.objective);
    }
}
BENCHMARK(bm_sinkhorn)->Arg(10)->Arg(20)->Arg(50);

void bm_exact_ot(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    greg::Rng rng(43);
    auto a = random_simplex(rng, n), b = random_simplex(rng, n);
    auto M = random_cost(rng, n, n);
    for (auto _ : state) {
        auto plan = greg::ot::exact_ot(a, b, M);
        benchmark::DoNotOptimize(plan.objective);
    }
}
BENCHMARK(bm_exact_ot)->Arg(10)->Arg(20)->Arg(40);

void bm_sinkhorn_grad(benchmark::State& state) {
    int n = static_cast<int>(state.range(0));
    greg::Rng rng(44);
    auto a = random_simplex(rng, n), b = random_simplex(rng, n);
    auto M = random_cost(rng, n, n);
    greg::ot::SinkhornConfig cfg;
    auto res = greg::ot::sinkhorn(a, b, M, cfg);
    for (auto _ : state) {
        auto grads = greg::ot::sinkhorn_grad(res, M);
        benchmark::DoNotOptimize(grads.wrt_cost(0, 0));
    }
}
BENCHMARK(bm_sinkhorn_grad)->Arg(10)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
