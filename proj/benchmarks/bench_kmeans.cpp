#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <vector>

#include "noisyal/kmeans.hpp"
#include "noisyal/rng.hpp"

namespace {

Eigen::MatrixXd random_points(int n, int d, std::uint64_t seed) {
    noisyal::Rng rng(seed);
    Eigen::MatrixXd pts(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) pts(i, j) = rng.uniform(-10.0, 10.0);
    return pts;
}

std::vector<double> random_weights(int n, std::uint64_t seed) {
    noisyal::Rng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(n));
    for (auto& x : w) x = rng.uniform(0.05, 2.0);
    return w;
}

void BM_kmeanspp_init(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    const auto points = random_points(n, 8, 1);
    const auto weights = random_weights(n, 2);
    for (auto _ : state) {
        noisyal::Rng rng(3);
        benchmark::DoNotOptimize(noisyal::kmeanspp_init(points, weights, k, rng));
    }
}

void BM_kmeans_fixed(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int k = static_cast<int>(state.range(1));
    const int m = static_cast<int>(state.range(2));
    const auto points = random_points(n, 8, 11);
    const auto weights = random_weights(n, 12);
    const Eigen::MatrixXd fixed =
        m > 0 ? random_points(m, 8, 13) : Eigen::MatrixXd(0, 8);
    for (auto _ : state) {
        auto res = noisyal::kmeans_fixed(points, weights, k, fixed, 14);
        benchmark::DoNotOptimize(res.inertia);
    }
}

} // namespace

BENCHMARK(BM_kmeanspp_init)->Args({100, 10})->Args({1000, 10})->Args({1000, 50});
BENCHMARK(BM_kmeans_fixed)
    ->Args({100, 10, 0})
    ->Args({1000, 10, 0})
    ->Args({1000, 10, 40})   // the scale iwkmeans hits late in a run
    ->Args({5000, 20, 100})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
