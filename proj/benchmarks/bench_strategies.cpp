#include <benchmark/benchmark.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "noisyal/models.hpp"
#include "noisyal/rng.hpp"
#include "noisyal/strategies.hpp"

namespace {

// A candidate pool with synthetic probabilities; no model in the loop so the
// numbers isolate the selection kernels themselves.
struct Pool {
    Eigen::MatrixXd points;
    noisyal::ProbabilityMatrix probs;
    std::vector<int> candidates;
};

Pool make_pool(int n, int n_classes) {
    noisyal::Rng rng(21);
    Pool pool;
    pool.points = Eigen::MatrixXd(n, 4);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 4; ++j) pool.points(i, j) = rng.uniform(-10.0, 10.0);

    Eigen::MatrixXd probs(n, n_classes);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int c = 0; c < n_classes; ++c) {
            probs(i, c) = -std::log(1.0 - rng.uniform());
            total += probs(i, c);
        }
        probs.row(i) /= total;
    }
    pool.probs = noisyal::ProbabilityMatrix(probs);

    pool.candidates.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool.candidates[static_cast<std::size_t>(i)] = i;
    return pool;
}

void BM_margin_top_k(benchmark::State& state) {
    const auto pool = make_pool(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) {
        const auto scores = noisyal::score_margin(pool.probs);
        benchmark::DoNotOptimize(noisyal::select_top_k(scores, pool.candidates, 10));
    }
}

void BM_kcenter_greedy(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto pool = make_pool(n, 10);
    noisyal::EmbeddingMatrix emb;
    emb.values = pool.points;
    emb.requested_dim = 4;
    emb.raw_dim = 4;
    const std::vector<int> labeled = {0, 1, 2, 3};
    std::vector<int> cands(pool.candidates.begin() + 4, pool.candidates.end());
    for (auto _ : state)
        benchmark::DoNotOptimize(noisyal::kcenter_greedy(emb, labeled, cands, 10));
}

void BM_wkmeans_select(benchmark::State& state) {
    const auto pool = make_pool(static_cast<int>(state.range(0)), 10);
    for (auto _ : state) {
        auto batch = noisyal::wkmeans_select(pool.points, pool.probs, pool.candidates, 10,
                                             static_cast<int>(state.range(1)), 9);
        benchmark::DoNotOptimize(batch.indices.data());
    }
}

void BM_iwkmeans_select(benchmark::State& state) {
    const auto pool = make_pool(static_cast<int>(state.range(0)), 10);
    const int n_labeled = static_cast<int>(state.range(1));
    noisyal::Rng rng(31);
    Eigen::MatrixXd labeled(n_labeled, 4);
    for (int i = 0; i < n_labeled; ++i)
        for (int j = 0; j < 4; ++j) labeled(i, j) = rng.uniform(-10.0, 10.0);
    for (auto _ : state) {
        auto batch = noisyal::iwkmeans_select(pool.points, pool.probs, labeled, pool.candidates,
                                              10, 10, 9);
        benchmark::DoNotOptimize(batch.indices.data());
    }
}

} // namespace

BENCHMARK(BM_margin_top_k)->Arg(1000)->Arg(10000);
BENCHMARK(BM_kcenter_greedy)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_wkmeans_select)->Args({1000, 10})->Args({5000, 10})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_iwkmeans_select)
    ->Args({1000, 20})
    ->Args({1000, 100})
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
