#include <benchmark/benchmark.h>

#include "noisyal/dataset.hpp"
#include "noisyal/models.hpp"

namespace {

noisyal::Dataset bench_blobs(int n_samples) {
    noisyal::BlobConfig cfg;
    cfg.n_samples = n_samples;
    cfg.n_features = 2;
    cfg.n_classes = 10;
    cfg.n_blobs = 20;
    cfg.n_noisy_blobs = 5;
    cfg.center_box_halfwidth = 30.0;
    cfg.seed = 7;
    return noisyal::make_noisy_blobs(cfg);
}

void BM_forest_fit(benchmark::State& state) {
    const auto data = bench_blobs(static_cast<int>(state.range(0)));
    noisyal::ClassifierSpec spec;
    spec.kind = noisyal::ClassifierKind::RandomForest;
    spec.forest.n_trees = static_cast<int>(state.range(1));
    for (auto _ : state) {
        auto model = noisyal::fit(spec, data.features, data.labels, data.n_classes, 5);
        benchmark::DoNotOptimize(model.n_classes);
    }
}

void BM_mlp_fit(benchmark::State& state) {
    const auto data = bench_blobs(static_cast<int>(state.range(0)));
    noisyal::ClassifierSpec spec;
    spec.kind = noisyal::ClassifierKind::Mlp;
    for (auto _ : state) {
        auto model = noisyal::fit(spec, data.features, data.labels, data.n_classes, 5);
        benchmark::DoNotOptimize(model.n_classes);
    }
}

void BM_predict_proba(benchmark::State& state) {
    const auto data = bench_blobs(1000);
    noisyal::ClassifierSpec spec;
    spec.kind = noisyal::ClassifierKind::RandomForest;
    spec.forest.n_trees = 100;
    const auto model = noisyal::fit(spec, data.features, data.labels, data.n_classes, 5);
    for (auto _ : state) {
        auto probs = noisyal::predict_proba(model, data.features);
        benchmark::DoNotOptimize(probs.values.data());
    }
}

void BM_embed(benchmark::State& state) {
    const auto data = bench_blobs(1000);
    noisyal::ClassifierSpec spec;
    spec.kind = noisyal::ClassifierKind::RandomForest;
    spec.forest.n_trees = 100;
    const auto model = noisyal::fit(spec, data.features, data.labels, data.n_classes, 5);
    for (auto _ : state) {
        auto emb = noisyal::embed(model, data.features, 32);
        benchmark::DoNotOptimize(emb.values.data());
    }
}

} // namespace

BENCHMARK(BM_forest_fit)->Args({500, 50})->Args({1000, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mlp_fit)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_predict_proba)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_embed)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
