#include "noisyal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <thread>
#include <utility>

#include "noisyal/errors.hpp"
#include "noisyal/evaluation.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

void DatasetSource::validate() const {
    if (type == "generator") {
        generator.validate();
    } else if (type == "csv") {
        if (csv_path.empty()) throw ConfigError("dataset.path must be set for csv sources");
        if (label_column.empty()) throw ConfigError("dataset.label_column must not be empty");
    } else {
        throw ConfigError("dataset.type must be 'generator' or 'csv', got '" + type + "'");
    }
}

void ExperimentConfig::validate() const {
    dataset.validate();
    classifier.validate();
    if (strategies.empty()) throw ConfigError("strategies must not be empty");
    for (const auto& s : strategies) {
        if (!is_known_strategy(s)) {
            std::string valid;
            for (const auto& n : strategy_names()) {
                if (!valid.empty()) valid += ", ";
                valid += n;
            }
            throw ConfigError("unknown strategy '" + s + "' (valid names: " + valid + ")");
        }
    }
    std::vector<std::string> names = strategies;
    std::sort(names.begin(), names.end());
    if (std::adjacent_find(names.begin(), names.end()) != names.end())
        throw ConfigError("strategies must not contain duplicates");
    if (n_iterations < 1) throw ConfigError("n_iterations must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (beta < 1) throw ConfigError("beta must be >= 1");
    if (n_repeats < 1) throw ConfigError("n_repeats must be >= 1");
    if (n_folds < 2) throw ConfigError("n_folds must be >= 2");
    if (n_seed_per_class < 1) throw ConfigError("n_seed_per_class must be >= 1");
    if (kcenter_embed_dim < 1) throw ConfigError("kcenter_embed_dim must be >= 1");
    if (workers < 0) throw ConfigError("workers must be >= 0");
}

Dataset load_dataset(const DatasetSource& source, std::uint64_t master_seed) {
    source.validate();
    if (source.type == "generator") {
        BlobConfig cfg = source.generator;
        cfg.seed = mix_seed(master_seed, "dataset");
        return make_noisy_blobs(cfg);
    }
    return load_csv(source.csv_path, source.label_column, source.noise_column);
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& strategy, int repeat, int fold) {
    std::uint64_t s = mix_seed(master, strategy);
    s = mix_seed(s, static_cast<std::uint64_t>(repeat));
    return mix_seed(s, static_cast<std::uint64_t>(fold));
}

std::uint64_t pool_seed(std::uint64_t master, int repeat, int fold) {
    std::uint64_t s = mix_seed(master, "pool");
    s = mix_seed(s, static_cast<std::uint64_t>(repeat));
    return mix_seed(s, static_cast<std::uint64_t>(fold));
}

bool RunLog::all_cells_ok() const {
    for (const CellStatus& c : cells)
        if (!c.ok) return false;
    return true;
}

namespace {

// Remove `batch` from `unlabeled` and add it to `labeled`; all three index
// sets are kept sorted.
void move_batch(std::vector<int>& labeled, std::vector<int>& unlabeled,
                const std::vector<int>& batch) {
    std::vector<int> sorted_batch = batch;
    std::sort(sorted_batch.begin(), sorted_batch.end());

    std::vector<int> remaining;
    remaining.reserve(unlabeled.size() - sorted_batch.size());
    std::set_difference(unlabeled.begin(), unlabeled.end(), sorted_batch.begin(),
                        sorted_batch.end(), std::back_inserter(remaining));
    unlabeled = std::move(remaining);

    std::vector<int> merged;
    merged.reserve(labeled.size() + sorted_batch.size());
    std::merge(labeled.begin(), labeled.end(), sorted_batch.begin(), sorted_batch.end(),
               std::back_inserter(merged));
    labeled = std::move(merged);
}

BatchSelection select_batch(const std::string& strategy, const Dataset& dataset,
                            const TrainedModel& model, const TrainedModel* ideal,
                            const std::vector<int>& labeled, const std::vector<int>& unlabeled,
                            const ExperimentConfig& config, std::uint64_t select_seed) {
    const int k = config.batch_size;
    if (strategy == "random") return select_random(unlabeled, k, select_seed);

    if (strategy == "kcenter") {
        // Embed the whole training fold so labeled and candidate rows live in
        // one coordinate system; the greedy step works in row indices which
        // are mapped back to sample ids afterwards.
        std::vector<int> fold_ids;
        fold_ids.reserve(labeled.size() + unlabeled.size());
        std::merge(labeled.begin(), labeled.end(), unlabeled.begin(), unlabeled.end(),
                   std::back_inserter(fold_ids));
        const EmbeddingMatrix embedding =
            embed(model, take_rows(dataset.features, fold_ids), config.kcenter_embed_dim);

        auto positions = [&](const std::vector<int>& ids) {
            std::vector<int> pos;
            pos.reserve(ids.size());
            for (int id : ids) {
                const auto it = std::lower_bound(fold_ids.begin(), fold_ids.end(), id);
                pos.push_back(static_cast<int>(it - fold_ids.begin()));
            }
            return pos;
        };
        BatchSelection sel = kcenter_greedy(embedding, positions(labeled), positions(unlabeled), k);
        for (int& idx : sel.indices) idx = fold_ids[static_cast<std::size_t>(idx)];
        return sel;
    }

    const Eigen::MatrixXd candidate_rows = take_rows(dataset.features, unlabeled);
    const ProbabilityMatrix probs = predict_proba(model, candidate_rows);
    if (strategy == "confidence")
        return select_top_k(score_lowest_confidence(probs), unlabeled, k);
    if (strategy == "margin") return select_top_k(score_margin(probs), unlabeled, k);
    if (strategy == "iconfidence") {
        const ProbabilityMatrix ideal_probs = predict_proba(*ideal, candidate_rows);
        return select_top_k(score_iconfidence(probs, ideal_probs, config.iconfidence_mode),
                            unlabeled, k);
    }
    if (strategy == "wkmeans")
        return wkmeans_select(candidate_rows, probs, unlabeled, k, config.beta, select_seed);
    if (strategy == "iwkmeans")
        return iwkmeans_select(candidate_rows, probs, take_rows(dataset.features, labeled),
                               unlabeled, k, config.beta, select_seed);
    throw ConfigError("unknown strategy '" + strategy + "'");
}

double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Linearly interpolated quantile of the sorted values (the common "type 7"
// definition).
double quantile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    if (v.size() == 1) return v[0];
    const double pos = p * static_cast<double>(v.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

} // namespace

std::vector<IterationRecord> run_al_loop(const Dataset& dataset, const PoolState& pool,
                                         const std::string& strategy,
                                         const ExperimentConfig& config, int repeat, int fold,
                                         std::uint64_t seed) {
    if (!is_known_strategy(strategy)) throw ConfigError("unknown strategy '" + strategy + "'");
    pool.validate(dataset.n_samples());
    if (pool.test.empty()) throw RunError("run error: empty test fold");
    if (pool.labeled.empty()) throw RunError("run error: empty initial labeled pool");

    std::vector<int> labeled = pool.labeled;
    std::vector<int> unlabeled = pool.unlabeled;

    const auto fit_on = [&](const std::vector<int>& idx, std::uint64_t s) {
        return fit(config.classifier, take_rows(dataset.features, idx),
                   take(dataset.labels, idx), dataset.n_classes, s);
    };

    TrainedModel model = fit_on(labeled, mix_seed(seed, "fit", 0));

    // The informed strategy's reference model: trained once on the full
    // training fold with its true labels, before any querying happens.
    std::unique_ptr<TrainedModel> ideal;
    if (strategy == "iconfidence") {
        std::vector<int> full_fold;
        full_fold.reserve(labeled.size() + unlabeled.size());
        std::merge(labeled.begin(), labeled.end(), unlabeled.begin(), unlabeled.end(),
                   std::back_inserter(full_fold));
        ideal = std::make_unique<TrainedModel>(fit_on(full_fold, mix_seed(seed, "ideal")));
    }

    const TrainedModel rba_model = fit_on(pool.test, mix_seed(seed, "rba"));
    const Eigen::MatrixXd test_rows = take_rows(dataset.features, pool.test);
    const std::vector<int> test_labels = take(dataset.labels, pool.test);

    std::vector<IterationRecord> records;
    records.reserve(static_cast<std::size_t>(config.n_iterations));
    int cumulative_noisy = 0;
    for (int iter = 1; iter <= config.n_iterations; ++iter) {
        if (unlabeled.empty()) break;
        const auto started = std::chrono::steady_clock::now();

        BatchSelection batch =
            select_batch(strategy, dataset, model, ideal.get(), labeled, unlabeled, config,
                         mix_seed(seed, "select", static_cast<std::uint64_t>(iter)));
        batch.strategy = strategy;
        batch.iteration = iter;

        move_batch(labeled, unlabeled, batch.indices);
        model = fit_on(labeled, mix_seed(seed, "fit", static_cast<std::uint64_t>(iter)));

        IterationRecord rec;
        rec.strategy = strategy;
        rec.repeat = repeat;
        rec.fold = fold;
        rec.iteration = iter;
        rec.batch = batch.indices;
        rec.test_accuracy = accuracy(predict_labels(model, test_rows), test_labels);
        rec.batch_nsr = nsr(batch, dataset.noise_flags);
        if (const std::optional<int> noisy = count_noisy(batch, dataset.noise_flags)) {
            cumulative_noisy += *noisy;
            rec.cumulative_noisy = cumulative_noisy;
        }
        rec.batch_rba = rba_on_model(rba_model, batch, dataset);
        rec.truncated = static_cast<int>(batch.indices.size()) < config.batch_size ||
                        (unlabeled.empty() && iter < config.n_iterations);
        rec.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        records.push_back(std::move(rec));
    }
    return records;
}

RunLog run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Dataset dataset = load_dataset(config.dataset, config.seed);
    dataset.validate();

    const CvPlan plan = plan_cv(dataset.n_samples(), dataset.labels, config.n_repeats,
                                config.n_folds, mix_seed(config.seed, "cv"));

    // Pools depend only on (repeat, fold), never on the strategy list, so
    // every strategy sees the same starting state.
    std::vector<std::vector<PoolState>> pools(
        static_cast<std::size_t>(config.n_repeats),
        std::vector<PoolState>(static_cast<std::size_t>(config.n_folds)));
    for (int r = 0; r < config.n_repeats; ++r)
        for (int f = 0; f < config.n_folds; ++f)
            pools[static_cast<std::size_t>(r)][static_cast<std::size_t>(f)] =
                initial_pool(plan.train_indices(r, f), plan.test_indices(r, f), dataset.labels,
                             config.n_seed_per_class, pool_seed(config.seed, r, f));

    struct Cell {
        std::string strategy;
        int repeat;
        int fold;
    };
    std::vector<Cell> cells;
    for (const std::string& s : config.strategies)
        for (int r = 0; r < config.n_repeats; ++r)
            for (int f = 0; f < config.n_folds; ++f) cells.push_back({s, r, f});

    struct CellResult {
        std::vector<IterationRecord> records;
        CellStatus status;
    };
    std::vector<CellResult> results(cells.size());

    const auto run_cell = [&](std::size_t i) {
        const Cell& cell = cells[i];
        CellResult& out = results[i];
        out.status = {cell.strategy, cell.repeat, cell.fold, true, ""};
        try {
            out.records = run_al_loop(
                dataset,
                pools[static_cast<std::size_t>(cell.repeat)][static_cast<std::size_t>(cell.fold)],
                cell.strategy, config, cell.repeat, cell.fold,
                cell_seed(config.seed, cell.strategy, cell.repeat, cell.fold));
        } catch (const std::exception& e) {
            out.status.ok = false;
            out.status.error = "cell strategy=" + cell.strategy +
                               " repeat=" + std::to_string(cell.repeat) +
                               " fold=" + std::to_string(cell.fold) + ": " + e.what();
            out.records.clear();
        }
    };

    int workers = config.workers;
    if (workers == 0) {
        workers = static_cast<int>(std::thread::hardware_concurrency());
        if (workers < 1) workers = 1;
    }
    workers = std::min<int>(workers, static_cast<int>(cells.size()));

    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            threads.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= cells.size()) return;
                    run_cell(i);
                }
            });
        }
        for (std::thread& t : threads) t.join();
    }

    // Merge in cell-list order so the output is independent of completion
    // order.
    RunLog log;
    log.config = config;
    for (CellResult& r : results) {
        log.cells.push_back(r.status);
        for (IterationRecord& rec : r.records) log.records.push_back(std::move(rec));
    }
    log.aggregates = compute_aggregates(log.records);
    return log;
}

std::vector<StrategyAggregate> compute_aggregates(const std::vector<IterationRecord>& records) {
    std::map<std::string, std::map<std::pair<int, int>, std::vector<const IterationRecord*>>>
        by_strategy;
    for (const IterationRecord& r : records)
        by_strategy[r.strategy][{r.repeat, r.fold}].push_back(&r);

    std::vector<StrategyAggregate> out;
    for (const auto& [name, runs] : by_strategy) {
        StrategyAggregate agg;
        agg.strategy = name;
        agg.n_runs = static_cast<int>(runs.size());

        std::vector<double> aucs;
        std::vector<double> rbas;
        std::vector<double> nsrs;
        std::vector<double> pooled_accuracy;
        bool have_nsr = true;
        for (const auto& [key, recs] : runs) {
            std::vector<double> accs;
            double rba_sum = 0.0;
            int selected = 0;
            for (const IterationRecord* r : recs) {
                accs.push_back(r->test_accuracy);
                pooled_accuracy.push_back(r->test_accuracy);
                rba_sum += r->batch_rba;
                selected += static_cast<int>(r->batch.size());
            }
            aucs.push_back(accuracy_auc(accs));
            rbas.push_back(rba_sum / static_cast<double>(recs.size()));
            const std::optional<int>& final_noisy = recs.back()->cumulative_noisy;
            if (final_noisy && selected > 0) {
                nsrs.push_back(static_cast<double>(*final_noisy) / static_cast<double>(selected));
            } else {
                have_nsr = false;
            }
        }

        agg.auc_mean = mean_of(aucs);
        agg.auc_std = sample_std(aucs);
        agg.auc_q10 = quantile(aucs, 0.10);
        agg.auc_q90 = quantile(aucs, 0.90);
        agg.accuracy_q10_pooled = quantile(pooled_accuracy, 0.10);
        agg.accuracy_q90_pooled = quantile(pooled_accuracy, 0.90);
        agg.rba_mean = mean_of(rbas);
        agg.rba_std = sample_std(rbas);
        if (have_nsr && !nsrs.empty()) {
            agg.nsr_mean = mean_of(nsrs);
            agg.nsr_std = sample_std(nsrs);
        }
        out.push_back(std::move(agg));
    }
    return out;
}

} // namespace noisyal
