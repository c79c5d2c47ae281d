#pragma once

// Experiment orchestration: the batch active-learning loop, the grid of
// (strategy x repeat x fold) cells with per-cell seed isolation, and the
// on-disk run layout (records.csv, timings.csv, config.json, aggregates.json).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noisyal/dataset.hpp"
#include "noisyal/models.hpp"
#include "noisyal/strategies.hpp"

namespace noisyal {

struct DatasetSource {
    std::string type = "generator"; // "generator" or "csv"
    // type == "generator": its seed field is ignored; the harness derives the
    // generator seed from the experiment's master seed.
    BlobConfig generator;
    // type == "csv":
    std::string csv_path;
    std::string label_column = "label";
    std::optional<std::string> noise_column;

    void validate() const;
    bool operator==(const DatasetSource&) const = default;
};

struct ExperimentConfig {
    DatasetSource dataset;
    ClassifierSpec classifier;
    std::vector<std::string> strategies;
    int n_iterations = 10;
    int batch_size = 20;
    int beta = 10;
    int n_repeats = 5;
    int n_folds = 2;
    int n_seed_per_class = 1;
    std::uint64_t seed = 0;
    IConfidenceMode iconfidence_mode = IConfidenceMode::IdealMax;
    int kcenter_embed_dim = 32;
    int workers = 1; // 0 = use all hardware threads
    std::string out_dir;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

// Strict JSON binding: unknown keys and malformed values raise ConfigError
// naming the offending key. to_json(from_json(x)) is canonical, so the config
// echo written next to results is byte-stable.
ExperimentConfig experiment_config_from_json(const std::string& text);
std::string experiment_config_to_json(const ExperimentConfig& config);

// Minimal config for the confidence-distribution audit: just a dataset, a
// classifier and a seed.
struct AuditConfig {
    DatasetSource dataset;
    ClassifierSpec classifier;
    std::uint64_t seed = 0;

    bool operator==(const AuditConfig&) const = default;
};

AuditConfig audit_config_from_json(const std::string& text);

// The dataset block on its own, as consumed by the generate command.
DatasetSource dataset_source_from_json(const std::string& text);
std::string dataset_source_to_json(const DatasetSource& source);

// Materializes the configured dataset; generator sources draw their seed from
// the master seed so one config + seed pins the data exactly.
Dataset load_dataset(const DatasetSource& source, std::uint64_t master_seed);

struct IterationRecord {
    std::string strategy;
    int repeat = 0;
    int fold = 0;
    int iteration = 0;        // 1-based, contiguous within a run
    std::vector<int> batch;   // selected sample ids, in selection order
    double test_accuracy = 0.0;
    std::optional<double> batch_nsr;     // absent without noise flags
    std::optional<int> cumulative_noisy; // noisy picks so far, absent likewise
    double batch_rba = 0.0;
    bool truncated = false; // pool ran dry at or before this iteration
    // Wall clock, kept out of records.csv so result files stay byte-stable.
    double duration_seconds = 0.0;

    bool operator==(const IterationRecord&) const = default;
};

struct CellStatus {
    std::string strategy;
    int repeat = 0;
    int fold = 0;
    bool ok = true;
    std::string error; // empty when ok

    bool operator==(const CellStatus&) const = default;
};

struct StrategyAggregate {
    std::string strategy;
    int n_runs = 0;
    double auc_mean = 0.0;
    double auc_std = 0.0;
    double auc_q10 = 0.0; // quantiles over per-run AUCs
    double auc_q90 = 0.0;
    double accuracy_q10_pooled = 0.0; // quantiles over pooled per-iteration accuracies
    double accuracy_q90_pooled = 0.0;
    std::optional<double> nsr_mean; // final cumulative NSR per run, averaged
    std::optional<double> nsr_std;
    double rba_mean = 0.0; // per-run mean RBA, averaged
    double rba_std = 0.0;

    bool operator==(const StrategyAggregate&) const = default;
};

struct RunLog {
    ExperimentConfig config;
    std::vector<IterationRecord> records;
    std::vector<CellStatus> cells;
    std::vector<StrategyAggregate> aggregates;

    bool all_cells_ok() const;
    bool operator==(const RunLog&) const = default;
};

// Derived seeds. These are part of the determinism contract: cell seeds
// depend on the strategy name (not its position), so adding or removing
// strategies leaves every other cell's results untouched.
std::uint64_t cell_seed(std::uint64_t master, const std::string& strategy, int repeat, int fold);
std::uint64_t pool_seed(std::uint64_t master, int repeat, int fold);

// One active-learning run on a fixed fold. Per iteration: select a batch from
// the unlabeled pool, reveal its labels, retrain, and record test accuracy,
// NSR and RBA. The informed strategy fits its ideal model once, on the whole
// training fold, before the first iteration.
std::vector<IterationRecord> run_al_loop(const Dataset& dataset, const PoolState& pool,
                                         const std::string& strategy,
                                         const ExperimentConfig& config, int repeat, int fold,
                                         std::uint64_t seed);

// The full grid. Failed cells are recorded and skipped in aggregation;
// surviving cells are unaffected (seed isolation).
RunLog run_experiment(const ExperimentConfig& config);

// Per-strategy aggregates, recomputable bit-exactly from the records.
std::vector<StrategyAggregate> compute_aggregates(const std::vector<IterationRecord>& records);

// Directory layout: records.csv, timings.csv, config.json, aggregates.json.
// load(persist(x)) == x field-for-field; schema changes raise ConfigError.
void persist_runlog(const RunLog& log, const std::string& directory);
RunLog load_runlog(const std::string& directory);

} // namespace noisyal
