#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace noisyal {

// A fully materialized classification dataset. Feature rows, integer class
// labels in [0, n_classes), and (for synthetic data) a per-sample flag telling
// whether the sample came from a noisy blob.
struct Dataset {
    Eigen::MatrixXd features;                          // n_samples x n_features
    std::vector<int> labels;                           // class ids in [0, n_classes)
    std::optional<std::vector<std::uint8_t>> noise_flags;
    int n_classes = 0;
    std::string name;

    int n_samples() const { return static_cast<int>(features.rows()); }
    int n_features() const { return static_cast<int>(features.cols()); }

    // Throws ConfigError when an invariant is broken (label range, flag
    // length, non-finite features).
    void validate() const;
};

// Disjoint labeled / unlabeled / test index sets over one dataset fold.
// Index vectors are kept sorted ascending.
struct PoolState {
    std::vector<int> labeled;
    std::vector<int> unlabeled;
    std::vector<int> test;

    void validate(int n_samples) const;
};

struct BlobConfig {
    int n_samples = 0;
    int n_features = 0;
    int n_classes = 0;
    int n_blobs = 0;
    int n_noisy_blobs = 0;
    double blob_std = 1.0;
    double center_box_halfwidth = 10.0;
    double min_center_separation = 6.0; // in multiples of blob_std
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const BlobConfig&) const = default;
};

// Everything the generator decided, for audits and tests that recount flags
// from blob membership.
struct BlobGeneration {
    Dataset dataset;
    Eigen::MatrixXd centers;                    // n_blobs x n_features
    std::vector<int> blob_of_sample;            // n_samples
    std::vector<std::uint8_t> blob_is_noisy;    // n_blobs
    std::vector<std::pair<int, int>> blob_classes; // (c, c) for regular blobs
};

BlobGeneration make_noisy_blobs_detailed(const BlobConfig& config);
Dataset make_noisy_blobs(const BlobConfig& config);

// CSV ingestion. Header row is mandatory; every non-label, non-noise column is
// a numeric feature. Raw labels are re-encoded to [0, n_classes) in sorted
// order of the distinct raw values and the mapping is recorded in the dataset
// name.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::optional<std::string>& noise_column = std::nullopt);

// Writes the schema load_csv reads back: f0..f{d-1}, label, noise_flag (the
// flag column only when flags are present).
void save_csv(const Dataset& dataset, const std::string& path);

// Repeated stratified k-fold assignments.
struct CvPlan {
    int n_repeats = 0;
    int n_folds = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<int>> fold_of; // [repeat][sample] -> fold id

    std::vector<int> test_indices(int repeat, int fold) const;
    std::vector<int> train_indices(int repeat, int fold) const;
};

CvPlan plan_cv(int n_samples, const std::vector<int>& labels, int n_repeats,
               int n_folds, std::uint64_t seed);

// Seeds the labeled pool with n_seed_per_class samples per class drawn from
// the training fold; the rest of the fold is the unlabeled pool.
PoolState initial_pool(const std::vector<int>& train_indices,
                       const std::vector<int>& test_indices,
                       const std::vector<int>& labels, int n_seed_per_class,
                       std::uint64_t seed);

// Row/element gather helpers shared across modules.
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows);

template <typename T>
std::vector<T> take(const std::vector<T>& v, const std::vector<int>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (int i : idx) out.push_back(v[static_cast<std::size_t>(i)]);
    return out;
}

} // namespace noisyal
