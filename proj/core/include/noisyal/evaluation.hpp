#pragma once

// Metrics for judging query strategies: plain accuracy, accuracy AUC over an
// active-learning run, the noisy-sample ratio (NSR) of a selected batch, and
// reverse batch accuracy (RBA). Also the confidence-distribution audit that
// motivates the informed strategies: on noisy data a model's top predicted
// probability concentrates well below 1.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "noisyal/dataset.hpp"
#include "noisyal/models.hpp"
#include "noisyal/strategies.hpp"

namespace noisyal {

// Fraction of positions where predicted == truth.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// Mean of the per-iteration test accuracies, reported on a 0-100 scale.
double accuracy_auc(const std::vector<double>& per_iteration_accuracy);

// Fraction of the batch flagged noisy. Returns nullopt when the dataset has
// no noise flags (real datasets), so callers can mark the metric unavailable.
std::optional<double> nsr(const BatchSelection& batch,
                          const std::optional<std::vector<std::uint8_t>>& noise_flags);

// Number of flagged samples in the batch, for cumulative noise accounting.
std::optional<int> count_noisy(const BatchSelection& batch,
                               const std::optional<std::vector<std::uint8_t>>& noise_flags);

// Reverse batch accuracy: fit `spec` on the test fold (with its true labels)
// and score that model's accuracy on the batch. Predictable batches score
// high; batches full of noisy samples score near chance.
double rba(const BatchSelection& batch, const Dataset& dataset,
           const std::vector<int>& test_indices, const ClassifierSpec& spec,
           std::uint64_t seed);

// Same metric with the test-fold model already fitted; the harness fits it
// once per fold and reuses it across iterations.
double rba_on_model(const TrainedModel& test_model, const BatchSelection& batch,
                    const Dataset& dataset);

struct Histogram {
    std::vector<double> bin_low;
    std::vector<double> bin_high;
    std::vector<long long> counts;
};

// 2-fold cross-prediction: fit on one half, collect max predicted probability
// on the other half, swap, and histogram all n values into n_bins equal-width
// bins over [0, 1] (the value 1.0 lands in the top bin).
Histogram confidence_histogram(const Dataset& dataset, const ClassifierSpec& spec, int n_bins,
                               std::uint64_t seed);

// CSV with header bin_low,bin_high,count.
std::string histogram_to_csv(const Histogram& histogram);

} // namespace noisyal
