#include "noisyal/evaluation.hpp"

#include <stdexcept>

#include "noisyal/errors.hpp"
#include "noisyal/rng.hpp"
#include "noisyal/text.hpp"

namespace noisyal {

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size())
        throw std::invalid_argument("accuracy: length mismatch");
    if (predicted.empty()) throw std::invalid_argument("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

double accuracy_auc(const std::vector<double>& per_iteration_accuracy) {
    if (per_iteration_accuracy.empty())
        throw std::invalid_argument("accuracy_auc: empty accuracy series");
    double sum = 0.0;
    for (double a : per_iteration_accuracy) sum += a;
    return 100.0 * sum / static_cast<double>(per_iteration_accuracy.size());
}

std::optional<int> count_noisy(const BatchSelection& batch,
                               const std::optional<std::vector<std::uint8_t>>& noise_flags) {
    if (!noise_flags) return std::nullopt;
    int noisy = 0;
    for (int i : batch.indices) {
        if (i < 0 || static_cast<std::size_t>(i) >= noise_flags->size())
            throw std::invalid_argument("nsr: batch index outside the flagged dataset");
        noisy += (*noise_flags)[static_cast<std::size_t>(i)] ? 1 : 0;
    }
    return noisy;
}

std::optional<double> nsr(const BatchSelection& batch,
                          const std::optional<std::vector<std::uint8_t>>& noise_flags) {
    if (batch.indices.empty()) throw std::invalid_argument("nsr: empty batch");
    const std::optional<int> noisy = count_noisy(batch, noise_flags);
    if (!noisy) return std::nullopt;
    return static_cast<double>(*noisy) / static_cast<double>(batch.indices.size());
}

double rba_on_model(const TrainedModel& test_model, const BatchSelection& batch,
                    const Dataset& dataset) {
    if (batch.indices.empty()) throw std::invalid_argument("rba: empty batch");
    const Eigen::MatrixXd rows = take_rows(dataset.features, batch.indices);
    const std::vector<int> truth = take(dataset.labels, batch.indices);
    return accuracy(predict_labels(test_model, rows), truth);
}

double rba(const BatchSelection& batch, const Dataset& dataset,
           const std::vector<int>& test_indices, const ClassifierSpec& spec,
           std::uint64_t seed) {
    if (test_indices.empty()) throw std::invalid_argument("rba: empty test set");
    const Eigen::MatrixXd test_rows = take_rows(dataset.features, test_indices);
    const std::vector<int> test_labels = take(dataset.labels, test_indices);
    const TrainedModel model = fit(spec, test_rows, test_labels, dataset.n_classes, seed);
    return rba_on_model(model, batch, dataset);
}

Histogram confidence_histogram(const Dataset& dataset, const ClassifierSpec& spec, int n_bins,
                               std::uint64_t seed) {
    if (n_bins < 1) throw std::invalid_argument("confidence_histogram: n_bins must be >= 1");
    dataset.validate();

    Histogram h;
    h.bin_low.resize(static_cast<std::size_t>(n_bins));
    h.bin_high.resize(static_cast<std::size_t>(n_bins));
    h.counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (int b = 0; b < n_bins; ++b) {
        h.bin_low[static_cast<std::size_t>(b)] = static_cast<double>(b) / n_bins;
        h.bin_high[static_cast<std::size_t>(b)] = static_cast<double>(b + 1) / n_bins;
    }

    const CvPlan plan = plan_cv(dataset.n_samples(), dataset.labels, 1, 2,
                                mix_seed(seed, "audit-split"));
    for (int fold = 0; fold < 2; ++fold) {
        const std::vector<int> train = plan.train_indices(0, fold);
        const std::vector<int> held = plan.test_indices(0, fold);
        const TrainedModel model =
            fit(spec, take_rows(dataset.features, train), take(dataset.labels, train),
                dataset.n_classes, mix_seed(seed, "audit-fit", static_cast<std::uint64_t>(fold)));
        const ProbabilityMatrix probs =
            predict_proba(model, take_rows(dataset.features, held));
        for (Eigen::Index i = 0; i < probs.rows(); ++i) {
            const double top = probs.values.row(i).maxCoeff();
            int bin = static_cast<int>(top * n_bins);
            if (bin >= n_bins) bin = n_bins - 1; // top == 1.0 lands in the last bin
            if (bin < 0) bin = 0;
            ++h.counts[static_cast<std::size_t>(bin)];
        }
    }
    return h;
}

std::string histogram_to_csv(const Histogram& histogram) {
    std::string out = "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
        out += format_double(histogram.bin_low[b]);
        out += ',';
        out += format_double(histogram.bin_high[b]);
        out += ',';
        out += std::to_string(histogram.counts[b]);
        out += '\n';
    }
    return out;
}

} // namespace noisyal
