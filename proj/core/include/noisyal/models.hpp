#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "noisyal/forest.hpp"
#include "noisyal/mlp.hpp"

namespace noisyal {

enum class ClassifierKind { Mlp, RandomForest };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& s);

// Declarative classifier configuration; only the block matching `kind` is
// consulted.
struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::RandomForest;
    MlpParams mlp;
    ForestParams forest;

    void validate() const;
    bool operator==(const ClassifierSpec&) const = default;
};

// Row-stochastic class-probability matrix. The checked constructor enforces
// entries in [0,1] and unit row sums within 1e-9.
struct ProbabilityMatrix {
    Eigen::MatrixXd values;

    ProbabilityMatrix() = default;
    explicit ProbabilityMatrix(Eigen::MatrixXd v);

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
};

struct EmbeddingMatrix {
    Eigen::MatrixXd values;
    int requested_dim = 0;
    int raw_dim = 0;      // dimension before any PCA
    bool reduced = false; // true when requested_dim exceeded what was available
};

// A fitted classifier plus the metadata needed to reuse it.
struct TrainedModel {
    ClassifierSpec spec;
    int n_classes = 0;
    int n_features = 0;
    std::uint64_t seed = 0;
    std::variant<MlpModel, ForestModel> impl;

    bool is_mlp() const { return std::holds_alternative<MlpModel>(impl); }
    const MlpModel& mlp() const { return std::get<MlpModel>(impl); }
    const ForestModel& forest() const { return std::get<ForestModel>(impl); }
};

// Deterministic in (spec, data, seed). Requires every class in [0, n_classes)
// to appear in the training labels; a single-class set is a fit error.
TrainedModel fit(const ClassifierSpec& spec, const Eigen::MatrixXd& features,
                 const std::vector<int>& labels, int n_classes, std::uint64_t seed);

ProbabilityMatrix predict_proba(const TrainedModel& model, const Eigen::MatrixXd& features);

std::vector<int> predict_labels(const TrainedModel& model, const Eigen::MatrixXd& features);

// Model-space embedding used by KCenter: leaf one-hots (forest) or
// penultimate activations (MLP), PCA-reduced to target_dim. The PCA is fitted
// on exactly the rows supplied; callers pass the union of labeled and
// unlabeled samples. Forest one-hot columns beyond 2048 are subsampled by
// seeded choice before the PCA.
EmbeddingMatrix embed(const TrainedModel& model, const Eigen::MatrixXd& features, int target_dim);

} // namespace noisyal
