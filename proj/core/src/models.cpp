#include "noisyal/models.hpp"

#include <algorithm>
#include <cmath>

#include "noisyal/errors.hpp"
#include "noisyal/pca.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

std::string to_string(ClassifierKind kind) {
    return kind == ClassifierKind::Mlp ? "mlp" : "random_forest";
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "mlp") return ClassifierKind::Mlp;
    if (s == "random_forest") return ClassifierKind::RandomForest;
    throw ConfigError("unknown classifier kind '" + s + "' (expected mlp or random_forest)");
}

void ClassifierSpec::validate() const {
    if (kind == ClassifierKind::Mlp) {
        if (mlp.hidden_sizes.empty()) throw ConfigError("mlp: hidden_sizes must not be empty");
        for (int hs : mlp.hidden_sizes)
            if (hs < 1) throw ConfigError("mlp: hidden sizes must be positive");
    } else {
        if (forest.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    }
}

ProbabilityMatrix::ProbabilityMatrix(Eigen::MatrixXd v) : values(std::move(v)) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            const double p = values(i, j);
            if (!(p >= -1e-12 && p <= 1.0 + 1e-12))
                throw std::invalid_argument("probability matrix: entry outside [0, 1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("probability matrix: row does not sum to 1");
    }
}

TrainedModel fit(const ClassifierSpec& spec, const Eigen::MatrixXd& features,
                 const std::vector<int>& labels, int n_classes, std::uint64_t seed) {
    spec.validate();
    if (features.rows() == 0) throw RunError("fit error: empty training set");
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw std::invalid_argument("fit: labels length does not match feature rows");
    if (n_classes < 2) throw RunError("fit error: need at least 2 classes");

    std::vector<int> present(static_cast<std::size_t>(n_classes), 0);
    for (int y : labels) {
        if (y < 0 || y >= n_classes)
            throw std::invalid_argument("fit: label outside [0, n_classes)");
        present[static_cast<std::size_t>(y)] = 1;
    }
    for (int c = 0; c < n_classes; ++c) {
        if (!present[static_cast<std::size_t>(c)])
            throw RunError("fit error: class " + std::to_string(c) +
                           " has no training samples");
    }

    TrainedModel model;
    model.spec = spec;
    model.n_classes = n_classes;
    model.n_features = static_cast<int>(features.cols());
    model.seed = seed;
    if (spec.kind == ClassifierKind::Mlp) {
        model.impl = MlpModel::fit(spec.mlp, features, labels, n_classes, seed);
    } else {
        model.impl = ForestModel::fit(spec.forest, features, labels, n_classes, seed);
    }
    return model;
}

ProbabilityMatrix predict_proba(const TrainedModel& model, const Eigen::MatrixXd& features) {
    if (static_cast<int>(features.cols()) != model.n_features)
        throw std::invalid_argument("predict_proba: shape error, expected " +
                                    std::to_string(model.n_features) + " features, got " +
                                    std::to_string(features.cols()));
    if (model.is_mlp()) return ProbabilityMatrix(model.mlp().predict_proba(features));
    return ProbabilityMatrix(model.forest().predict_proba(features));
}

std::vector<int> predict_labels(const TrainedModel& model, const Eigen::MatrixXd& features) {
    const ProbabilityMatrix probs = predict_proba(model, features);
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        int arg = 0;
        double best = probs.values(i, 0);
        for (Eigen::Index j = 1; j < probs.cols(); ++j) {
            if (probs.values(i, j) > best) {
                best = probs.values(i, j);
                arg = static_cast<int>(j);
            }
        }
        out[static_cast<std::size_t>(i)] = arg;
    }
    return out;
}

EmbeddingMatrix embed(const TrainedModel& model, const Eigen::MatrixXd& features, int target_dim) {
    if (target_dim < 1) throw std::invalid_argument("embed: target_dim must be >= 1");
    if (static_cast<int>(features.cols()) != model.n_features)
        throw std::invalid_argument("embed: shape error on feature dimension");

    EmbeddingMatrix out;
    out.requested_dim = target_dim;

    Eigen::MatrixXd raw;
    if (model.is_mlp()) {
        raw = model.mlp().penultimate(features);
        out.raw_dim = static_cast<int>(raw.cols());
        if (target_dim >= out.raw_dim) {
            out.values = std::move(raw);
            out.reduced = target_dim > out.raw_dim;
            return out;
        }
    } else {
        raw = model.forest().leaf_embedding(features);
        out.raw_dim = static_cast<int>(raw.cols());
        if (out.raw_dim > 2048) {
            Rng rng(mix_seed(model.seed, "embed-columns"));
            std::vector<int> cols = rng.sample_without_replacement(out.raw_dim, 2048);
            std::sort(cols.begin(), cols.end());
            Eigen::MatrixXd sub(raw.rows(), 2048);
            for (std::size_t c = 0; c < cols.size(); ++c)
                sub.col(static_cast<Eigen::Index>(c)) = raw.col(cols[c]);
            raw = std::move(sub);
        }
    }

    const int max_dim = static_cast<int>(std::min(raw.rows(), raw.cols()));
    int dim = target_dim;
    if (dim > max_dim) {
        dim = max_dim;
        out.reduced = true;
    }
    PcaResult p = pca(raw, dim);
    out.values = std::move(p.projected);
    return out;
}

} // namespace noisyal
