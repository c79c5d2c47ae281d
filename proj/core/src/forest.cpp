#include "noisyal/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "noisyal/errors.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

namespace {

std::vector<int> class_counts(const std::vector<int>& labels, const std::vector<int>& indices,
                              int begin, int end, int n_classes) {
    std::vector<int> counts(static_cast<std::size_t>(n_classes), 0);
    for (int i = begin; i < end; ++i)
        ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(
            indices[static_cast<std::size_t>(i)])])];
    return counts;
}

double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double sum_sq = 0.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / total;
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double impurity = std::numeric_limits<double>::infinity(); // weighted child Gini
};

// Best threshold on one feature by a sorted sweep over the node's samples.
SplitCandidate best_split_on_feature(const Eigen::MatrixXd& features,
                                     const std::vector<int>& labels, int n_classes, int feature,
                                     const std::vector<int>& indices, int begin, int end,
                                     int min_samples_leaf) {
    const int n = end - begin;
    std::vector<std::pair<double, int>> values;
    values.reserve(static_cast<std::size_t>(n));
    for (int i = begin; i < end; ++i) {
        const int idx = indices[static_cast<std::size_t>(i)];
        values.emplace_back(features(idx, feature), labels[static_cast<std::size_t>(idx)]);
    }
    std::sort(values.begin(), values.end());

    SplitCandidate best;
    best.feature = feature;
    std::vector<int> left(static_cast<std::size_t>(n_classes), 0);
    std::vector<int> right(static_cast<std::size_t>(n_classes), 0);
    for (const auto& [v, y] : values) ++right[static_cast<std::size_t>(y)];

    for (int i = 0; i < n - 1; ++i) {
        const auto& [v, y] = values[static_cast<std::size_t>(i)];
        ++left[static_cast<std::size_t>(y)];
        --right[static_cast<std::size_t>(y)];
        const double next_v = values[static_cast<std::size_t>(i) + 1].first;
        if (next_v <= v) continue; // no boundary between equal values
        const int n_left = i + 1;
        const int n_right = n - n_left;
        if (n_left < min_samples_leaf || n_right < min_samples_leaf) continue;
        const double impurity =
            (n_left * gini(left, n_left) + n_right * gini(right, n_right)) / n;
        if (impurity < best.impurity) {
            best.impurity = impurity;
            best.threshold = 0.5 * (v + next_v);
        }
    }
    return best;
}

} // namespace

void DecisionTree::fit(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                       int n_classes, const std::vector<int>& sample_indices,
                       const ForestParams& params, std::uint64_t seed) {
    nodes_.clear();
    n_leaves_ = 0;
    std::vector<int> indices = sample_indices;
    Rng rng(seed);
    build(features, labels, n_classes, indices, 0, static_cast<int>(indices.size()), 0, params,
          rng);
}

int DecisionTree::build(const Eigen::MatrixXd& features, const std::vector<int>& labels,
                        int n_classes, std::vector<int>& indices, int begin, int end, int depth,
                        const ForestParams& params, Rng& rng) {
    const int n = end - begin;
    const std::vector<int> counts = class_counts(labels, indices, begin, end, n_classes);

    const bool pure = std::count_if(counts.begin(), counts.end(), [](int c) { return c > 0; }) <= 1;
    const bool depth_capped = params.max_depth > 0 && depth >= params.max_depth;
    const bool too_small = n < 2 * params.min_samples_leaf || n < 2;

    auto make_leaf = [&]() {
        Node leaf;
        leaf.leaf_id = n_leaves_++;
        leaf.probs.resize(static_cast<std::size_t>(n_classes));
        for (int c = 0; c < n_classes; ++c)
            leaf.probs[static_cast<std::size_t>(c)] =
                static_cast<double>(counts[static_cast<std::size_t>(c)]) / std::max(n, 1);
        nodes_.push_back(std::move(leaf));
        return static_cast<int>(nodes_.size()) - 1;
    };

    if (pure || depth_capped || too_small) return make_leaf();

    const int d = static_cast<int>(features.cols());
    int n_candidates = d;
    if (params.feature_rule == "sqrt")
        n_candidates = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(d))));

    SplitCandidate best;
    auto try_features = [&](const std::vector<int>& feats) {
        for (int f : feats) {
            SplitCandidate cand = best_split_on_feature(features, labels, n_classes, f, indices,
                                                        begin, end, params.min_samples_leaf);
            if (cand.impurity < best.impurity) best = cand;
        }
    };

    try_features(rng.sample_without_replacement(d, n_candidates));
    if (best.feature < 0 || !std::isfinite(best.impurity)) {
        // Candidate features were constant on this node; fall back to the full
        // feature set before giving up.
        std::vector<int> all(static_cast<std::size_t>(d));
        std::iota(all.begin(), all.end(), 0);
        best = SplitCandidate{};
        try_features(all);
    }
    if (best.feature < 0 || !std::isfinite(best.impurity)) return make_leaf();

    const int mid = static_cast<int>(
        std::partition(indices.begin() + begin, indices.begin() + end,
                       [&](int idx) { return features(idx, best.feature) <= best.threshold; }) -
        indices.begin());
    if (mid == begin || mid == end) return make_leaf();

    Node node;
    node.feature = best.feature;
    node.threshold = best.threshold;
    nodes_.push_back(node);
    const int self = static_cast<int>(nodes_.size()) - 1;
    const int left = build(features, labels, n_classes, indices, begin, mid, depth + 1, params, rng);
    const int right = build(features, labels, n_classes, indices, mid, end, depth + 1, params, rng);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

int DecisionTree::leaf_of(const Eigen::RowVectorXd& row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes_[static_cast<std::size_t>(node)];
        node = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].leaf_id;
}

const std::vector<double>& DecisionTree::probs_of(const Eigen::RowVectorXd& row) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = nodes_[static_cast<std::size_t>(node)];
        node = row(nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return nodes_[static_cast<std::size_t>(node)].probs;
}

ForestModel ForestModel::fit(const ForestParams& params, const Eigen::MatrixXd& features,
                             const std::vector<int>& labels, int n_classes, std::uint64_t seed) {
    if (params.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (params.min_samples_leaf < 1) throw ConfigError("forest: min_samples_leaf must be >= 1");
    if (params.feature_rule != "sqrt" && params.feature_rule != "all")
        throw ConfigError("forest: unknown feature_rule '" + params.feature_rule + "'");

    const int n = static_cast<int>(features.rows());
    ForestModel model;
    model.n_classes_ = n_classes;
    model.n_features_ = static_cast<int>(features.cols());
    model.trees_.resize(static_cast<std::size_t>(params.n_trees));

    std::vector<int> base(static_cast<std::size_t>(n));
    std::iota(base.begin(), base.end(), 0);

    for (int t = 0; t < params.n_trees; ++t) {
        const std::uint64_t tree_seed = mix_seed(seed, "tree", static_cast<std::uint64_t>(t));
        std::vector<int> sample = base;
        if (params.bootstrap) {
            Rng boot(mix_seed(tree_seed, "bootstrap"));
            for (int i = 0; i < n; ++i)
                sample[static_cast<std::size_t>(i)] = boot.uniform_int(n);
        }
        model.trees_[static_cast<std::size_t>(t)].fit(features, labels, n_classes, sample, params,
                                                      mix_seed(tree_seed, "splits"));
    }
    return model;
}

Eigen::MatrixXd ForestModel::predict_proba(const Eigen::MatrixXd& features) const {
    const Eigen::Index n = features.rows();
    Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(n, n_classes_);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd row = features.row(i);
        for (const auto& tree : trees_) {
            const auto& p = tree.probs_of(row);
            for (int c = 0; c < n_classes_; ++c) probs(i, c) += p[static_cast<std::size_t>(c)];
        }
    }
    probs /= static_cast<double>(trees_.size());
    return probs;
}

int ForestModel::total_leaves() const {
    int total = 0;
    for (const auto& tree : trees_) total += tree.n_leaves();
    return total;
}

Eigen::MatrixXd ForestModel::leaf_embedding(const Eigen::MatrixXd& features) const {
    const Eigen::Index n = features.rows();
    Eigen::MatrixXd emb = Eigen::MatrixXd::Zero(n, total_leaves());
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd row = features.row(i);
        int offset = 0;
        for (const auto& tree : trees_) {
            emb(i, offset + tree.leaf_of(row)) = 1.0;
            offset += tree.n_leaves();
        }
    }
    return emb;
}

} // namespace noisyal
