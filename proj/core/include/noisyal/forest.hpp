#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace noisyal {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0; // 0 = unlimited
    int min_samples_leaf = 1;
    std::string feature_rule = "sqrt"; // "sqrt" or "all"
    bool bootstrap = true;

    bool operator==(const ForestParams&) const = default;
};

// CART classification tree with Gini impurity. Leaves store class frequency
// distributions; leaf ids are assigned in creation order so the forest can
// build leaf-membership embeddings.
class DecisionTree {
public:
    struct Node {
        int feature = -1; // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        int leaf_id = -1;
        std::vector<double> probs; // leaves only
    };

    void fit(const Eigen::MatrixXd& features, const std::vector<int>& labels, int n_classes,
             const std::vector<int>& sample_indices, const ForestParams& params,
             std::uint64_t seed);

    int leaf_of(const Eigen::RowVectorXd& row) const;
    const std::vector<double>& probs_of(const Eigen::RowVectorXd& row) const;
    int n_leaves() const { return n_leaves_; }

private:
    int build(const Eigen::MatrixXd& features, const std::vector<int>& labels, int n_classes,
              std::vector<int>& indices, int begin, int end, int depth,
              const ForestParams& params, class Rng& rng);

    std::vector<Node> nodes_;
    int n_leaves_ = 0;
};

class ForestModel {
public:
    static ForestModel fit(const ForestParams& params, const Eigen::MatrixXd& features,
                           const std::vector<int>& labels, int n_classes, std::uint64_t seed);

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const;

    // One-hot leaf membership per tree, concatenated: n_samples x sum(leaves).
    Eigen::MatrixXd leaf_embedding(const Eigen::MatrixXd& features) const;
    int total_leaves() const;

    int n_classes() const { return n_classes_; }
    int n_features() const { return n_features_; }
    const std::vector<DecisionTree>& trees() const { return trees_; }

private:
    std::vector<DecisionTree> trees_;
    int n_classes_ = 0;
    int n_features_ = 0;
};

} // namespace noisyal
