#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace noisyal {

struct MlpParams {
    std::vector<int> hidden_sizes{128, 64};
    double learning_rate = 1e-3;
    int epochs = 100;
    int batch_size = 32;

    bool operator==(const MlpParams&) const = default;
};

// Fully connected ReLU network with a softmax head, trained with Adam on
// cross-entropy. Inputs are standardized to the training set's per-feature
// mean and deviation. Weights are He-initialized from the seeded generator;
// the per-epoch training loss is kept for diagnostics.
class MlpModel {
public:
    static MlpModel fit(const MlpParams& params, const Eigen::MatrixXd& features,
                        const std::vector<int>& labels, int n_classes, std::uint64_t seed);

    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& features) const;

    // Activations of the last hidden layer.
    Eigen::MatrixXd penultimate(const Eigen::MatrixXd& features) const;

    const std::vector<double>& epoch_losses() const { return epoch_losses_; }
    int n_classes() const { return n_classes_; }
    int n_features() const { return n_features_; }
    int penultimate_dim() const { return static_cast<int>(weights_.back().rows()); }

    // Layer l maps fan_in x fan_out; exposed so diagnostics and tests can
    // inspect or perturb a network directly.
    std::vector<Eigen::MatrixXd> weights_;
    std::vector<Eigen::RowVectorXd> biases_;
    Eigen::RowVectorXd feature_mean_;
    Eigen::RowVectorXd feature_scale_;

private:
    Eigen::MatrixXd forward(const Eigen::MatrixXd& input,
                            std::vector<Eigen::MatrixXd>* activations) const;

    std::vector<double> epoch_losses_;
    int n_classes_ = 0;
    int n_features_ = 0;
};

} // namespace noisyal
