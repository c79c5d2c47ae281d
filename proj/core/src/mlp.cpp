#include "noisyal/mlp.hpp"

#include <cmath>

#include "noisyal/errors.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

namespace {

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
        out.row(i) = e / e.sum();
    }
    return out;
}

double mean_cross_entropy(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        const double p = std::max(probs(i, labels[static_cast<std::size_t>(i)]), 1e-12);
        loss -= std::log(p);
    }
    return loss / static_cast<double>(probs.rows());
}

} // namespace

Eigen::MatrixXd MlpModel::forward(const Eigen::MatrixXd& input,
                                  std::vector<Eigen::MatrixXd>* activations) const {
    Eigen::MatrixXd h =
        (input.rowwise() - feature_mean_).array().rowwise() / feature_scale_.array();
    if (activations) activations->push_back(h);
    for (std::size_t l = 0; l + 1 < weights_.size(); ++l) {
        h = ((h * weights_[l]).rowwise() + biases_[l]).cwiseMax(0.0);
        if (activations) activations->push_back(h);
    }
    return (h * weights_.back()).rowwise() + biases_.back();
}

MlpModel MlpModel::fit(const MlpParams& params, const Eigen::MatrixXd& features,
                       const std::vector<int>& labels, int n_classes, std::uint64_t seed) {
    for (int hs : params.hidden_sizes)
        if (hs < 1) throw ConfigError("mlp: hidden sizes must be positive");
    if (params.epochs < 1) throw ConfigError("mlp: epochs must be >= 1");
    if (params.batch_size < 1) throw ConfigError("mlp: batch_size must be >= 1");
    if (!(params.learning_rate > 0.0)) throw ConfigError("mlp: learning_rate must be positive");

    const int n = static_cast<int>(features.rows());
    const int d = static_cast<int>(features.cols());

    MlpModel model;
    model.n_classes_ = n_classes;
    model.n_features_ = d;

    // Constant columns keep scale 1 so they standardize to exactly zero.
    model.feature_mean_ = features.colwise().mean();
    Eigen::RowVectorXd var =
        (features.rowwise() - model.feature_mean_).array().square().colwise().mean();
    model.feature_scale_ = var.array().sqrt().max(1e-12).matrix();
    for (int j = 0; j < d; ++j)
        if (model.feature_scale_(j) < 1e-9) model.feature_scale_(j) = 1.0;

    std::vector<int> sizes;
    sizes.push_back(d);
    for (int hs : params.hidden_sizes) sizes.push_back(hs);
    sizes.push_back(n_classes);

    Rng rng(mix_seed(seed, "init"));
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double scale = std::sqrt(2.0 / fan_in);
        Eigen::MatrixXd w(fan_in, fan_out);
        for (int i = 0; i < fan_in; ++i)
            for (int j = 0; j < fan_out; ++j) w(i, j) = scale * rng.normal();
        model.weights_.push_back(std::move(w));
        model.biases_.push_back(Eigen::RowVectorXd::Zero(fan_out));
    }

    const std::size_t n_layers = model.weights_.size();

    // Adam state, one moment pair per parameter tensor.
    constexpr double kBeta1 = 0.9;
    constexpr double kBeta2 = 0.999;
    constexpr double kAdamEps = 1e-8;
    std::vector<Eigen::MatrixXd> m_w(n_layers), v_w(n_layers);
    std::vector<Eigen::RowVectorXd> m_b(n_layers), v_b(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        m_w[l] = Eigen::MatrixXd::Zero(model.weights_[l].rows(), model.weights_[l].cols());
        v_w[l] = m_w[l];
        m_b[l] = Eigen::RowVectorXd::Zero(model.biases_[l].cols());
        v_b[l] = m_b[l];
    }
    long long step = 0;

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng shuffle_rng(mix_seed(seed, "shuffle"));

    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (int start = 0; start < n; start += params.batch_size) {
            const int count = std::min(params.batch_size, n - start);
            Eigen::MatrixXd xb(count, d);
            std::vector<int> yb(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i) {
                const int idx = order[static_cast<std::size_t>(start + i)];
                xb.row(i) = features.row(idx);
                yb[static_cast<std::size_t>(i)] = labels[static_cast<std::size_t>(idx)];
            }

            std::vector<Eigen::MatrixXd> acts;
            acts.reserve(n_layers);
            const Eigen::MatrixXd logits = model.forward(xb, &acts);
            Eigen::MatrixXd delta = softmax_rows(logits);
            for (int i = 0; i < count; ++i) delta(i, yb[static_cast<std::size_t>(i)]) -= 1.0;
            delta /= static_cast<double>(count);

            // Backprop through the dense stack; acts[l] is the input of layer l.
            ++step;
            const double corr1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
            for (std::size_t l = n_layers; l-- > 0;) {
                const Eigen::MatrixXd grad_w = acts[l].transpose() * delta;
                const Eigen::RowVectorXd grad_b = delta.colwise().sum();
                if (l > 0) {
                    Eigen::MatrixXd back = delta * model.weights_[l].transpose();
                    delta = back.cwiseProduct(
                        (acts[l].array() > 0.0).cast<double>().matrix());
                }
                m_w[l] = kBeta1 * m_w[l] + (1.0 - kBeta1) * grad_w;
                v_w[l] = kBeta2 * v_w[l] + (1.0 - kBeta2) * grad_w.array().square().matrix();
                m_b[l] = kBeta1 * m_b[l] + (1.0 - kBeta1) * grad_b;
                v_b[l] = kBeta2 * v_b[l] + (1.0 - kBeta2) * grad_b.array().square().matrix();
                model.weights_[l].array() -= params.learning_rate * (m_w[l].array() / corr1) /
                                             ((v_w[l].array() / corr2).sqrt() + kAdamEps);
                model.biases_[l].array() -= params.learning_rate * (m_b[l].array() / corr1) /
                                            ((v_b[l].array() / corr2).sqrt() + kAdamEps);
            }
        }
        model.epoch_losses_.push_back(
            mean_cross_entropy(softmax_rows(model.forward(features, nullptr)), labels));
    }
    return model;
}

Eigen::MatrixXd MlpModel::predict_proba(const Eigen::MatrixXd& features) const {
    return softmax_rows(forward(features, nullptr));
}

Eigen::MatrixXd MlpModel::penultimate(const Eigen::MatrixXd& features) const {
    Eigen::MatrixXd h =
        (features.rowwise() - feature_mean_).array().rowwise() / feature_scale_.array();
    for (std::size_t l = 0; l + 1 < weights_.size(); ++l)
        h = ((h * weights_[l]).rowwise() + biases_[l]).cwiseMax(0.0);
    return h;
}

} // namespace noisyal
