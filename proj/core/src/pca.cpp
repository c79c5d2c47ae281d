#include "noisyal/pca.hpp"

#include <cmath>
#include <stdexcept>

namespace noisyal {

namespace {

// Sign convention applied to each component row and its projection column.
void fix_signs(Eigen::MatrixXd& components, Eigen::MatrixXd& projected) {
    for (Eigen::Index c = 0; c < components.rows(); ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index j = 0; j < components.cols(); ++j) {
            const double a = std::abs(components(c, j));
            if (a > best) {
                best = a;
                arg = j;
            }
        }
        if (components(c, arg) < 0.0) {
            components.row(c) *= -1.0;
            projected.col(c) *= -1.0;
        }
    }
}

} // namespace

PcaResult pca(const Eigen::MatrixXd& data, int target_dim) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 1 || d < 1) throw std::invalid_argument("pca: empty input");
    if (target_dim < 1 || target_dim > std::min<Eigen::Index>(n, d))
        throw std::invalid_argument("pca: target_dim must lie in [1, min(n_samples, n_dims)]");

    PcaResult result;
    result.mean = data.colwise().mean();
    const Eigen::MatrixXd centered = data.rowwise() - result.mean;
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    const double total_scale = centered.squaredNorm() / denom;

    result.components = Eigen::MatrixXd::Zero(target_dim, d);
    result.projected = Eigen::MatrixXd::Zero(n, target_dim);
    result.explained_variance = Eigen::VectorXd::Zero(target_dim);

    if (total_scale <= 0.0) {
        result.zero_variance = true;
        return result;
    }
    const double rank_cutoff = 1e-12 * total_scale;

    if (d <= n) {
        Eigen::MatrixXd cov = centered.transpose() * centered / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
        // Eigen returns eigenvalues ascending; take the top ones from the back.
        for (int c = 0; c < target_dim; ++c) {
            const Eigen::Index src = d - 1 - c;
            const double ev = solver.eigenvalues()(src);
            if (ev <= rank_cutoff) continue;
            result.explained_variance(c) = ev;
            result.components.row(c) = solver.eigenvectors().col(src).transpose();
        }
    } else {
        // Dual route: eigenvectors of the Gram matrix give the same top
        // components at n x n instead of d x d cost.
        Eigen::MatrixXd gram = centered * centered.transpose() / denom;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
        if (solver.info() != Eigen::Success) throw std::runtime_error("pca: eigensolver failed");
        for (int c = 0; c < target_dim; ++c) {
            const Eigen::Index src = n - 1 - c;
            const double ev = solver.eigenvalues()(src);
            if (ev <= rank_cutoff) continue;
            result.explained_variance(c) = ev;
            Eigen::VectorXd comp = centered.transpose() * solver.eigenvectors().col(src);
            const double norm = comp.norm();
            if (norm <= 0.0) continue;
            result.components.row(c) = (comp / norm).transpose();
        }
    }

    result.projected = centered * result.components.transpose();
    fix_signs(result.components, result.projected);
    return result;
}

} // namespace noisyal
