#pragma once

#include <Eigen/Dense>

namespace noisyal {

struct PcaResult {
    Eigen::MatrixXd components;         // target_dim x n_dims, rows orthonormal
    Eigen::MatrixXd projected;          // n_samples x target_dim
    Eigen::VectorXd explained_variance; // descending
    Eigen::RowVectorXd mean;
    bool zero_variance = false;
};

// Principal components of mean-centered data, ordered by explained variance.
// Sign convention: the largest-magnitude coordinate of each component is
// positive. For rank-deficient directions (eigenvalue ~ 0) the component and
// its projection are zeroed; fully zero-variance input sets the warning flag
// and returns an all-zero projection.
//
// Requires target_dim <= min(n_samples, n_dims). Internally solves the
// covariance eigenproblem on whichever side (d x d or n x n Gram) is smaller.
PcaResult pca(const Eigen::MatrixXd& data, int target_dim);

} // namespace noisyal
