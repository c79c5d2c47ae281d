#pragma once

// Weighted K-Means with optional immutable ("fixed") centroids.
//
// The fixed centroids take part in every assignment step and soak up inertia,
// but they are never updated and are excluded from the K-Means++ seeding.
// This is the clustering kernel behind the incremental selection strategy:
// already-labeled samples become fixed centroids so that new moving centroids
// are pushed away from regions that are already covered.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace noisyal {

class Rng;

struct FixedKMeansOptions {
    double tol = 1e-4;   // relative inertia improvement below which we stop
    int max_iter = 300;  // Lloyd iteration cap
    // Testing hook: bypass K-Means++ and start from these moving centroids
    // (k_moving x d). Production callers leave this empty.
    std::optional<Eigen::MatrixXd> initial_moving;
};

struct FixedKMeansResult {
    Eigen::MatrixXd moving;  // k_moving x d, final positions
    Eigen::MatrixXd fixed;   // echoed input, never modified
    // Per point, index into the joint centroid list: moving centroids occupy
    // [0, k_moving), fixed ones [k_moving, k_moving + m).
    std::vector<int> assignment;
    double inertia = 0.0;  // sum of weight * squared distance to assigned centroid
    int iterations = 0;    // assignment passes performed
    // Inertia recorded after every assignment pass; must be non-increasing.
    std::vector<double> inertia_history;
    bool degenerate = false;              // fewer points than moving centroids
    bool empty_cluster_repaired = false;  // at least one re-seed happened
};

// Weighted K-Means++ seeding: first centroid drawn with probability
// proportional to weight, subsequent ones proportional to weight times the
// squared distance to the nearest centroid chosen so far. Exposed separately
// so oracle implementations can share the seeding and differ only in Lloyd.
Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& points,
                              const std::vector<double>& weights, int k, Rng& rng);

FixedKMeansResult kmeans_fixed(const Eigen::MatrixXd& points,
                               const std::vector<double>& weights, int k_moving,
                               const Eigen::MatrixXd& fixed_centers, std::uint64_t seed,
                               const FixedKMeansOptions& options = {});

} // namespace noisyal
