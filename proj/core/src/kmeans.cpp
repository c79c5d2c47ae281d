#include "noisyal/kmeans.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "noisyal/rng.hpp"

namespace noisyal {

namespace {

double squared_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b,
                        Eigen::Index j) {
    return (a.row(i) - b.row(j)).squaredNorm();
}

void check_inputs(const Eigen::MatrixXd& points, const std::vector<double>& weights,
                  int k_moving, const Eigen::MatrixXd& fixed_centers,
                  const FixedKMeansOptions& options) {
    if (points.rows() == 0) throw std::invalid_argument("kmeans: no points");
    if (static_cast<Eigen::Index>(weights.size()) != points.rows())
        throw std::invalid_argument("kmeans: weights length does not match points");
    double mass = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w))
            throw std::invalid_argument("kmeans: weights must be finite and non-negative");
        mass += w;
    }
    if (mass <= 0.0) throw std::invalid_argument("kmeans: weights must not all be zero");
    if (k_moving < 1) throw std::invalid_argument("kmeans: k_moving must be >= 1");
    if (fixed_centers.rows() > 0 && fixed_centers.cols() != points.cols())
        throw std::invalid_argument("kmeans: fixed center dimension mismatch");
    if (!(options.tol > 0.0)) throw std::invalid_argument("kmeans: tol must be positive");
    if (options.max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be >= 1");
    if (options.initial_moving &&
        (options.initial_moving->rows() != k_moving ||
         options.initial_moving->cols() != points.cols()))
        throw std::invalid_argument("kmeans: initial_moving has wrong shape");
}

// Assign every point to its nearest joint centroid (moving first, then
// fixed; ties go to the lowest joint index) and return the weighted inertia.
double assign_points(const Eigen::MatrixXd& points, const std::vector<double>& weights,
                     const Eigen::MatrixXd& moving, const Eigen::MatrixXd& fixed,
                     std::vector<int>& assignment, std::vector<double>& dist2) {
    const Eigen::Index n = points.rows();
    const Eigen::Index k = moving.rows();
    const Eigen::Index m = fixed.rows();
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        int best = 0;
        double best_d2 = squared_distance(points, i, moving, 0);
        for (Eigen::Index c = 1; c < k; ++c) {
            const double d2 = squared_distance(points, i, moving, c);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(c);
            }
        }
        for (Eigen::Index c = 0; c < m; ++c) {
            const double d2 = squared_distance(points, i, fixed, c);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = static_cast<int>(k + c);
            }
        }
        assignment[static_cast<std::size_t>(i)] = best;
        dist2[static_cast<std::size_t>(i)] = best_d2;
        inertia += weights[static_cast<std::size_t>(i)] * best_d2;
    }
    return inertia;
}

} // namespace

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& points, const std::vector<double>& weights,
                              int k, Rng& rng) {
    const Eigen::Index n = points.rows();
    if (k < 1 || static_cast<Eigen::Index>(k) > n)
        throw std::invalid_argument("kmeanspp_init: need 1 <= k <= n");

    Eigen::MatrixXd centers(k, points.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);

    int first = rng.discrete(weights);
    if (first < 0) throw std::invalid_argument("kmeanspp_init: weights have zero mass");
    centers.row(0) = points.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;

    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        d2[static_cast<std::size_t>(i)] = squared_distance(points, i, centers, 0);

    std::vector<double> probs(static_cast<std::size_t>(n));
    for (int c = 1; c < k; ++c) {
        for (Eigen::Index i = 0; i < n; ++i)
            probs[static_cast<std::size_t>(i)] =
                weights[static_cast<std::size_t>(i)] * d2[static_cast<std::size_t>(i)];
        int next = rng.discrete(probs);
        if (next < 0) {
            // All remaining D^2 mass is zero (duplicated points); take the
            // lowest-index point not yet used so centers stay deterministic.
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) {
                    next = static_cast<int>(i);
                    break;
                }
            }
            if (next < 0) next = 0;
        }
        centers.row(c) = points.row(next);
        chosen[static_cast<std::size_t>(next)] = 1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = squared_distance(points, i, centers, c);
            if (d < d2[static_cast<std::size_t>(i)]) d2[static_cast<std::size_t>(i)] = d;
        }
    }
    return centers;
}

FixedKMeansResult kmeans_fixed(const Eigen::MatrixXd& points, const std::vector<double>& weights,
                               int k_moving, const Eigen::MatrixXd& fixed_centers,
                               std::uint64_t seed, const FixedKMeansOptions& options) {
    check_inputs(points, weights, k_moving, fixed_centers, options);

    const Eigen::Index n = points.rows();
    const Eigen::Index d = points.cols();
    const std::size_t k = static_cast<std::size_t>(k_moving);

    FixedKMeansResult result;
    result.fixed = fixed_centers;

    if (n < k_moving) {
        // Not enough points to distinguish k centroids: park one centroid on
        // each point (cycling over them for the surplus) and report it.
        result.degenerate = true;
        result.moving.resize(k_moving, d);
        for (int c = 0; c < k_moving; ++c)
            result.moving.row(c) = points.row(c % n);
        result.assignment.resize(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i)
            result.assignment[static_cast<std::size_t>(i)] = static_cast<int>(i);
        result.inertia = 0.0;
        result.inertia_history = {0.0};
        return result;
    }

    if (options.initial_moving) {
        result.moving = *options.initial_moving;
    } else {
        Rng rng(seed);
        result.moving = kmeanspp_init(points, weights, k_moving, rng);
    }

    result.assignment.resize(static_cast<std::size_t>(n));
    std::vector<double> dist2(static_cast<std::size_t>(n));
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 1; iter <= options.max_iter; ++iter) {
        result.inertia = assign_points(points, weights, result.moving, result.fixed,
                                       result.assignment, dist2);
        result.inertia_history.push_back(result.inertia);
        result.iterations = iter;

        if (iter > 1) {
            const double improvement =
                prev_inertia > 0.0 ? (prev_inertia - result.inertia) / prev_inertia : 0.0;
            if (improvement < options.tol) break;
        }
        if (iter == options.max_iter) break;
        prev_inertia = result.inertia;

        // Update step: each moving centroid becomes the weighted mean of its
        // assigned points; fixed centroids are left alone by construction.
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k_moving, d);
        std::vector<double> mass(k, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int c = result.assignment[static_cast<std::size_t>(i)];
            if (c >= k_moving) continue;
            const double w = weights[static_cast<std::size_t>(i)];
            sums.row(c) += w * points.row(i);
            mass[static_cast<std::size_t>(c)] += w;
        }
        for (int c = 0; c < k_moving; ++c) {
            if (mass[static_cast<std::size_t>(c)] > 0.0) {
                result.moving.row(c) = sums.row(c) / mass[static_cast<std::size_t>(c)];
                continue;
            }
            // Empty cluster: re-seed it on the point with the largest weighted
            // squared distance to its current centroid (lowest index on ties).
            result.empty_cluster_repaired = true;
            Eigen::Index donor = 0;
            double worst = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double cost =
                    weights[static_cast<std::size_t>(i)] * dist2[static_cast<std::size_t>(i)];
                if (cost > worst) {
                    worst = cost;
                    donor = i;
                }
            }
            result.moving.row(c) = points.row(donor);
            // Hand the donor to the repaired cluster so a second empty
            // centroid in the same pass picks a different point.
            result.assignment[static_cast<std::size_t>(donor)] = c;
            dist2[static_cast<std::size_t>(donor)] = 0.0;
        }
    }

    return result;
}

} // namespace noisyal
