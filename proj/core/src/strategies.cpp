#include "noisyal/strategies.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "noisyal/errors.hpp"
#include "noisyal/kmeans.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

namespace {

// Weights passed to the K-Means kernel are floored so that all-zero margin
// rows (one-hot predictions) still yield a defined weighted mean.
constexpr double kWeightFloor = 1e-12;

void top2(const Eigen::MatrixXd& values, Eigen::Index row, double& h1, double& h2) {
    h1 = -1.0;
    h2 = -1.0;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const double p = values(row, j);
        if (p > h1) {
            h2 = h1;
            h1 = p;
        } else if (p > h2) {
            h2 = p;
        }
    }
}

} // namespace

ScoreVector score_lowest_confidence(const ProbabilityMatrix& probs) {
    ScoreVector scores(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i)
        scores[static_cast<std::size_t>(i)] = 1.0 - probs.values.row(i).maxCoeff();
    return scores;
}

ScoreVector score_margin(const ProbabilityMatrix& probs) {
    if (probs.cols() < 2)
        throw std::invalid_argument("score_margin: need at least 2 classes");
    ScoreVector scores(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        double h1 = 0.0;
        double h2 = 0.0;
        top2(probs.values, i, h1, h2);
        scores[static_cast<std::size_t>(i)] = 1.0 - (h1 - h2);
    }
    return scores;
}

ScoreVector score_iconfidence(const ProbabilityMatrix& current_probs,
                              const ProbabilityMatrix& ideal_probs, IConfidenceMode mode) {
    if (current_probs.rows() != ideal_probs.rows())
        throw std::invalid_argument("score_iconfidence: shape error, row counts differ");
    if (current_probs.cols() != ideal_probs.cols())
        throw std::invalid_argument("score_iconfidence: shape error, class counts differ");
    ScoreVector scores(static_cast<std::size_t>(current_probs.rows()));
    for (Eigen::Index i = 0; i < current_probs.rows(); ++i) {
        Eigen::Index argmax = 0;
        const double h_current = current_probs.values.row(i).maxCoeff(&argmax);
        const double h_ideal = mode == IConfidenceMode::IdealMax
                                   ? ideal_probs.values.row(i).maxCoeff()
                                   : ideal_probs.values(i, argmax);
        scores[static_cast<std::size_t>(i)] = h_ideal - h_current;
    }
    return scores;
}

BatchSelection select_top_k(const ScoreVector& scores, const std::vector<int>& candidate_indices,
                            int k) {
    if (candidate_indices.empty()) throw RunError("selection error: empty candidate set");
    if (scores.size() != candidate_indices.size())
        throw std::invalid_argument("select_top_k: scores/candidates length mismatch");
    if (k < 1) throw std::invalid_argument("select_top_k: k must be >= 1");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return candidate_indices[a] < candidate_indices[b];
    });

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), order.size());
    BatchSelection out;
    out.indices.reserve(take);
    for (std::size_t i = 0; i < take; ++i)
        out.indices.push_back(candidate_indices[order[i]]);
    return out;
}

BatchSelection select_random(const std::vector<int>& candidate_indices, int k,
                             std::uint64_t seed) {
    if (candidate_indices.empty()) throw RunError("selection error: empty candidate set");
    if (k < 1) throw std::invalid_argument("select_random: k must be >= 1");
    const int n = static_cast<int>(candidate_indices.size());
    const int take = std::min(k, n);
    Rng rng(seed);
    std::vector<int> positions = rng.sample_without_replacement(n, take);
    BatchSelection out;
    out.indices.reserve(positions.size());
    for (int p : positions) out.indices.push_back(candidate_indices[static_cast<std::size_t>(p)]);
    return out;
}

BatchSelection kcenter_greedy(const EmbeddingMatrix& embedding,
                              const std::vector<int>& labeled_indices,
                              const std::vector<int>& candidate_indices, int k) {
    if (labeled_indices.empty())
        throw std::invalid_argument("kcenter_greedy: labeled set must be non-empty");
    if (candidate_indices.empty()) throw RunError("selection error: empty candidate set");
    if (k < 1) throw std::invalid_argument("kcenter_greedy: k must be >= 1");
    const Eigen::MatrixXd& rows = embedding.values;
    for (int i : labeled_indices)
        if (i < 0 || i >= rows.rows())
            throw std::invalid_argument("kcenter_greedy: labeled index out of range");
    for (int i : candidate_indices)
        if (i < 0 || i >= rows.rows())
            throw std::invalid_argument("kcenter_greedy: candidate index out of range");

    // Ascending candidate order makes the strict ">" below break ties toward
    // the lowest index.
    std::vector<int> cands = candidate_indices;
    std::sort(cands.begin(), cands.end());

    std::vector<double> min_d2(cands.size());
    for (std::size_t c = 0; c < cands.size(); ++c) {
        double best = (rows.row(cands[c]) - rows.row(labeled_indices[0])).squaredNorm();
        for (std::size_t l = 1; l < labeled_indices.size(); ++l) {
            const double d2 = (rows.row(cands[c]) - rows.row(labeled_indices[l])).squaredNorm();
            if (d2 < best) best = d2;
        }
        min_d2[c] = best;
    }

    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), cands.size());
    std::vector<char> used(cands.size(), 0);
    BatchSelection out;
    out.indices.reserve(take);
    for (std::size_t step = 0; step < take; ++step) {
        std::size_t best_pos = 0;
        double best_d2 = -1.0;
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (used[c]) continue;
            if (min_d2[c] > best_d2) {
                best_d2 = min_d2[c];
                best_pos = c;
            }
        }
        used[best_pos] = 1;
        out.indices.push_back(cands[best_pos]);
        for (std::size_t c = 0; c < cands.size(); ++c) {
            if (used[c]) continue;
            const double d2 = (rows.row(cands[c]) - rows.row(cands[best_pos])).squaredNorm();
            if (d2 < min_d2[c]) min_d2[c] = d2;
        }
    }
    return out;
}

namespace {

// Shared core of wkmeans_select and iwkmeans_select; `fixed` is empty for the
// former and holds the labeled points for the latter.
BatchSelection clustered_select(const Eigen::MatrixXd& points, const ProbabilityMatrix& probs,
                                const Eigen::MatrixXd& fixed,
                                const std::vector<int>& candidate_indices, int k, int beta,
                                std::uint64_t seed) {
    if (candidate_indices.empty()) throw RunError("selection error: empty candidate set");
    if (points.rows() != static_cast<Eigen::Index>(candidate_indices.size()) ||
        probs.rows() != points.rows())
        throw std::invalid_argument("clustered select: points/probs/candidates length mismatch");
    if (k < 1) throw std::invalid_argument("clustered select: k must be >= 1");
    if (beta < 1) throw std::invalid_argument("clustered select: beta must be >= 1");
    if (fixed.rows() > 0 && fixed.cols() != points.cols())
        throw std::invalid_argument("clustered select: labeled point dimension mismatch");

    const ScoreVector margins = score_margin(probs);

    // Step 1: keep the beta*k candidates with the highest margin, ties by
    // ascending sample index, clamped to the whole pool.
    const std::size_t n = candidate_indices.size();
    const std::size_t want =
        std::min<std::size_t>(static_cast<std::size_t>(beta) * static_cast<std::size_t>(k), n);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (margins[a] != margins[b]) return margins[a] > margins[b];
        return candidate_indices[a] < candidate_indices[b];
    });
    std::vector<std::size_t> pre(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(want));
    // Fix the row order of the clustering input by ascending sample index so
    // the K-Means++ draw does not depend on the sort above.
    std::sort(pre.begin(), pre.end(), [&](std::size_t a, std::size_t b) {
        return candidate_indices[a] < candidate_indices[b];
    });

    BatchSelection out;
    if (static_cast<std::size_t>(k) >= pre.size()) {
        for (std::size_t p : pre) out.indices.push_back(candidate_indices[p]);
        return out;
    }

    Eigen::MatrixXd sub(static_cast<Eigen::Index>(pre.size()), points.cols());
    std::vector<double> weights(pre.size());
    for (std::size_t r = 0; r < pre.size(); ++r) {
        sub.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(pre[r]));
        weights[r] = std::max(margins[pre[r]], kWeightFloor);
    }

    const FixedKMeansResult km = kmeans_fixed(sub, weights, k, fixed, seed);

    // Step 3: match each moving centroid to its nearest preselected point,
    // greedily by ascending (distance, centroid, point) with every point used
    // at most once.
    struct Pair {
        double d2;
        int centroid;
        int point;
    };
    std::vector<Pair> pairs;
    pairs.reserve(static_cast<std::size_t>(k) * pre.size());
    for (int c = 0; c < k; ++c)
        for (std::size_t p = 0; p < pre.size(); ++p)
            pairs.push_back({(sub.row(static_cast<Eigen::Index>(p)) - km.moving.row(c))
                                 .squaredNorm(),
                             c, static_cast<int>(p)});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        return std::tie(a.d2, a.centroid, a.point) < std::tie(b.d2, b.centroid, b.point);
    });

    std::vector<char> centroid_used(static_cast<std::size_t>(k), 0);
    std::vector<char> point_used(pre.size(), 0);
    int matched = 0;
    for (const Pair& pr : pairs) {
        if (matched == k) break;
        if (centroid_used[static_cast<std::size_t>(pr.centroid)] ||
            point_used[static_cast<std::size_t>(pr.point)])
            continue;
        centroid_used[static_cast<std::size_t>(pr.centroid)] = 1;
        point_used[static_cast<std::size_t>(pr.point)] = 1;
        out.indices.push_back(candidate_indices[pre[static_cast<std::size_t>(pr.point)]]);
        ++matched;
    }
    return out;
}

} // namespace

BatchSelection wkmeans_select(const Eigen::MatrixXd& points, const ProbabilityMatrix& probs,
                              const std::vector<int>& candidate_indices, int k, int beta,
                              std::uint64_t seed) {
    return clustered_select(points, probs, Eigen::MatrixXd(0, points.cols()), candidate_indices,
                            k, beta, seed);
}

BatchSelection iwkmeans_select(const Eigen::MatrixXd& points, const ProbabilityMatrix& probs,
                               const Eigen::MatrixXd& labeled_points,
                               const std::vector<int>& candidate_indices, int k, int beta,
                               std::uint64_t seed) {
    if (labeled_points.rows() == 0)
        throw std::invalid_argument("iwkmeans_select: labeled points must be non-empty");
    return clustered_select(points, probs, labeled_points, candidate_indices, k, beta, seed);
}

const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names = {
        "random", "confidence", "iconfidence", "margin", "kcenter", "wkmeans", "iwkmeans"};
    return names;
}

bool is_known_strategy(const std::string& name) {
    const auto& names = strategy_names();
    return std::find(names.begin(), names.end(), name) != names.end();
}

std::string to_string(IConfidenceMode mode) {
    return mode == IConfidenceMode::IdealMax ? "ideal_max" : "ideal_at_current_argmax";
}

IConfidenceMode iconfidence_mode_from_string(const std::string& name) {
    if (name == "ideal_max") return IConfidenceMode::IdealMax;
    if (name == "ideal_at_current_argmax") return IConfidenceMode::IdealAtCurrentArgmax;
    throw ConfigError("unknown iconfidence_mode '" + name +
                      "' (expected ideal_max or ideal_at_current_argmax)");
}

} // namespace noisyal
