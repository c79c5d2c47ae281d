#pragma once

// Query strategies for batch active learning.
//
// Scoring functions turn a probability matrix into one desirability score per
// candidate (higher = more desirable). Selection functions turn scores or
// geometry into an ordered batch of sample indices. The clustering strategies
// (wkmeans/iwkmeans) combine a margin preselection with the weighted
// fixed-centroid K-Means kernel from kmeans.hpp.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "noisyal/models.hpp"

namespace noisyal {

// One score per candidate row; higher means "query this one sooner".
using ScoreVector = std::vector<double>;

struct BatchSelection {
    std::vector<int> indices; // ordered, distinct sample ids from the candidate pool
    std::string strategy;     // filled by the harness
    int iteration = 0;        // filled by the harness
};

// How the informed score interprets the ideal model's confidence h-inf.
enum class IConfidenceMode {
    IdealMax,            // ideal model's own maximum probability (default)
    IdealAtCurrentArgmax // ideal probability of the class the current model predicts
};

// score(x) = 1 - h1(x): low top confidence = desirable.
ScoreVector score_lowest_confidence(const ProbabilityMatrix& probs);

// score(x) = 1 - (h1(x) - h2(x)): small top-two gap = desirable.
ScoreVector score_margin(const ProbabilityMatrix& probs);

// Informed confidence: how much more confident an ideal model (trained on the
// full fold) is than the current one. Noisy samples come out negative because
// no amount of data makes them predictable. May be negative; selection takes
// the largest values.
ScoreVector score_iconfidence(const ProbabilityMatrix& current_probs,
                              const ProbabilityMatrix& ideal_probs,
                              IConfidenceMode mode = IConfidenceMode::IdealMax);

// Top-k by score, ties broken by ascending sample index; k is clamped to the
// candidate count. Throws RunError on an empty candidate set.
BatchSelection select_top_k(const ScoreVector& scores, const std::vector<int>& candidate_indices,
                            int k);

// Uniform without replacement, seed-deterministic.
BatchSelection select_random(const std::vector<int>& candidate_indices, int k,
                             std::uint64_t seed);

// Farthest-point greedy: repeatedly add the candidate with the largest minimum
// distance to the labeled set plus everything selected so far. Indices here
// are row indices into `embedding`; the caller maps them to sample ids.
BatchSelection kcenter_greedy(const EmbeddingMatrix& embedding,
                              const std::vector<int>& labeled_indices,
                              const std::vector<int>& candidate_indices, int k);

// Two-step weighted K-Means selection. `points` rows align with
// `candidate_indices` and with the rows of `probs`. Step 1 keeps the beta*k
// candidates with the highest margin score; step 2 clusters them (weights =
// margin scores) and returns the preselected point nearest to each centroid,
// matched greedily by ascending distance with every point used at most once.
BatchSelection wkmeans_select(const Eigen::MatrixXd& points, const ProbabilityMatrix& probs,
                              const std::vector<int>& candidate_indices, int k, int beta,
                              std::uint64_t seed);

// wkmeans_select with one immutable centroid per already-labeled sample, so
// new centroids are repelled from regions the labeled set covers.
BatchSelection iwkmeans_select(const Eigen::MatrixXd& points, const ProbabilityMatrix& probs,
                               const Eigen::MatrixXd& labeled_points,
                               const std::vector<int>& candidate_indices, int k, int beta,
                               std::uint64_t seed);

// Canonical strategy names accepted in configs and on the CLI.
const std::vector<std::string>& strategy_names();
bool is_known_strategy(const std::string& name);

std::string to_string(IConfidenceMode mode);
IConfidenceMode iconfidence_mode_from_string(const std::string& name);

} // namespace noisyal
