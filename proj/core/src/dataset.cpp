#include "noisyal/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "noisyal/errors.hpp"
#include "noisyal/rng.hpp"

namespace noisyal {

void Dataset::validate() const {
    if (n_classes < 2) throw ConfigError("dataset '" + name + "': n_classes must be >= 2");
    if (static_cast<int>(labels.size()) != n_samples())
        throw ConfigError("dataset '" + name + "': label count does not match sample count");
    for (int y : labels) {
        if (y < 0 || y >= n_classes)
            throw ConfigError("dataset '" + name + "': label " + std::to_string(y) +
                              " outside [0, " + std::to_string(n_classes) + ")");
    }
    if (noise_flags && static_cast<int>(noise_flags->size()) != n_samples())
        throw ConfigError("dataset '" + name + "': noise_flags length mismatch");
    if (!features.allFinite())
        throw ConfigError("dataset '" + name + "': non-finite feature values");
}

void PoolState::validate(int n_samples) const {
    auto check = [n_samples](const std::vector<int>& v, const char* what) {
        for (int i : v) {
            if (i < 0 || i >= n_samples)
                throw ConfigError(std::string("pool: ") + what + " index out of range");
        }
        if (!std::is_sorted(v.begin(), v.end()))
            throw ConfigError(std::string("pool: ") + what + " indices not sorted");
    };
    check(labeled, "labeled");
    check(unlabeled, "unlabeled");
    check(test, "test");

    std::unordered_set<int> lab(labeled.begin(), labeled.end());
    for (int i : unlabeled) {
        if (lab.count(i)) throw ConfigError("pool: labeled and unlabeled overlap");
    }
    std::unordered_set<int> train(labeled.begin(), labeled.end());
    train.insert(unlabeled.begin(), unlabeled.end());
    for (int i : test) {
        if (train.count(i)) throw ConfigError("pool: test overlaps the training pool");
    }
}

void BlobConfig::validate() const {
    if (n_samples < 1) throw ConfigError("blob config: n_samples must be positive");
    if (n_features < 1) throw ConfigError("blob config: n_features must be positive");
    if (n_classes < 2) throw ConfigError("blob config: n_classes must be >= 2");
    if (n_blobs < 1) throw ConfigError("blob config: n_blobs must be positive");
    if (n_noisy_blobs < 0 || n_noisy_blobs > n_blobs)
        throw ConfigError("blob config: n_noisy_blobs must lie in [0, n_blobs]");
    if (n_classes > n_blobs)
        throw ConfigError("blob config: n_classes must not exceed n_blobs");
    if (!(blob_std > 0.0)) throw ConfigError("blob config: blob_std must be positive");
    if (!(center_box_halfwidth > 0.0))
        throw ConfigError("blob config: center_box_halfwidth must be positive");
    if (min_center_separation < 0.0)
        throw ConfigError("blob config: min_center_separation must be non-negative");
}

BlobGeneration make_noisy_blobs_detailed(const BlobConfig& config) {
    config.validate();
    Rng rng(config.seed);

    const int d = config.n_features;
    const double min_dist = config.min_center_separation * config.blob_std;
    const double min_dist2 = min_dist * min_dist;

    // Centers: rejection sampling inside the hypercube, at most 1000 retries
    // per center.
    Eigen::MatrixXd centers(config.n_blobs, d);
    for (int b = 0; b < config.n_blobs; ++b) {
        bool placed = false;
        for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
            Eigen::RowVectorXd c(d);
            for (int j = 0; j < d; ++j)
                c(j) = rng.uniform(-config.center_box_halfwidth, config.center_box_halfwidth);
            placed = true;
            for (int prev = 0; prev < b; ++prev) {
                if ((centers.row(prev) - c).squaredNorm() < min_dist2) {
                    placed = false;
                    break;
                }
            }
            if (placed) centers.row(b) = c;
        }
        if (!placed) {
            throw RunError("blob generation: could not place center " + std::to_string(b) +
                           " after 1000 retries with min separation " + std::to_string(min_dist) +
                           " inside box halfwidth " + std::to_string(config.center_box_halfwidth));
        }
    }

    // Noisy blobs are a random subset; regular blobs get classes round-robin
    // so that every class owns a regular blob whenever enough of them exist.
    std::vector<int> order(static_cast<std::size_t>(config.n_blobs));
    for (int b = 0; b < config.n_blobs; ++b) order[static_cast<std::size_t>(b)] = b;
    rng.shuffle(order);

    std::vector<std::uint8_t> blob_is_noisy(static_cast<std::size_t>(config.n_blobs), 0);
    std::vector<std::pair<int, int>> blob_classes(static_cast<std::size_t>(config.n_blobs), {0, 0});
    for (int i = 0; i < config.n_noisy_blobs; ++i)
        blob_is_noisy[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;

    int regular_rank = 0;
    for (int i = config.n_noisy_blobs; i < config.n_blobs; ++i) {
        const int b = order[static_cast<std::size_t>(i)];
        const int c = regular_rank % config.n_classes;
        blob_classes[static_cast<std::size_t>(b)] = {c, c};
        ++regular_rank;
    }
    for (int i = 0; i < config.n_noisy_blobs; ++i) {
        const int b = order[static_cast<std::size_t>(i)];
        const int c1 = rng.uniform_int(config.n_classes);
        int c2 = rng.uniform_int(config.n_classes - 1);
        if (c2 >= c1) ++c2;
        blob_classes[static_cast<std::size_t>(b)] = {c1, c2};
    }

    // Multinomial occupancy: each sample picks its blob uniformly.
    std::vector<int> blob_of(static_cast<std::size_t>(config.n_samples));
    for (int i = 0; i < config.n_samples; ++i)
        blob_of[static_cast<std::size_t>(i)] = rng.uniform_int(config.n_blobs);

    Dataset ds;
    ds.features.resize(config.n_samples, d);
    ds.labels.resize(static_cast<std::size_t>(config.n_samples));
    ds.noise_flags = std::vector<std::uint8_t>(static_cast<std::size_t>(config.n_samples), 0);
    ds.n_classes = config.n_classes;
    ds.name = "blobs(n=" + std::to_string(config.n_samples) + ",d=" + std::to_string(d) +
              ",c=" + std::to_string(config.n_classes) + ",blobs=" + std::to_string(config.n_blobs) +
              ",noisy=" + std::to_string(config.n_noisy_blobs) + ",seed=" + std::to_string(config.seed) + ")";

    for (int i = 0; i < config.n_samples; ++i) {
        const int b = blob_of[static_cast<std::size_t>(i)];
        for (int j = 0; j < d; ++j)
            ds.features(i, j) = centers(b, j) + config.blob_std * rng.normal();
        const auto [c1, c2] = blob_classes[static_cast<std::size_t>(b)];
        if (blob_is_noisy[static_cast<std::size_t>(b)]) {
            ds.labels[static_cast<std::size_t>(i)] = rng.uniform_int(2) == 0 ? c1 : c2;
            (*ds.noise_flags)[static_cast<std::size_t>(i)] = 1;
        } else {
            ds.labels[static_cast<std::size_t>(i)] = c1;
        }
    }
    ds.validate();

    return BlobGeneration{std::move(ds), std::move(centers), std::move(blob_of),
                          std::move(blob_is_noisy), std::move(blob_classes)};
}

Dataset make_noisy_blobs(const BlobConfig& config) {
    return make_noisy_blobs_detailed(config).dataset;
}

std::vector<int> CvPlan::test_indices(int repeat, int fold) const {
    const auto& assign = fold_of.at(static_cast<std::size_t>(repeat));
    std::vector<int> out;
    for (std::size_t i = 0; i < assign.size(); ++i)
        if (assign[i] == fold) out.push_back(static_cast<int>(i));
    return out;
}

std::vector<int> CvPlan::train_indices(int repeat, int fold) const {
    const auto& assign = fold_of.at(static_cast<std::size_t>(repeat));
    std::vector<int> out;
    for (std::size_t i = 0; i < assign.size(); ++i)
        if (assign[i] != fold) out.push_back(static_cast<int>(i));
    return out;
}

CvPlan plan_cv(int n_samples, const std::vector<int>& labels, int n_repeats,
               int n_folds, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("plan_cv: n_folds must be >= 2");
    if (n_repeats < 1) throw ConfigError("plan_cv: n_repeats must be >= 1");
    if (static_cast<int>(labels.size()) != n_samples)
        throw ConfigError("plan_cv: labels length does not match n_samples");

    int n_classes = 0;
    for (int y : labels) n_classes = std::max(n_classes, y + 1);

    std::vector<std::vector<int>> members(static_cast<std::size_t>(n_classes));
    for (int i = 0; i < n_samples; ++i)
        members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);
    for (int c = 0; c < n_classes; ++c) {
        if (static_cast<int>(members[static_cast<std::size_t>(c)].size()) < n_folds)
            throw ConfigError("plan_cv: stratification error, class " + std::to_string(c) +
                              " has " + std::to_string(members[static_cast<std::size_t>(c)].size()) +
                              " members but n_folds=" + std::to_string(n_folds));
    }

    Rng rng(seed);
    CvPlan plan;
    plan.n_repeats = n_repeats;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.fold_of.assign(static_cast<std::size_t>(n_repeats),
                        std::vector<int>(static_cast<std::size_t>(n_samples), 0));

    // Dealing shuffled class members to folds through one rotating counter
    // keeps both the global fold sizes and every per-class split within one
    // sample of even.
    for (int r = 0; r < n_repeats; ++r) {
        int counter = 0;
        for (int c = 0; c < n_classes; ++c) {
            std::vector<int> m = members[static_cast<std::size_t>(c)];
            rng.shuffle(m);
            for (int idx : m) {
                plan.fold_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(idx)] =
                    counter % n_folds;
                ++counter;
            }
        }
    }
    return plan;
}

PoolState initial_pool(const std::vector<int>& train_indices,
                       const std::vector<int>& test_indices,
                       const std::vector<int>& labels, int n_seed_per_class,
                       std::uint64_t seed) {
    if (n_seed_per_class < 1) throw ConfigError("initial_pool: n_seed_per_class must be >= 1");

    int n_classes = 0;
    for (int y : labels) n_classes = std::max(n_classes, y + 1);

    std::vector<std::vector<int>> members(static_cast<std::size_t>(n_classes));
    for (int i : train_indices)
        members[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])].push_back(i);

    Rng rng(seed);
    std::set<int> labeled;
    for (int c = 0; c < n_classes; ++c) {
        auto& m = members[static_cast<std::size_t>(c)];
        if (m.empty())
            throw RunError("initial_pool: seeding error, class " + std::to_string(c) +
                           " absent from the training fold");
        if (static_cast<int>(m.size()) < n_seed_per_class)
            throw RunError("initial_pool: seeding error, class " + std::to_string(c) + " has only " +
                           std::to_string(m.size()) + " training samples, need " +
                           std::to_string(n_seed_per_class));
        for (int pos : rng.sample_without_replacement(static_cast<int>(m.size()), n_seed_per_class))
            labeled.insert(m[static_cast<std::size_t>(pos)]);
    }

    PoolState pool;
    pool.labeled.assign(labeled.begin(), labeled.end());
    for (int i : train_indices)
        if (!labeled.count(i)) pool.unlabeled.push_back(i);
    std::sort(pool.unlabeled.begin(), pool.unlabeled.end());
    pool.test = test_indices;
    std::sort(pool.test.begin(), pool.test.end());
    return pool;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
    return out;
}

} // namespace noisyal
