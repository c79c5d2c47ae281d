#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include <doctest.h>

#include "noisyal/errors.hpp"
#include "noisyal/kmeans.hpp"
#include "noisyal/rng.hpp"
#include "noisyal/strategies.hpp"
#include "test_util.hpp"

using namespace noisyal;

namespace {

ProbabilityMatrix probs_from(const std::vector<std::vector<double>>& rows) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return ProbabilityMatrix(m);
}

// Random row-stochastic matrix for property tests.
ProbabilityMatrix random_probs(int n, int c, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd m(n, c);
    for (int i = 0; i < n; ++i) {
        double total = 0.0;
        for (int j = 0; j < c; ++j) {
            m(i, j) = -std::log(1.0 - rng.uniform());
            total += m(i, j);
        }
        m.row(i) /= total;
    }
    return ProbabilityMatrix(m);
}

EmbeddingMatrix embedding_of(const Eigen::MatrixXd& values) {
    EmbeddingMatrix e;
    e.values = values;
    e.requested_dim = static_cast<int>(values.cols());
    e.raw_dim = e.requested_dim;
    return e;
}

void check_batch_invariants(const BatchSelection& batch, const std::vector<int>& candidates,
                            int k) {
    const std::set<int> unique(batch.indices.begin(), batch.indices.end());
    CHECK(unique.size() == batch.indices.size());
    const std::set<int> pool(candidates.begin(), candidates.end());
    for (int i : batch.indices) CHECK(pool.count(i) == 1);
    CHECK(batch.indices.size() ==
          std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size()));
}

} // namespace

TEST_CASE("confidence and margin scores match hand-computed rows") {
    const auto probs = probs_from({
        std::vector<double>(10, 0.1),  // uniform 10-class
        {0.6, 0.3, 0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},  // one-hot
        {0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},  // tied top-2
    });

    const auto conf = score_lowest_confidence(probs);
    CHECK(conf[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(conf[1] == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(conf[2] == doctest::Approx(0.0).epsilon(1e-12));

    const auto marg = score_margin(probs);
    CHECK(marg[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(marg[1] == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(marg[2] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(marg[3] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("informed confidence is the ideal-vs-current confidence gap") {
    const auto current = probs_from({{0.6, 0.4}, {0.9, 0.1}, {0.3, 0.7}});
    const auto ideal = probs_from({{0.9, 0.1}, {0.55, 0.45}, {0.3, 0.7}});

    const auto scores = score_iconfidence(current, ideal);
    CHECK(scores[0] == doctest::Approx(0.3).epsilon(1e-12));   // 0.9 - 0.6
    CHECK(scores[1] == doctest::Approx(-0.35).epsilon(1e-12)); // noisy: 0.55 - 0.9
    CHECK(scores[2] == doctest::Approx(0.0).epsilon(1e-12));   // identical rows

    // Alternative reading: the ideal probability of the class the current
    // model predicts, not the ideal's own best class.
    const auto current2 = probs_from({{0.2, 0.8}});
    const auto ideal2 = probs_from({{0.9, 0.1}});
    const auto max_mode = score_iconfidence(current2, ideal2, IConfidenceMode::IdealMax);
    const auto at_mode =
        score_iconfidence(current2, ideal2, IConfidenceMode::IdealAtCurrentArgmax);
    CHECK(max_mode[0] == doctest::Approx(0.1).epsilon(1e-12));  // 0.9 - 0.8
    CHECK(at_mode[0] == doctest::Approx(-0.7).epsilon(1e-12));  // 0.1 - 0.8

    const auto tall = random_probs(4, 3, 1);
    const auto wide = random_probs(3, 3, 2);
    CHECK_THROWS_AS(score_iconfidence(tall, wide), std::invalid_argument);
}

TEST_CASE("scores are permutation-equivariant") {
    const auto probs = random_probs(12, 5, 99);
    std::vector<int> perm(12);
    for (int i = 0; i < 12; ++i) perm[static_cast<std::size_t>(i)] = i;
    Rng rng(7);
    rng.shuffle(perm);

    Eigen::MatrixXd permuted(12, 5);
    for (int i = 0; i < 12; ++i) permuted.row(i) = probs.values.row(perm[static_cast<std::size_t>(i)]);
    const ProbabilityMatrix probs_p(permuted);

    const auto ideal = random_probs(12, 5, 100);
    Eigen::MatrixXd ideal_perm(12, 5);
    for (int i = 0; i < 12; ++i) ideal_perm.row(i) = ideal.values.row(perm[static_cast<std::size_t>(i)]);
    const ProbabilityMatrix ideal_p(ideal_perm);

    const auto conf = score_lowest_confidence(probs);
    const auto conf_p = score_lowest_confidence(probs_p);
    const auto marg = score_margin(probs);
    const auto marg_p = score_margin(probs_p);
    const auto info = score_iconfidence(probs, ideal);
    const auto info_p = score_iconfidence(probs_p, ideal_p);
    for (int i = 0; i < 12; ++i) {
        CHECK(conf_p[static_cast<std::size_t>(i)] == conf[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        CHECK(marg_p[static_cast<std::size_t>(i)] == marg[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
        CHECK(info_p[static_cast<std::size_t>(i)] == info[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
    }
}

TEST_CASE("select_top_k orders by score and breaks ties by sample index") {
    const std::vector<int> cands = {7, 3, 9, 1};

    const auto top = select_top_k({0.1, 0.9, 0.5, 0.2}, cands, 2);
    CHECK(top.indices == std::vector<int>{3, 9});

    const auto tied = select_top_k({0.4, 0.4, 0.4, 0.4}, cands, 2);
    CHECK(tied.indices == std::vector<int>{1, 3}); // two lowest sample indices

    const auto all = select_top_k({0.1, 0.9, 0.5, 0.2}, cands, 9);
    CHECK(all.indices == std::vector<int>{3, 9, 1, 7}); // whole pool in score order

    // Scaling every score by a positive constant changes nothing.
    const std::vector<double> scores = {0.15, 0.05, 0.85, 0.6};
    const auto base = select_top_k(scores, cands, 3);
    std::vector<double> scaled = scores;
    for (auto& s : scaled) s *= 137.0;
    CHECK(select_top_k(scaled, cands, 3).indices == base.indices);

    CHECK_THROWS_AS(select_top_k({}, {}, 1), RunError);
    CHECK_THROWS_AS(select_top_k({0.3}, {0}, 0), std::invalid_argument);
    CHECK_THROWS_AS(select_top_k({0.3, 0.1}, {0}, 1), std::invalid_argument);
}

TEST_CASE("select_random is a deterministic uniform draw") {
    std::vector<int> pool(10);
    for (int i = 0; i < 10; ++i) pool[static_cast<std::size_t>(i)] = i + 100;

    auto everything = select_random(pool, 10, 4).indices;
    std::sort(everything.begin(), everything.end());
    CHECK(everything == pool);

    CHECK(select_random(pool, 3, 8).indices == select_random(pool, 3, 8).indices);
    CHECK_THROWS_AS(select_random({}, 1, 0), RunError);

    // Monte Carlo uniformity: frequency of each candidate over many seeded
    // single draws stays near 1/10.
    std::map<int, int> hits;
    const int draws = 10000;
    for (int s = 0; s < draws; ++s) ++hits[select_random(pool, 1, 50000 + s).indices[0]];
    for (int i : pool) {
        const double freq = static_cast<double>(hits[i]) / draws;
        CHECK(freq > 0.08);
        CHECK(freq < 0.12);
    }
}

TEST_CASE("kcenter greedy picks the farthest point first") {
    Eigen::MatrixXd pts(4, 1);
    pts << 0.0, 1.0, 2.0, 10.0;
    const auto emb = embedding_of(pts);
    const std::vector<int> labeled = {0};
    const std::vector<int> cands = {1, 2, 3};

    CHECK(kcenter_greedy(emb, labeled, cands, 1).indices == std::vector<int>{3});
    // After 10 is in, min-distances are 1 (point 1) and 2 (point 2).
    CHECK(kcenter_greedy(emb, labeled, cands, 2).indices == std::vector<int>{3, 2});
    CHECK(kcenter_greedy(emb, labeled, cands, 99).indices == std::vector<int>{3, 2, 1});

    CHECK_THROWS_AS(kcenter_greedy(emb, {}, cands, 1), std::invalid_argument);
    CHECK_THROWS_AS(kcenter_greedy(emb, labeled, {}, 1), RunError);
    CHECK_THROWS_AS(kcenter_greedy(emb, {9}, cands, 1), std::invalid_argument);
}

TEST_CASE("kcenter ties resolve to the lowest row index") {
    Eigen::MatrixXd pts(3, 1);
    pts << 0.0, -5.0, 5.0; // both candidates exactly 5 away from the label
    const auto emb = embedding_of(pts);
    const auto sel = kcenter_greedy(emb, {0}, {2, 1}, 1);
    CHECK(sel.indices == std::vector<int>{1});
}

TEST_CASE("kcenter greedy equals the brute-force step argmax on random instances") {
    Rng meta(5005);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 5 + meta.uniform_int(11); // <= 15 points
        const int n_labeled = 1 + meta.uniform_int(3);
        const auto pts = testutil::random_points(n, 2, meta.next_u64());
        const auto emb = embedding_of(pts);

        std::vector<int> all(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
        Rng shuffler(meta.next_u64());
        shuffler.shuffle(all);
        const std::vector<int> labeled(all.begin(), all.begin() + n_labeled);
        std::vector<int> cands(all.begin() + n_labeled, all.end());
        const int k = 1 + meta.uniform_int(static_cast<int>(cands.size()));

        const auto sel = kcenter_greedy(emb, labeled, cands, k);
        REQUIRE(static_cast<int>(sel.indices.size()) == k);

        // Replay the greedy steps with a brute-force argmax over remaining
        // candidates at each step.
        std::vector<int> reference_set(labeled);
        std::set<int> remaining(cands.begin(), cands.end());
        for (int step = 0; step < k; ++step) {
            int best = -1;
            double best_d2 = -1.0;
            for (int c : remaining) {
                double min_d2 = std::numeric_limits<double>::infinity();
                for (int r : reference_set)
                    min_d2 = std::min(min_d2, (pts.row(c) - pts.row(r)).squaredNorm());
                if (min_d2 > best_d2 || (min_d2 == best_d2 && c < best)) {
                    best_d2 = min_d2;
                    best = c;
                }
            }
            CHECK(sel.indices[static_cast<std::size_t>(step)] == best);
            reference_set.push_back(best);
            remaining.erase(best);
        }
    }
}

TEST_CASE("wkmeans returns the whole preselection when k covers it") {
    const auto pts = testutil::random_points(5, 2, 1);
    const auto probs = random_probs(5, 3, 2);
    const std::vector<int> cands = {10, 11, 12, 13, 14};

    // beta*k >= pool and k = pool size: everything comes back.
    const auto sel = wkmeans_select(pts, probs, cands, 5, 2, 0);
    std::vector<int> sorted = sel.indices;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == cands);
}

TEST_CASE("wkmeans splits two far-apart groups and matches the exhaustive optimum") {
    // Ten 1-D points: five near 0, five near 100. Margins are high across the
    // board and beta*k = 10 = n, so the whole pool survives preselection and
    // the clustering step really decides the batch.
    Eigen::MatrixXd pts(10, 1);
    pts << 0.0, 0.3, 0.6, 0.9, 1.2, 100.0, 100.3, 100.6, 100.9, 101.2;
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 10; ++i) {
        const double h1 = 0.5 + 0.02 * i; // margins 1.0 down to 0.64, all kept
        rows.push_back({h1, 1.0 - h1});
    }
    const auto probs = probs_from(rows);
    std::vector<int> cands(10);
    for (int i = 0; i < 10; ++i) cands[static_cast<std::size_t>(i)] = i;

    const int k = 2;
    const int beta = 5;
    const std::uint64_t seed = 3;
    const auto sel = wkmeans_select(pts, probs, cands, k, beta, seed);
    REQUIRE(sel.indices.size() == 2);
    const int low = std::min(sel.indices[0], sel.indices[1]);
    const int high = std::max(sel.indices[0], sel.indices[1]);
    CHECK(low <= 4);   // one pick from the left group
    CHECK(high >= 5);  // one from the right group

    // The kernel's final inertia equals the exhaustive minimum over all
    // 2-partitions with weighted-mean centroids.
    const auto margins = score_margin(probs);
    std::vector<double> w(margins.begin(), margins.end());
    const auto km = kmeans_fixed(pts, w, 2, Eigen::MatrixXd(0, 1), seed);

    double best = std::numeric_limits<double>::infinity();
    for (int mask = 1; mask < (1 << 10) - 1; ++mask) {
        double sum[2] = {0, 0}, mass[2] = {0, 0};
        for (int i = 0; i < 10; ++i) {
            const int g = (mask >> i) & 1;
            sum[g] += w[static_cast<std::size_t>(i)] * pts(i, 0);
            mass[g] += w[static_cast<std::size_t>(i)];
        }
        if (mass[0] == 0.0 || mass[1] == 0.0) continue;
        const double c0 = sum[0] / mass[0];
        const double c1 = sum[1] / mass[1];
        double inertia = 0.0;
        for (int i = 0; i < 10; ++i) {
            const int g = (mask >> i) & 1;
            const double c = g == 0 ? c0 : c1;
            inertia += w[static_cast<std::size_t>(i)] * (pts(i, 0) - c) * (pts(i, 0) - c);
        }
        best = std::min(best, inertia);
    }
    CHECK(km.inertia == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("wkmeans copes with all-zero margins via the weight floor") {
    // One-hot rows everywhere: margin scores are all zero.
    Eigen::MatrixXd pts(6, 2);
    pts << 0, 0, 1, 0, 0, 1, 10, 10, 11, 10, 10, 11;
    std::vector<std::vector<double>> rows(6, {1.0, 0.0});
    const auto probs = probs_from(rows);
    std::vector<int> cands = {0, 1, 2, 3, 4, 5};

    const auto sel = wkmeans_select(pts, probs, cands, 2, 3, 9);
    check_batch_invariants(sel, cands, 2);
}

TEST_CASE("wkmeans and iwkmeans respect batch invariants on random instances") {
    Rng meta(6006);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 4 + meta.uniform_int(20);
        const int k = 1 + meta.uniform_int(6);
        const int beta = 1 + meta.uniform_int(4);
        const auto pts = testutil::random_points(n, 2, meta.next_u64());
        const auto probs = random_probs(n, 3, meta.next_u64());
        std::vector<int> cands(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) cands[static_cast<std::size_t>(i)] = 1000 + 2 * i;

        const auto wk = wkmeans_select(pts, probs, cands, k, beta, meta.next_u64());
        check_batch_invariants(wk, cands, k);

        const auto labeled = testutil::random_points(1 + meta.uniform_int(5), 2, meta.next_u64());
        const auto iwk = iwkmeans_select(pts, probs, labeled, cands, k, beta, meta.next_u64());
        check_batch_invariants(iwk, cands, k);
    }
}

TEST_CASE("a remote labeled point leaves iwkmeans equal to wkmeans") {
    const auto pts = testutil::random_points(12, 2, 21); // diameter ~ 40
    const auto probs = random_probs(12, 4, 22);
    std::vector<int> cands(12);
    for (int i = 0; i < 12; ++i) cands[static_cast<std::size_t>(i)] = i;

    Eigen::MatrixXd far(1, 2);
    far << 1e6, 1e6; // >= 1000x the data diameter away

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto wk = wkmeans_select(pts, probs, cands, 3, 2, seed);
        const auto iwk = iwkmeans_select(pts, probs, far, cands, 3, 2, seed);
        CHECK(wk.indices == iwk.indices);
    }
}

TEST_CASE("iwkmeans is repelled from a labeled region") {
    // Dense candidate cluster next to the labeled point at the origin, and an
    // equally dense cluster far away. Heavier margins near the labeled point
    // pull plain wkmeans there; the fixed centroid pushes iwkmeans away.
    Eigen::MatrixXd pts(8, 2);
    pts << 0.5, 0.0, 0.7, 0.1, 0.6, -0.1, 0.8, 0.0, // near cluster
        50.0, 0.0, 50.2, 0.1, 50.1, -0.1, 50.3, 0.0; // far cluster
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 4; ++i) rows.push_back({0.5, 0.5});   // margin 1.0
    for (int i = 0; i < 4; ++i) rows.push_back({0.65, 0.35}); // margin 0.7
    const auto probs = probs_from(rows);
    std::vector<int> cands = {0, 1, 2, 3, 4, 5, 6, 7};

    Eigen::MatrixXd labeled(1, 2);
    labeled << 0.0, 0.0;

    const auto margins = score_margin(probs);
    std::vector<double> w(margins.begin(), margins.end());

    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto wk = wkmeans_select(pts, probs, cands, 1, 8, seed);
        REQUIRE(wk.indices.size() == 1);
        CHECK(wk.indices[0] <= 3); // heavier near cluster wins without repulsion

        const auto iwk = iwkmeans_select(pts, probs, labeled, cands, 1, 8, seed);
        REQUIRE(iwk.indices.size() == 1);
        CHECK(iwk.indices[0] >= 4); // fixed centroid absorbs the near cluster
    }

    // Exhaustive confirmation: with the fixed centroid present, the joint
    // objective is lower for a moving centroid placed in the far cluster.
    auto joint_inertia = [&](const Eigen::RowVector2d& moving) {
        double total = 0.0;
        for (int i = 0; i < 8; ++i) {
            const double to_moving = (pts.row(i) - moving).squaredNorm();
            const double to_fixed = (pts.row(i) - labeled.row(0)).squaredNorm();
            total += w[static_cast<std::size_t>(i)] * std::min(to_moving, to_fixed);
        }
        return total;
    };
    double best_near = std::numeric_limits<double>::infinity();
    double best_far = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 8; ++i) {
        const double v = joint_inertia(pts.row(i));
        (i < 4 ? best_near : best_far) = std::min(i < 4 ? best_near : best_far, v);
    }
    CHECK(best_far < best_near);
}

TEST_CASE("iwkmeans requires labeled points") {
    const auto pts = testutil::random_points(5, 2, 1);
    const auto probs = random_probs(5, 2, 2);
    CHECK_THROWS_AS(iwkmeans_select(pts, probs, Eigen::MatrixXd(0, 2), {0, 1, 2, 3, 4}, 2, 2, 0),
                    std::invalid_argument);
}

TEST_CASE("strategy names are the canonical seven") {
    const auto& names = strategy_names();
    CHECK(names == std::vector<std::string>{"random", "confidence", "iconfidence", "margin",
                                            "kcenter", "wkmeans", "iwkmeans"});
    CHECK(is_known_strategy("iwkmeans"));
    CHECK(!is_known_strategy("batchbald"));

    CHECK(to_string(IConfidenceMode::IdealMax) == "ideal_max");
    CHECK(iconfidence_mode_from_string("ideal_at_current_argmax") ==
          IConfidenceMode::IdealAtCurrentArgmax);
    CHECK_THROWS_AS(iconfidence_mode_from_string("bogus"), ConfigError);
}
