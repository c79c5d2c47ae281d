#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <doctest.h>

#include "noisyal/dataset.hpp"
#include "noisyal/errors.hpp"
#include "test_util.hpp"

using namespace noisyal;

TEST_CASE("blob generator honors its geometric and labeling invariants") {
    auto cfg = testutil::small_blobs();
    const auto gen = make_noisy_blobs_detailed(cfg);
    const Dataset& ds = gen.dataset;

    REQUIRE(ds.n_samples() == cfg.n_samples);
    REQUIRE(ds.n_features() == cfg.n_features);
    REQUIRE(ds.n_classes == cfg.n_classes);
    REQUIRE(ds.noise_flags.has_value());
    CHECK_NOTHROW(ds.validate());

    for (int y : ds.labels) {
        CHECK(y >= 0);
        CHECK(y < cfg.n_classes);
    }

    // Pairwise center separation, checked exhaustively.
    const double min_dist = cfg.min_center_separation * cfg.blob_std;
    for (int a = 0; a < cfg.n_blobs; ++a)
        for (int b = a + 1; b < cfg.n_blobs; ++b)
            CHECK((gen.centers.row(a) - gen.centers.row(b)).norm() >= min_dist);

    // Exactly the samples of noisy blobs are flagged.
    int flagged = 0;
    for (int i = 0; i < cfg.n_samples; ++i) {
        const int b = gen.blob_of_sample[static_cast<std::size_t>(i)];
        const bool should_flag = gen.blob_is_noisy[static_cast<std::size_t>(b)] != 0;
        CHECK((*ds.noise_flags)[static_cast<std::size_t>(i)] == (should_flag ? 1 : 0));
        flagged += should_flag ? 1 : 0;
    }
    CHECK(flagged == std::count(ds.noise_flags->begin(), ds.noise_flags->end(), 1));

    // Noisy blobs carry two distinct classes, regular blobs one.
    for (int b = 0; b < cfg.n_blobs; ++b) {
        const auto [c1, c2] = gen.blob_classes[static_cast<std::size_t>(b)];
        if (gen.blob_is_noisy[static_cast<std::size_t>(b)])
            CHECK(c1 != c2);
        else
            CHECK(c1 == c2);
    }

    // Samples sit near their blob center (99.99%+ of Gaussian mass within 6
    // sigma in 2-D; a violation here means membership bookkeeping is wrong).
    for (int i = 0; i < cfg.n_samples; ++i) {
        const int b = gen.blob_of_sample[static_cast<std::size_t>(i)];
        CHECK((ds.features.row(i) - gen.centers.row(b)).norm() < 6.0 * cfg.blob_std);
    }
}

TEST_CASE("flag count equals the occupancy of the noisy blobs on a high-dimensional task") {
    BlobConfig cfg;
    cfg.n_samples = 40;
    cfg.n_features = 40;
    cfg.n_classes = 9;
    cfg.n_blobs = 9;
    cfg.n_noisy_blobs = 3;
    cfg.seed = 7;

    const auto gen = make_noisy_blobs_detailed(cfg);

    // Recount: blob occupancy, summed over noisy blobs, must equal the number
    // of flagged samples.
    std::vector<int> occupancy(static_cast<std::size_t>(cfg.n_blobs), 0);
    for (int b : gen.blob_of_sample) ++occupancy[static_cast<std::size_t>(b)];
    int expected = 0;
    for (int b = 0; b < cfg.n_blobs; ++b)
        if (gen.blob_is_noisy[static_cast<std::size_t>(b)]) expected += occupancy[static_cast<std::size_t>(b)];

    const auto& flags = *gen.dataset.noise_flags;
    CHECK(std::count(flags.begin(), flags.end(), 1) == expected);
}

TEST_CASE("blob generation is deterministic in the seed") {
    auto cfg = testutil::small_blobs();
    const Dataset a = make_noisy_blobs(cfg);
    const Dataset b = make_noisy_blobs(cfg);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK(*a.noise_flags == *b.noise_flags);

    cfg.seed = 43;
    const Dataset c = make_noisy_blobs(cfg);
    CHECK(a.features != c.features);
}

TEST_CASE("blob config validation rejects bad field combinations") {
    auto cfg = testutil::small_blobs();
    cfg.n_noisy_blobs = cfg.n_blobs + 1;
    CHECK_THROWS_AS(make_noisy_blobs(cfg), ConfigError);

    cfg = testutil::small_blobs();
    cfg.n_classes = 1;
    CHECK_THROWS_AS(make_noisy_blobs(cfg), ConfigError);

    cfg = testutil::small_blobs();
    cfg.n_classes = cfg.n_blobs + 1; // round-robin could not cover every class
    CHECK_THROWS_AS(make_noisy_blobs(cfg), ConfigError);

    cfg = testutil::small_blobs();
    cfg.blob_std = 0.0;
    CHECK_THROWS_AS(make_noisy_blobs(cfg), ConfigError);
}

TEST_CASE("infeasible center placement raises a run error, not a hang") {
    auto cfg = testutil::small_blobs();
    cfg.n_blobs = 50;
    cfg.n_classes = 10;
    cfg.n_noisy_blobs = 0;
    cfg.center_box_halfwidth = 2.0; // nowhere near enough room at 6 sigma
    CHECK_THROWS_AS(make_noisy_blobs(cfg), RunError);
}

TEST_CASE("cross-validation plan is a stratified partition") {
    auto cfg = testutil::small_blobs();
    const Dataset ds = make_noisy_blobs(cfg);
    const int n_repeats = 3;
    const int n_folds = 2;
    const auto plan = plan_cv(ds.n_samples(), ds.labels, n_repeats, n_folds, 99);

    std::map<int, int> class_total;
    for (int y : ds.labels) ++class_total[y];

    for (int r = 0; r < n_repeats; ++r) {
        // Partition: every sample in exactly one fold.
        std::vector<int> seen(static_cast<std::size_t>(ds.n_samples()), 0);
        for (int f = 0; f < n_folds; ++f) {
            const auto test = plan.test_indices(r, f);
            const auto train = plan.train_indices(r, f);
            CHECK(static_cast<int>(test.size() + train.size()) == ds.n_samples());
            CHECK(std::is_sorted(test.begin(), test.end()));
            CHECK(std::is_sorted(train.begin(), train.end()));
            for (int i : test) ++seen[static_cast<std::size_t>(i)];

            // Stratification: per-class test share within one sample of even.
            std::map<int, int> class_in_fold;
            for (int i : test) ++class_in_fold[ds.labels[static_cast<std::size_t>(i)]];
            for (const auto& [c, total] : class_total) {
                const double even = static_cast<double>(total) / n_folds;
                CHECK(std::abs(class_in_fold[c] - even) <= 1.0);
            }
        }
        for (int s : seen) CHECK(s == 1);
    }

    // Different repeats shuffle differently.
    CHECK(plan.fold_of[0] != plan.fold_of[1]);

    // Determinism.
    const auto plan2 = plan_cv(ds.n_samples(), ds.labels, n_repeats, n_folds, 99);
    CHECK(plan.fold_of == plan2.fold_of);
}

TEST_CASE("plan_cv rejects classes with fewer samples than folds") {
    std::vector<int> labels = {0, 0, 0, 1}; // class 1 cannot be split across 3 folds
    CHECK_THROWS_AS(plan_cv(4, labels, 1, 3, 0), ConfigError);
}

TEST_CASE("initial pool seeds every class and partitions the training fold") {
    auto cfg = testutil::small_blobs();
    const Dataset ds = make_noisy_blobs(cfg);
    const auto plan = plan_cv(ds.n_samples(), ds.labels, 1, 2, 5);
    const auto train = plan.train_indices(0, 0);
    const auto test = plan.test_indices(0, 0);

    const int per_class = 2;
    const auto pool = initial_pool(train, test, ds.labels, per_class, 17);
    CHECK_NOTHROW(pool.validate(ds.n_samples()));

    CHECK(static_cast<int>(pool.labeled.size()) == per_class * cfg.n_classes);
    std::map<int, int> seeded;
    for (int i : pool.labeled) ++seeded[ds.labels[static_cast<std::size_t>(i)]];
    for (int c = 0; c < cfg.n_classes; ++c) CHECK(seeded[c] == per_class);

    // labeled + unlabeled == train fold, all disjoint from test.
    std::vector<int> merged(pool.labeled);
    merged.insert(merged.end(), pool.unlabeled.begin(), pool.unlabeled.end());
    std::sort(merged.begin(), merged.end());
    CHECK(merged == train);
    CHECK(pool.test == test);

    // Deterministic in the seed, different for another seed.
    const auto pool2 = initial_pool(train, test, ds.labels, per_class, 17);
    CHECK(pool.labeled == pool2.labeled);
    const auto pool3 = initial_pool(train, test, ds.labels, per_class, 18);
    CHECK(pool.labeled != pool3.labeled);
}

TEST_CASE("initial pool reports classes it cannot seed") {
    // Class 2 never appears in the training fold.
    std::vector<int> labels = {0, 1, 0, 1, 2, 2};
    std::vector<int> train = {0, 1, 2, 3};
    std::vector<int> test = {4, 5};
    CHECK_THROWS_AS(initial_pool(train, test, labels, 1, 0), RunError);

    // Asking for more seeds than a class owns is likewise a run error.
    std::vector<int> train2 = {0, 1, 2, 3, 4, 5};
    CHECK_THROWS_AS(initial_pool(train2, {}, labels, 3, 0), RunError);
}

TEST_CASE("pool state validation catches overlaps and disorder") {
    PoolState pool;
    pool.labeled = {0, 1};
    pool.unlabeled = {1, 2};
    pool.test = {3};
    CHECK_THROWS_AS(pool.validate(4), ConfigError);

    pool.unlabeled = {2};
    CHECK_NOTHROW(pool.validate(4));

    pool.test = {2};
    CHECK_THROWS_AS(pool.validate(4), ConfigError);

    pool.test = {3};
    pool.labeled = {1, 0};
    CHECK_THROWS_AS(pool.validate(4), ConfigError);
}

TEST_CASE("csv round trip preserves features, labels and flags") {
    auto cfg = testutil::small_blobs();
    cfg.n_samples = 60;
    const Dataset ds = make_noisy_blobs(cfg);

    testutil::TempDir dir("csvrt");
    const auto path = dir.file("blobs.csv");
    save_csv(ds, path);

    const Dataset back = load_csv(path, "label", std::string("noise_flag"));
    CHECK(back.n_samples() == ds.n_samples());
    CHECK(back.n_features() == ds.n_features());
    CHECK(back.n_classes == ds.n_classes);
    CHECK(back.labels == ds.labels);
    REQUIRE(back.noise_flags.has_value());
    CHECK(*back.noise_flags == *ds.noise_flags);
    CHECK((back.features - ds.features).cwiseAbs().maxCoeff() == 0.0);

    // Shortest round-trip formatting makes a rewrite byte-identical.
    const auto path2 = dir.file("blobs2.csv");
    save_csv(back, path2);
    CHECK(testutil::read_file(path) == testutil::read_file(path2));
}

TEST_CASE("csv loader re-encodes sparse raw labels in sorted order") {
    testutil::TempDir dir("csvenc");
    const auto path = dir.file("sparse.csv");
    testutil::write_file(path,
                         "a,b,label\n"
                         "0.5,1.0,30\n"
                         "1.5,2.0,10\n"
                         "2.5,3.0,20\n"
                         "3.5,4.0,10\n");
    const Dataset ds = load_csv(path, "label");
    CHECK(ds.n_classes == 3);
    CHECK(ds.labels == std::vector<int>{2, 0, 1, 0}); // 10 -> 0, 20 -> 1, 30 -> 2
    CHECK(!ds.noise_flags.has_value());
}

TEST_CASE("csv loader rejects structural problems with config errors") {
    testutil::TempDir dir("csverr");

    CHECK_THROWS_AS(load_csv(dir.file("absent.csv"), "label"), ConfigError);

    const auto bad_col = dir.file("badcol.csv");
    testutil::write_file(bad_col, "a,b\n1,0\n2,1\n");
    CHECK_THROWS_AS(load_csv(bad_col, "label"), ConfigError);

    const auto bad_cell = dir.file("badcell.csv");
    testutil::write_file(bad_cell, "a,label\n1,0\nfoo,1\n");
    CHECK_THROWS_AS(load_csv(bad_cell, "label"), ConfigError);

    const auto ragged = dir.file("ragged.csv");
    testutil::write_file(ragged, "a,b,label\n1,2,0\n1,1\n");
    CHECK_THROWS_AS(load_csv(ragged, "label"), ConfigError);

    const auto one_class = dir.file("oneclass.csv");
    testutil::write_file(one_class, "a,label\n1,0\n2,0\n");
    CHECK_THROWS_AS(load_csv(one_class, "label"), ConfigError);
}

TEST_CASE("bundled iris csv loads as a 3-class task") {
    const Dataset iris = load_csv(testutil::data_file("iris.csv"), "label");
    CHECK(iris.n_samples() == 150);
    CHECK(iris.n_features() == 4);
    CHECK(iris.n_classes == 3);
    for (int c = 0; c < 3; ++c)
        CHECK(std::count(iris.labels.begin(), iris.labels.end(), c) == 50);
}

TEST_CASE("take_rows gathers rows in index order") {
    Eigen::MatrixXd m(3, 2);
    m << 1, 2, 3, 4, 5, 6;
    const Eigen::MatrixXd picked = take_rows(m, {2, 0});
    CHECK(picked.rows() == 2);
    CHECK(picked(0, 0) == 5.0);
    CHECK(picked(1, 1) == 2.0);

    const std::vector<int> v = {10, 20, 30};
    CHECK(take(v, {1, 1, 0}) == std::vector<int>{20, 20, 10});
}
