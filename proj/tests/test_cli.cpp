#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "noisyal/dataset.hpp"
#include "noisyal/harness.hpp"
#include "noisyal/ranking.hpp"
#include "test_util.hpp"

using namespace noisyal;
using testutil::run_cli;

namespace {

// A config small enough that each spawned `run` finishes in well under a
// second.
ExperimentConfig cli_config() {
    ExperimentConfig cfg;
    cfg.dataset.type = "generator";
    cfg.dataset.generator.n_samples = 120;
    cfg.dataset.generator.n_features = 2;
    cfg.dataset.generator.n_classes = 3;
    cfg.dataset.generator.n_blobs = 6;
    cfg.dataset.generator.n_noisy_blobs = 2;
    cfg.dataset.generator.center_box_halfwidth = 20.0;
    cfg.classifier.kind = ClassifierKind::RandomForest;
    cfg.classifier.forest.n_trees = 10;
    cfg.strategies = {"random", "margin"};
    cfg.n_iterations = 2;
    cfg.batch_size = 6;
    cfg.beta = 4;
    cfg.n_repeats = 2;
    cfg.n_folds = 2;
    cfg.seed = 11;
    cfg.workers = 1;
    return cfg;
}

std::string write_config(const testutil::TempDir& dir, const ExperimentConfig& cfg) {
    const std::string path = dir.file("experiment.json");
    testutil::write_file(path, experiment_config_to_json(cfg));
    return path;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

} // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli({}).exit_code == 2);
    CHECK(run_cli({"run"}).exit_code == 2);              // missing --config
    CHECK(run_cli({"frobnicate"}).exit_code == 2);       // unknown subcommand
    CHECK(run_cli({"rank"}).exit_code == 2);             // missing dirs
    const auto help = run_cli({"--help"});
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("noisyal") != std::string::npos);
}

TEST_CASE("generate writes the dataset csv and a metadata sidecar") {
    testutil::TempDir dir("cli-generate");
    testutil::write_file(dir.file("source.json"), R"({
        "type": "generator",
        "n_samples": 80,
        "n_features": 2,
        "n_classes": 3,
        "n_blobs": 4,
        "n_noisy_blobs": 0
    })");

    const auto res = run_cli({"generate", "--config", dir.file("source.json"), "--out",
                              dir.file("blobs.csv"), "--seed", "9"});
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("wrote") != std::string::npos);

    const Dataset ds = load_csv(dir.file("blobs.csv"), "label", std::string("noise_flag"));
    CHECK(ds.n_samples() == 80);
    CHECK(ds.n_classes == 3);
    REQUIRE(ds.noise_flags.has_value());
    for (auto f : *ds.noise_flags) CHECK(f == 0); // no noisy blobs requested

    const auto meta = nlohmann::json::parse(testutil::read_file(dir.file("blobs.meta.json")));
    CHECK(meta.at("schema_version").get<int>() == 1);
    CHECK(meta.at("seed").get<int>() == 9);
    CHECK(meta.at("n_samples").get<int>() == 80);
    CHECK(meta.at("n_classes").get<int>() == 3);
    CHECK(meta.at("n_noisy_samples").get<int>() == 0);
    CHECK(meta.at("source").at("type").get<std::string>() == "generator");
}

TEST_CASE("run produces byte-identical results on reruns") {
    testutil::TempDir dir("cli-run");
    const std::string cfg_path = write_config(dir, cli_config());

    const auto a = run_cli({"run", "--config", cfg_path, "--out", dir.file("a")});
    REQUIRE(a.exit_code == 0);
    CHECK(a.output.find("8/8 cells ok") != std::string::npos);

    const auto b = run_cli({"run", "--config", cfg_path, "--out", dir.file("b")});
    REQUIRE(b.exit_code == 0);

    CHECK(testutil::read_file(dir.file("a/records.csv")) ==
          testutil::read_file(dir.file("b/records.csv")));
    CHECK(testutil::read_file(dir.file("a/aggregates.json")) ==
          testutil::read_file(dir.file("b/aggregates.json")));

    // config.json echoes differ only in the out_dir they were written with.
    std::string echo_a = testutil::read_file(dir.file("a/config.json"));
    const std::string echo_b = testutil::read_file(dir.file("b/config.json"));
    const auto pos = echo_a.find(dir.file("a"));
    REQUIRE(pos != std::string::npos);
    echo_a.replace(pos, dir.file("a").size(), dir.file("b"));
    CHECK(echo_a == echo_b);

    // A different seed changes the records.
    const auto c = run_cli({"run", "--config", cfg_path, "--out", dir.file("c"), "--seed", "99"});
    REQUIRE(c.exit_code == 0);
    CHECK(testutil::read_file(dir.file("a/records.csv")) !=
          testutil::read_file(dir.file("c/records.csv")));
}

TEST_CASE("run requires an output directory") {
    testutil::TempDir dir("cli-noout");
    const std::string cfg_path = write_config(dir, cli_config());
    const auto res = run_cli({"run", "--config", cfg_path});
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("no output directory") != std::string::npos);
}

TEST_CASE("run rejects malformed or missing configs") {
    testutil::TempDir dir("cli-badcfg");
    testutil::write_file(dir.file("broken.json"), "{nope");
    const auto bad = run_cli({"run", "--config", dir.file("broken.json"), "--out", dir.file("x")});
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("invalid JSON") != std::string::npos);

    const auto missing =
        run_cli({"run", "--config", dir.file("absent.json"), "--out", dir.file("x")});
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("cannot open") != std::string::npos);
}

TEST_CASE("overrides rewrite existing keys, including nested and list values") {
    testutil::TempDir dir("cli-override");
    const std::string cfg_path = write_config(dir, cli_config());

    const auto res = run_cli({"run", "--config", cfg_path, "--out", dir.file("o"), "--override",
                              "n_iterations=1", "--override", "dataset.n_samples=90",
                              "--override", "strategies=random"});
    REQUIRE(res.exit_code == 0);

    const RunLog log = load_runlog(dir.file("o"));
    CHECK(log.config.n_iterations == 1);
    CHECK(log.config.dataset.generator.n_samples == 90);
    CHECK(log.config.strategies == std::vector<std::string>{"random"});
    CHECK(log.records.size() == 4); // 1 strategy x 2 repeats x 2 folds x 1 iteration
}

TEST_CASE("restricting strategies via override leaves shared cells identical") {
    testutil::TempDir dir("cli-cells");
    const std::string cfg_path = write_config(dir, cli_config());

    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("full")}).exit_code == 0);
    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("sub"), "--override",
                     "strategies=random"})
                .exit_code == 0);

    const auto full_lines = lines_of(testutil::read_file(dir.file("full/records.csv")));
    auto sub_lines = lines_of(testutil::read_file(dir.file("sub/records.csv")));
    REQUIRE(!full_lines.empty());
    REQUIRE(full_lines[0] == sub_lines[0]); // same header

    std::vector<std::string> full_random;
    for (std::size_t i = 1; i < full_lines.size(); ++i)
        if (full_lines[i].rfind("random,", 0) == 0) full_random.push_back(full_lines[i]);
    sub_lines.erase(sub_lines.begin());
    CHECK(full_random == sub_lines);
}

TEST_CASE("override typos and type errors are usage errors") {
    testutil::TempDir dir("cli-ovbad");
    const std::string cfg_path = write_config(dir, cli_config());

    const auto unknown = run_cli(
        {"run", "--config", cfg_path, "--out", dir.file("x"), "--override", "bogus_key=1"});
    CHECK(unknown.exit_code == 2);
    CHECK(unknown.output.find("config has no key 'bogus_key'") != std::string::npos);

    const auto nested = run_cli({"run", "--config", cfg_path, "--out", dir.file("x"),
                                 "--override", "dataset.n_bogus=1"});
    CHECK(nested.exit_code == 2);
    CHECK(nested.output.find("config has no key 'n_bogus'") != std::string::npos);

    const auto bad_int = run_cli({"run", "--config", cfg_path, "--out", dir.file("x"),
                                  "--override", "n_iterations=soon"});
    CHECK(bad_int.exit_code == 2);
    CHECK(bad_int.output.find("not an integer") != std::string::npos);

    const auto no_eq =
        run_cli({"run", "--config", cfg_path, "--out", dir.file("x"), "--override", "workers"});
    CHECK(no_eq.exit_code == 2);
    CHECK(no_eq.output.find("key=value") != std::string::npos);

    const auto bad_strategy = run_cli({"run", "--config", cfg_path, "--out", dir.file("x"),
                                       "--override", "strategies=definitely_not"});
    CHECK(bad_strategy.exit_code == 2);
    CHECK(bad_strategy.output.find("unknown strategy 'definitely_not'") != std::string::npos);
    CHECK(bad_strategy.output.find("random") != std::string::npos);
}

TEST_CASE("rank aggregates runs into a critical-difference report") {
    testutil::TempDir dir("cli-rank");
    auto cfg = cli_config();
    cfg.strategies = {"random", "margin", "confidence"};
    const std::string cfg_path = write_config(dir, cfg);

    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("r1")}).exit_code == 0);
    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("r2"), "--seed", "12"})
                .exit_code == 0);

    const auto res = run_cli({"rank", dir.file("r1"), dir.file("r2")});
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("friedman chi2") != std::string::npos);

    // Default report location is the first directory.
    const auto report =
        rank_report_from_json(testutil::read_file(dir.file("r1/rank_report.json")));
    CHECK(report.methods == std::vector<std::string>{"confidence", "margin", "random"});
    CHECK(report.n_blocks == 8); // 2 dirs x 2 repeats x 2 folds
    CHECK(report.alpha == 0.05);

    // --out redirects the report; --alpha feeds through to the test.
    const auto redirected =
        run_cli({"rank", dir.file("r1"), dir.file("r2"), "--alpha", "0.10", "--out",
                 dir.file("r2")});
    CHECK(redirected.exit_code == 0);
    const auto report2 =
        rank_report_from_json(testutil::read_file(dir.file("r2/rank_report.json")));
    CHECK(report2.alpha == 0.10);
    CHECK(report2.critical_distance < report.critical_distance);

    const auto bad_alpha = run_cli({"rank", dir.file("r1"), "--alpha", "0.2"});
    CHECK(bad_alpha.exit_code == 2);
    CHECK(bad_alpha.output.find("nemenyi parameter error") != std::string::npos);

    const auto missing = run_cli({"rank", dir.file("does-not-exist")});
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("not found") != std::string::npos);
}

TEST_CASE("rank refuses runs with different strategy sets") {
    testutil::TempDir dir("cli-rankmix");
    const std::string cfg_path = write_config(dir, cli_config());
    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("a")}).exit_code == 0);
    REQUIRE(run_cli({"run", "--config", cfg_path, "--out", dir.file("b"), "--override",
                     "strategies=random"})
                .exit_code == 0);
    const auto res = run_cli({"rank", dir.file("a"), dir.file("b")});
    CHECK(res.exit_code == 2);
    CHECK(res.output.find("strategy sets differ") != std::string::npos);
}

TEST_CASE("audit-confidence writes the requested histogram") {
    testutil::TempDir dir("cli-audit");
    testutil::write_file(dir.file("audit.json"), R"({
        "dataset": {"type": "generator", "n_samples": 150, "n_features": 2,
                    "n_classes": 3, "n_blobs": 6, "n_noisy_blobs": 0,
                    "center_box_halfwidth": 20.0},
        "classifier": {"kind": "random_forest", "forest": {"n_trees": 20}},
        "seed": 3
    })");

    const auto res = run_cli({"audit-confidence", "--config", dir.file("audit.json"), "--out",
                              dir.file("hist.csv"), "--bins", "12"});
    REQUIRE(res.exit_code == 0);
    CHECK(res.output.find("150 samples in 12 bins") != std::string::npos);

    const auto lines = lines_of(testutil::read_file(dir.file("hist.csv")));
    REQUIRE(lines.size() == 13);
    CHECK(lines[0] == "bin_low,bin_high,count");
    long long total = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto last_comma = lines[i].rfind(',');
        REQUIRE(last_comma != std::string::npos);
        total += std::stoll(lines[i].substr(last_comma + 1));
    }
    CHECK(total == 150);

    // Same config, same seed: byte-identical histogram.
    REQUIRE(run_cli({"audit-confidence", "--config", dir.file("audit.json"), "--out",
                     dir.file("hist2.csv"), "--bins", "12"})
                .exit_code == 0);
    CHECK(testutil::read_file(dir.file("hist.csv")) == testutil::read_file(dir.file("hist2.csv")));
}
