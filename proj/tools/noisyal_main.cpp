// Command-line driver: generate synthetic datasets, run experiments, rank
// strategies across runs, and audit a classifier's confidence distribution.
//
// Exit codes: 0 success, 1 runtime or partial-cell failure, 2 usage/config
// error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "noisyal/dataset.hpp"
#include "noisyal/errors.hpp"
#include "noisyal/evaluation.hpp"
#include "noisyal/harness.hpp"
#include "noisyal/ranking.hpp"
#include "noisyal/rng.hpp"
#include "noisyal/text.hpp"

namespace {

using nlohmann::json;
using namespace noisyal;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("cannot write '" + path + "'");
    out << content;
    if (!out) throw RunError("failed writing '" + path + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string part;
    std::stringstream ss(s);
    while (std::getline(ss, part, sep)) parts.push_back(part);
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

// Replace the value at a dotted key path, keeping the JSON type it had. The
// path must reference keys that already exist so typos fail loudly.
void apply_override(json& doc, const std::string& spec) {
    const std::size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError("override '" + spec + "' must look like key=value");
    const std::string path = spec.substr(0, eq);
    const std::string value = spec.substr(eq + 1);

    json* node = &doc;
    const std::vector<std::string> parts = split(path, '.');
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object() || !node->contains(parts[i]))
            throw ConfigError("override '" + path + "': config has no key '" + parts[i] + "'");
        node = &(*node)[parts[i]];
    }
    if (!node->is_object() || !node->contains(parts.back()))
        throw ConfigError("override '" + path + "': config has no key '" + parts.back() + "'");
    json& target = (*node)[parts.back()];

    const auto parse_scalar = [&](const json& like, const std::string& text) -> json {
        if (like.is_string()) return text;
        if (like.is_boolean()) {
            if (text == "true") return true;
            if (text == "false") return false;
            throw ConfigError("override '" + path + "': expected true or false, got '" + text +
                              "'");
        }
        if (like.is_number_integer() || like.is_number_unsigned()) {
            long long v = 0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
                throw ConfigError("override '" + path + "': '" + text + "' is not an integer");
            return v;
        }
        if (like.is_number_float()) {
            const std::optional<double> v = parse_double(text);
            if (!v) throw ConfigError("override '" + path + "': '" + text + "' is not a number");
            return *v;
        }
        throw ConfigError("override '" + path + "': cannot override a structured value");
    };

    if (target.is_array()) {
        const json like = target.empty() ? json("") : target[0];
        json arr = json::array();
        for (const std::string& item : split(value, ',')) arr.push_back(parse_scalar(like, item));
        target = std::move(arr);
    } else {
        target = parse_scalar(target, value);
    }
}

int cmd_generate(const std::string& config_path, const std::string& out_path,
                 std::uint64_t seed) {
    const DatasetSource source = dataset_source_from_json(read_file(config_path));
    const Dataset dataset = load_dataset(source, seed);
    save_csv(dataset, out_path);

    std::string meta_path = out_path;
    if (meta_path.size() > 4 && meta_path.substr(meta_path.size() - 4) == ".csv")
        meta_path.resize(meta_path.size() - 4);
    meta_path += ".meta.json";

    json meta;
    meta["schema_version"] = 1;
    meta["seed"] = seed;
    meta["source"] = json::parse(dataset_source_to_json(source));
    meta["name"] = dataset.name;
    meta["n_samples"] = dataset.n_samples();
    meta["n_features"] = dataset.n_features();
    meta["n_classes"] = dataset.n_classes;
    if (dataset.noise_flags) {
        int noisy = 0;
        for (std::uint8_t f : *dataset.noise_flags) noisy += f ? 1 : 0;
        meta["n_noisy_samples"] = noisy;
    }
    write_file(meta_path, meta.dump(2) + "\n");

    std::cout << "wrote " << out_path << " (" << dataset.n_samples() << " samples) and "
              << meta_path << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            const std::string& out_dir, const std::optional<std::uint64_t>& seed,
            const std::optional<int>& workers) {
    json j;
    try {
        j = json::parse(read_file(config_path));
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");

    // NOISYAL_WORKERS acts as a default: it only matters when neither the
    // config nor the command line says anything about workers.
    if (!j.contains("workers")) {
        if (const char* env = std::getenv("NOISYAL_WORKERS")) {
            int v = 0;
            const std::string text(env);
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
                throw ConfigError("NOISYAL_WORKERS='" + text + "' is not an integer");
            j["workers"] = v;
        }
    }
    for (const std::string& ov : overrides) apply_override(j, ov);
    if (seed) j["seed"] = *seed;
    if (workers) j["workers"] = *workers;
    if (!out_dir.empty()) j["out_dir"] = out_dir;

    const ExperimentConfig config = experiment_config_from_json(j.dump());
    if (config.out_dir.empty())
        throw ConfigError("no output directory: set out_dir in the config or pass --out");

    const RunLog log = run_experiment(config);
    persist_runlog(log, config.out_dir);

    int failed = 0;
    for (const CellStatus& c : log.cells) {
        if (c.ok) continue;
        ++failed;
        std::cerr << "failed: " << c.error << "\n";
    }
    std::cout << "wrote " << config.out_dir << " (" << log.records.size() << " records, "
              << log.cells.size() - static_cast<std::size_t>(failed) << "/" << log.cells.size()
              << " cells ok)\n";
    return failed == 0 ? 0 : 1;
}

int cmd_rank(const std::vector<std::string>& run_dirs, double alpha, std::string out_dir) {
    std::vector<RunLog> logs;
    logs.reserve(run_dirs.size());
    for (const std::string& dir : run_dirs) logs.push_back(load_runlog(dir));

    std::vector<std::string> methods = logs[0].config.strategies;
    std::sort(methods.begin(), methods.end());
    for (std::size_t i = 1; i < logs.size(); ++i) {
        std::vector<std::string> other = logs[i].config.strategies;
        std::sort(other.begin(), other.end());
        if (other != methods)
            throw ConfigError("strategy sets differ between '" + run_dirs[0] + "' and '" +
                              run_dirs[i] + "'");
    }

    // One block per (run dir, repeat, fold); a block only counts when every
    // method completed in it.
    std::vector<std::vector<double>> blocks; // each entry: one AUC per method
    int dropped = 0;
    for (const RunLog& log : logs) {
        std::map<std::tuple<std::string, int, int>, std::vector<double>> accs;
        for (const IterationRecord& r : log.records)
            accs[{r.strategy, r.repeat, r.fold}].push_back(r.test_accuracy);
        for (int rep = 0; rep < log.config.n_repeats; ++rep) {
            for (int fold = 0; fold < log.config.n_folds; ++fold) {
                std::vector<double> row;
                row.reserve(methods.size());
                bool complete = true;
                for (const std::string& m : methods) {
                    const auto it = accs.find({m, rep, fold});
                    if (it == accs.end()) {
                        complete = false;
                        break;
                    }
                    row.push_back(accuracy_auc(it->second));
                }
                if (complete) {
                    blocks.push_back(std::move(row));
                } else {
                    ++dropped;
                }
            }
        }
    }
    if (dropped > 0)
        std::cerr << "warning: " << dropped << " incomplete block(s) excluded from ranking\n";
    if (blocks.size() < 2)
        throw ConfigError("ranking needs at least 2 complete blocks, found " +
                          std::to_string(blocks.size()));

    Eigen::MatrixXd scores(static_cast<Eigen::Index>(methods.size()),
                           static_cast<Eigen::Index>(blocks.size()));
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (std::size_t m = 0; m < methods.size(); ++m)
            scores(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(b)) = blocks[b][m];

    const RankReport report = make_rank_report(methods, scores, alpha);
    if (out_dir.empty()) out_dir = run_dirs[0];
    write_file(out_dir + "/rank_report.json", rank_report_to_json(report));
    std::cout << rank_report_summary(report);
    return 0;
}

int cmd_audit_confidence(const std::string& config_path, int bins, const std::string& out_path,
                         const std::optional<std::uint64_t>& seed) {
    AuditConfig config = audit_config_from_json(read_file(config_path));
    if (seed) config.seed = *seed;
    const Dataset dataset = load_dataset(config.dataset, config.seed);
    const Histogram h =
        confidence_histogram(dataset, config.classifier, bins, mix_seed(config.seed, "audit"));
    write_file(out_path, histogram_to_csv(h));

    long long total = 0;
    for (long long c : h.counts) total += c;
    std::cout << "wrote " << out_path << " (" << total << " samples in " << bins << " bins)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"noisyal: batch active learning under sample noise"};
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("generate", "Generate a synthetic noisy-blob dataset CSV");
    std::string gen_config;
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config, "dataset source JSON")->required();
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->add_option("--seed", gen_seed, "master seed (default 0)");

    auto* run = app.add_subcommand("run", "Run an active-learning experiment grid");
    std::string run_config;
    std::string run_out;
    std::vector<std::string> run_overrides;
    std::optional<std::uint64_t> run_seed;
    std::optional<int> run_workers;
    run->add_option("--config", run_config, "experiment config JSON")->required();
    run->add_option("--out", run_out, "output directory (overrides out_dir)");
    run->add_option("--override", run_overrides, "dotted key=value override (repeatable)");
    run->add_option("--seed", run_seed, "master seed (overrides config)");
    run->add_option("--workers", run_workers, "worker threads (overrides config)");

    auto* rank = app.add_subcommand("rank", "Rank strategies across one or more run directories");
    std::vector<std::string> rank_dirs;
    double rank_alpha = 0.05;
    std::string rank_out;
    rank->add_option("dirs", rank_dirs, "run directories")->required();
    rank->add_option("--alpha", rank_alpha, "significance level, 0.05 or 0.10");
    rank->add_option("--out", rank_out, "directory for rank_report.json (default: first dir)");

    auto* audit = app.add_subcommand("audit-confidence",
                                     "Histogram a classifier's max predicted probability");
    std::string audit_config;
    std::string audit_out;
    int audit_bins = 20;
    std::optional<std::uint64_t> audit_seed;
    audit->add_option("--config", audit_config, "audit config JSON (dataset + classifier)")
        ->required();
    audit->add_option("--out", audit_out, "output histogram CSV path")->required();
    audit->add_option("--bins", audit_bins, "number of bins (default 20)");
    audit->add_option("--seed", audit_seed, "seed (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_generate(gen_config, gen_out, gen_seed);
        if (run->parsed()) return cmd_run(run_config, run_overrides, run_out, run_seed,
                                          run_workers);
        if (rank->parsed()) return cmd_rank(rank_dirs, rank_alpha, rank_out);
        if (audit->parsed())
            return cmd_audit_confidence(audit_config, audit_bins, audit_out, audit_seed);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
