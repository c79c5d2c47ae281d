#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "noisyal/errors.hpp"
#include "noisyal/harness.hpp"
#include "noisyal/text.hpp"

namespace noisyal {

namespace {

using nlohmann::json;

constexpr int kRunLogSchemaVersion = 1;
constexpr const char* kRecordsHeader =
    "strategy,repeat,fold,iteration,batch,test_accuracy,batch_nsr,cumulative_noisy,batch_rba,"
    "truncated";
constexpr const char* kTimingsHeader = "strategy,repeat,fold,iteration,duration_seconds";

[[noreturn]] void bad_key(const std::string& context, const std::string& key,
                          const std::string& why) {
    throw ConfigError("config: " + context + "." + key + " " + why);
}

void expect_object(const json& j, const std::string& context) {
    if (!j.is_object()) throw ConfigError("config: " + context + " must be a JSON object");
}

void reject_unknown_keys(const json& obj, const std::string& context,
                         std::initializer_list<const char*> known) {
    for (const auto& item : obj.items()) {
        bool ok = false;
        for (const char* k : known)
            if (item.key() == k) ok = true;
        if (!ok)
            throw ConfigError("config: unknown key '" + item.key() + "' in " + context);
    }
}

template <typename T>
T get_required(const json& obj, const std::string& context, const char* key) {
    if (!obj.contains(key)) bad_key(context, key, "is required");
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad_key(context, key, "has the wrong type");
    }
}

template <typename T>
T get_optional(const json& obj, const std::string& context, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad_key(context, key, "has the wrong type");
    }
}

DatasetSource dataset_from_json(const json& d) {
    expect_object(d, "dataset");
    DatasetSource src;
    src.type = get_required<std::string>(d, "dataset", "type");
    if (src.type == "generator") {
        reject_unknown_keys(d, "dataset",
                            {"type", "n_samples", "n_features", "n_classes", "n_blobs",
                             "n_noisy_blobs", "blob_std", "center_box_halfwidth",
                             "min_center_separation"});
        BlobConfig& g = src.generator;
        g.n_samples = get_required<int>(d, "dataset", "n_samples");
        g.n_features = get_required<int>(d, "dataset", "n_features");
        g.n_classes = get_required<int>(d, "dataset", "n_classes");
        g.n_blobs = get_required<int>(d, "dataset", "n_blobs");
        g.n_noisy_blobs = get_required<int>(d, "dataset", "n_noisy_blobs");
        g.blob_std = get_optional<double>(d, "dataset", "blob_std", g.blob_std);
        g.center_box_halfwidth =
            get_optional<double>(d, "dataset", "center_box_halfwidth", g.center_box_halfwidth);
        g.min_center_separation = get_optional<double>(d, "dataset", "min_center_separation",
                                                       g.min_center_separation);
    } else if (src.type == "csv") {
        reject_unknown_keys(d, "dataset", {"type", "path", "label_column", "noise_column"});
        src.csv_path = get_required<std::string>(d, "dataset", "path");
        src.label_column =
            get_optional<std::string>(d, "dataset", "label_column", src.label_column);
        if (d.contains("noise_column"))
            src.noise_column = get_required<std::string>(d, "dataset", "noise_column");
    } else {
        throw ConfigError("config: dataset.type must be 'generator' or 'csv', got '" + src.type +
                          "'");
    }
    return src;
}

json dataset_to_json(const DatasetSource& src) {
    json d;
    d["type"] = src.type;
    if (src.type == "generator") {
        d["n_samples"] = src.generator.n_samples;
        d["n_features"] = src.generator.n_features;
        d["n_classes"] = src.generator.n_classes;
        d["n_blobs"] = src.generator.n_blobs;
        d["n_noisy_blobs"] = src.generator.n_noisy_blobs;
        d["blob_std"] = src.generator.blob_std;
        d["center_box_halfwidth"] = src.generator.center_box_halfwidth;
        d["min_center_separation"] = src.generator.min_center_separation;
    } else {
        d["path"] = src.csv_path;
        d["label_column"] = src.label_column;
        if (src.noise_column) d["noise_column"] = *src.noise_column;
    }
    return d;
}

ClassifierSpec classifier_from_json(const json& c) {
    expect_object(c, "classifier");
    reject_unknown_keys(c, "classifier", {"kind", "mlp", "forest"});
    ClassifierSpec spec;
    spec.kind = classifier_kind_from_string(
        get_optional<std::string>(c, "classifier", "kind", to_string(spec.kind)));
    if (c.contains("mlp")) {
        const json& m = c.at("mlp");
        expect_object(m, "classifier.mlp");
        reject_unknown_keys(m, "classifier.mlp",
                            {"hidden_sizes", "learning_rate", "epochs", "batch_size"});
        spec.mlp.hidden_sizes = get_optional<std::vector<int>>(m, "classifier.mlp", "hidden_sizes",
                                                               spec.mlp.hidden_sizes);
        spec.mlp.learning_rate =
            get_optional<double>(m, "classifier.mlp", "learning_rate", spec.mlp.learning_rate);
        spec.mlp.epochs = get_optional<int>(m, "classifier.mlp", "epochs", spec.mlp.epochs);
        spec.mlp.batch_size =
            get_optional<int>(m, "classifier.mlp", "batch_size", spec.mlp.batch_size);
    }
    if (c.contains("forest")) {
        const json& f = c.at("forest");
        expect_object(f, "classifier.forest");
        reject_unknown_keys(
            f, "classifier.forest",
            {"n_trees", "max_depth", "min_samples_leaf", "feature_rule", "bootstrap"});
        spec.forest.n_trees =
            get_optional<int>(f, "classifier.forest", "n_trees", spec.forest.n_trees);
        spec.forest.max_depth =
            get_optional<int>(f, "classifier.forest", "max_depth", spec.forest.max_depth);
        spec.forest.min_samples_leaf = get_optional<int>(f, "classifier.forest",
                                                         "min_samples_leaf",
                                                         spec.forest.min_samples_leaf);
        spec.forest.feature_rule = get_optional<std::string>(f, "classifier.forest",
                                                             "feature_rule",
                                                             spec.forest.feature_rule);
        spec.forest.bootstrap =
            get_optional<bool>(f, "classifier.forest", "bootstrap", spec.forest.bootstrap);
    }
    return spec;
}

json classifier_to_json(const ClassifierSpec& spec) {
    json c;
    c["kind"] = to_string(spec.kind);
    c["mlp"] = {{"hidden_sizes", spec.mlp.hidden_sizes},
                {"learning_rate", spec.mlp.learning_rate},
                {"epochs", spec.mlp.epochs},
                {"batch_size", spec.mlp.batch_size}};
    c["forest"] = {{"n_trees", spec.forest.n_trees},
                   {"max_depth", spec.forest.max_depth},
                   {"min_samples_leaf", spec.forest.min_samples_leaf},
                   {"feature_rule", spec.forest.feature_rule},
                   {"bootstrap", spec.forest.bootstrap}};
    return c;
}

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

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

int parse_int(const std::string& s, const std::string& what) {
    int value = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("run log: bad " + what + " value '" + s + "'");
    return value;
}

double parse_real(const std::string& s, const std::string& what) {
    const std::optional<double> v = parse_double(s);
    if (!v) throw ConfigError("run log: bad " + what + " value '" + s + "'");
    return *v;
}

} // namespace

ExperimentConfig experiment_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    expect_object(j, "top level");
    reject_unknown_keys(j, "top level",
                        {"dataset", "classifier", "strategies", "n_iterations", "batch_size",
                         "beta", "n_repeats", "n_folds", "n_seed_per_class", "seed",
                         "iconfidence_mode", "kcenter_embed_dim", "workers", "out_dir"});

    ExperimentConfig c;
    if (!j.contains("dataset")) throw ConfigError("config: dataset is required");
    c.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("classifier")) c.classifier = classifier_from_json(j.at("classifier"));
    c.strategies = get_required<std::vector<std::string>>(j, "top level", "strategies");
    c.n_iterations = get_required<int>(j, "top level", "n_iterations");
    c.batch_size = get_required<int>(j, "top level", "batch_size");
    c.beta = get_optional<int>(j, "top level", "beta", c.beta);
    c.n_repeats = get_optional<int>(j, "top level", "n_repeats", c.n_repeats);
    c.n_folds = get_optional<int>(j, "top level", "n_folds", c.n_folds);
    c.n_seed_per_class = get_optional<int>(j, "top level", "n_seed_per_class", c.n_seed_per_class);
    c.seed = get_optional<std::uint64_t>(j, "top level", "seed", c.seed);
    c.iconfidence_mode = iconfidence_mode_from_string(get_optional<std::string>(
        j, "top level", "iconfidence_mode", to_string(c.iconfidence_mode)));
    c.kcenter_embed_dim = get_optional<int>(j, "top level", "kcenter_embed_dim",
                                            c.kcenter_embed_dim);
    c.workers = get_optional<int>(j, "top level", "workers", c.workers);
    c.out_dir = get_optional<std::string>(j, "top level", "out_dir", c.out_dir);
    c.validate();
    return c;
}

DatasetSource dataset_source_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    DatasetSource src = dataset_from_json(j);
    src.validate();
    return src;
}

std::string dataset_source_to_json(const DatasetSource& source) {
    return dataset_to_json(source).dump(2) + "\n";
}

AuditConfig audit_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    expect_object(j, "top level");
    reject_unknown_keys(j, "top level", {"dataset", "classifier", "seed"});
    AuditConfig c;
    if (!j.contains("dataset")) throw ConfigError("config: dataset is required");
    c.dataset = dataset_from_json(j.at("dataset"));
    if (j.contains("classifier")) c.classifier = classifier_from_json(j.at("classifier"));
    c.seed = get_optional<std::uint64_t>(j, "top level", "seed", c.seed);
    c.dataset.validate();
    c.classifier.validate();
    return c;
}

std::string experiment_config_to_json(const ExperimentConfig& config) {
    json j;
    j["dataset"] = dataset_to_json(config.dataset);
    j["classifier"] = classifier_to_json(config.classifier);
    j["strategies"] = config.strategies;
    j["n_iterations"] = config.n_iterations;
    j["batch_size"] = config.batch_size;
    j["beta"] = config.beta;
    j["n_repeats"] = config.n_repeats;
    j["n_folds"] = config.n_folds;
    j["n_seed_per_class"] = config.n_seed_per_class;
    j["seed"] = config.seed;
    j["iconfidence_mode"] = to_string(config.iconfidence_mode);
    j["kcenter_embed_dim"] = config.kcenter_embed_dim;
    j["workers"] = config.workers;
    if (!config.out_dir.empty()) j["out_dir"] = config.out_dir;
    return j.dump(2) + "\n";
}

void persist_runlog(const RunLog& log, const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw RunError("cannot create directory '" + directory + "': " + ec.message());

    write_file(directory + "/config.json", experiment_config_to_json(log.config));

    std::string records = std::string(kRecordsHeader) + "\n";
    std::string timings = std::string(kTimingsHeader) + "\n";
    for (const IterationRecord& r : log.records) {
        records += r.strategy;
        records += ',' + std::to_string(r.repeat);
        records += ',' + std::to_string(r.fold);
        records += ',' + std::to_string(r.iteration);
        records += ',';
        for (std::size_t i = 0; i < r.batch.size(); ++i) {
            if (i) records += ';';
            records += std::to_string(r.batch[i]);
        }
        records += ',' + format_double(r.test_accuracy);
        records += ',';
        if (r.batch_nsr) records += format_double(*r.batch_nsr);
        records += ',';
        if (r.cumulative_noisy) records += std::to_string(*r.cumulative_noisy);
        records += ',' + format_double(r.batch_rba);
        records += ',';
        records += r.truncated ? '1' : '0';
        records += '\n';

        timings += r.strategy;
        timings += ',' + std::to_string(r.repeat);
        timings += ',' + std::to_string(r.fold);
        timings += ',' + std::to_string(r.iteration);
        timings += ',' + format_double(r.duration_seconds);
        timings += '\n';
    }
    write_file(directory + "/records.csv", records);
    write_file(directory + "/timings.csv", timings);

    json agg;
    agg["schema_version"] = kRunLogSchemaVersion;
    agg["cells"] = json::array();
    for (const CellStatus& c : log.cells)
        agg["cells"].push_back({{"strategy", c.strategy},
                                {"repeat", c.repeat},
                                {"fold", c.fold},
                                {"ok", c.ok},
                                {"error", c.error}});
    agg["strategies"] = json::array();
    for (const StrategyAggregate& a : log.aggregates) {
        json s;
        s["strategy"] = a.strategy;
        s["n_runs"] = a.n_runs;
        s["auc_mean"] = a.auc_mean;
        s["auc_std"] = a.auc_std;
        s["auc_q10"] = a.auc_q10;
        s["auc_q90"] = a.auc_q90;
        s["accuracy_q10_pooled"] = a.accuracy_q10_pooled;
        s["accuracy_q90_pooled"] = a.accuracy_q90_pooled;
        s["nsr_mean"] = a.nsr_mean ? json(*a.nsr_mean) : json(nullptr);
        s["nsr_std"] = a.nsr_std ? json(*a.nsr_std) : json(nullptr);
        s["rba_mean"] = a.rba_mean;
        s["rba_std"] = a.rba_std;
        agg["strategies"].push_back(std::move(s));
    }
    write_file(directory + "/aggregates.json", agg.dump(2) + "\n");
}

RunLog load_runlog(const std::string& directory) {
    const std::string config_path = directory + "/config.json";
    if (!std::filesystem::exists(config_path))
        throw ConfigError("run directory '" + directory + "' not found (missing config.json)");

    RunLog log;
    log.config = experiment_config_from_json(read_file(config_path));

    // records.csv
    {
        std::istringstream in(read_file(directory + "/records.csv"));
        std::string line;
        if (!std::getline(in, line) || line != kRecordsHeader)
            throw ConfigError("records.csv: unsupported schema (expected header '" +
                              std::string(kRecordsHeader) + "')");
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = split(line, ',');
            if (cells.size() != 10)
                throw ConfigError("records.csv: expected 10 cells, found " +
                                  std::to_string(cells.size()));
            IterationRecord r;
            r.strategy = cells[0];
            r.repeat = parse_int(cells[1], "repeat");
            r.fold = parse_int(cells[2], "fold");
            r.iteration = parse_int(cells[3], "iteration");
            if (!cells[4].empty())
                for (const std::string& id : split(cells[4], ';'))
                    r.batch.push_back(parse_int(id, "batch index"));
            r.test_accuracy = parse_real(cells[5], "test_accuracy");
            if (!cells[6].empty()) r.batch_nsr = parse_real(cells[6], "batch_nsr");
            if (!cells[7].empty()) r.cumulative_noisy = parse_int(cells[7], "cumulative_noisy");
            r.batch_rba = parse_real(cells[8], "batch_rba");
            if (cells[9] != "0" && cells[9] != "1")
                throw ConfigError("records.csv: bad truncated flag '" + cells[9] + "'");
            r.truncated = cells[9] == "1";
            log.records.push_back(std::move(r));
        }
    }

    // timings.csv: durations rejoin their records by (strategy, repeat, fold,
    // iteration).
    {
        std::istringstream in(read_file(directory + "/timings.csv"));
        std::string line;
        if (!std::getline(in, line) || line != kTimingsHeader)
            throw ConfigError("timings.csv: unsupported schema (expected header '" +
                              std::string(kTimingsHeader) + "')");
        std::map<std::tuple<std::string, int, int, int>, double> durations;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const std::vector<std::string> cells = split(line, ',');
            if (cells.size() != 5)
                throw ConfigError("timings.csv: expected 5 cells, found " +
                                  std::to_string(cells.size()));
            durations[{cells[0], parse_int(cells[1], "repeat"), parse_int(cells[2], "fold"),
                       parse_int(cells[3], "iteration")}] =
                parse_real(cells[4], "duration_seconds");
        }
        if (durations.size() != log.records.size())
            throw ConfigError("timings.csv: row count does not match records.csv");
        for (IterationRecord& r : log.records) {
            const auto it = durations.find({r.strategy, r.repeat, r.fold, r.iteration});
            if (it == durations.end())
                throw ConfigError("timings.csv: no duration for a records.csv row");
            r.duration_seconds = it->second;
        }
    }

    // aggregates.json
    {
        json agg;
        try {
            agg = json::parse(read_file(directory + "/aggregates.json"));
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("aggregates.json: invalid JSON: ") + e.what());
        }
        if (!agg.contains("schema_version") ||
            agg["schema_version"].get<int>() != kRunLogSchemaVersion)
            throw ConfigError("aggregates.json: unsupported schema version");
        try {
            for (const json& c : agg.at("cells")) {
                CellStatus cell;
                cell.strategy = c.at("strategy").get<std::string>();
                cell.repeat = c.at("repeat").get<int>();
                cell.fold = c.at("fold").get<int>();
                cell.ok = c.at("ok").get<bool>();
                cell.error = c.at("error").get<std::string>();
                log.cells.push_back(std::move(cell));
            }
            for (const json& s : agg.at("strategies")) {
                StrategyAggregate a;
                a.strategy = s.at("strategy").get<std::string>();
                a.n_runs = s.at("n_runs").get<int>();
                a.auc_mean = s.at("auc_mean").get<double>();
                a.auc_std = s.at("auc_std").get<double>();
                a.auc_q10 = s.at("auc_q10").get<double>();
                a.auc_q90 = s.at("auc_q90").get<double>();
                a.accuracy_q10_pooled = s.at("accuracy_q10_pooled").get<double>();
                a.accuracy_q90_pooled = s.at("accuracy_q90_pooled").get<double>();
                if (!s.at("nsr_mean").is_null()) a.nsr_mean = s.at("nsr_mean").get<double>();
                if (!s.at("nsr_std").is_null()) a.nsr_std = s.at("nsr_std").get<double>();
                a.rba_mean = s.at("rba_mean").get<double>();
                a.rba_std = s.at("rba_std").get<double>();
                log.aggregates.push_back(std::move(a));
            }
        } catch (const json::exception& e) {
            throw ConfigError(std::string("aggregates.json: bad field: ") + e.what());
        }
    }
    return log;
}

} // namespace noisyal
