#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "noisyal/dataset.hpp"
#include "noisyal/errors.hpp"
#include "noisyal/text.hpp"

namespace noisyal {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string strip(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_feature(const std::string& raw, std::size_t row, const std::string& column) {
    const std::string s = strip(raw);
    const std::optional<double> value = parse_double(s);
    if (!value) {
        throw ConfigError("csv parse error at row " + std::to_string(row) + ", column '" + column +
                          "': '" + s + "' is not a finite number");
    }
    return *value;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& label_column,
                 const std::optional<std::string>& noise_column) {
    std::ifstream in(path);
    if (!in) throw ConfigError("csv: cannot open file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ConfigError("csv: file '" + path + "' is empty");

    std::vector<std::string> header = split_line(line);
    for (auto& h : header) h = strip(h);

    int label_col = -1;
    int noise_col = -1;
    std::vector<int> feature_cols;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == label_column) {
            label_col = static_cast<int>(j);
        } else if (noise_column && header[j] == *noise_column) {
            noise_col = static_cast<int>(j);
        } else {
            feature_cols.push_back(static_cast<int>(j));
        }
    }
    if (label_col < 0)
        throw ConfigError("csv schema error: label column '" + label_column + "' not found in '" +
                          path + "'");
    if (noise_column && noise_col < 0)
        throw ConfigError("csv schema error: noise column '" + *noise_column + "' not found in '" +
                          path + "'");
    if (feature_cols.empty())
        throw ConfigError("csv schema error: no feature columns in '" + path + "'");

    std::vector<std::vector<double>> feature_rows;
    std::vector<std::string> raw_labels;
    std::vector<std::uint8_t> flags;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (strip(line).empty()) continue;
        std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            throw ConfigError("csv parse error at row " + std::to_string(row) + ": expected " +
                              std::to_string(header.size()) + " cells, found " +
                              std::to_string(cells.size()));

        std::vector<double> feats;
        feats.reserve(feature_cols.size());
        for (int j : feature_cols)
            feats.push_back(parse_feature(cells[static_cast<std::size_t>(j)], row,
                                          header[static_cast<std::size_t>(j)]));
        feature_rows.push_back(std::move(feats));
        raw_labels.push_back(strip(cells[static_cast<std::size_t>(label_col)]));

        if (noise_col >= 0) {
            const std::string v = strip(cells[static_cast<std::size_t>(noise_col)]);
            if (v == "0" || v == "false") {
                flags.push_back(0);
            } else if (v == "1" || v == "true") {
                flags.push_back(1);
            } else {
                throw ConfigError("csv parse error at row " + std::to_string(row) + ", column '" +
                                  *noise_column + "': '" + v + "' is not a 0/1 flag");
            }
        }
    }
    if (feature_rows.empty()) throw ConfigError("csv: file '" + path + "' has no data rows");

    // Re-encode labels to [0, n_classes) by sorted order of distinct values.
    std::map<std::string, int> mapping;
    for (const auto& l : raw_labels) mapping.emplace(l, 0);
    int next = 0;
    for (auto& [raw, id] : mapping) id = next++;
    if (next < 2) throw ConfigError("csv: file '" + path + "' has fewer than 2 distinct labels");

    Dataset ds;
    ds.features.resize(static_cast<Eigen::Index>(feature_rows.size()),
                       static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t i = 0; i < feature_rows.size(); ++i)
        for (std::size_t j = 0; j < feature_rows[i].size(); ++j)
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                feature_rows[i][j];
    ds.labels.reserve(raw_labels.size());
    for (const auto& l : raw_labels) ds.labels.push_back(mapping.at(l));
    if (noise_col >= 0) ds.noise_flags = std::move(flags);
    ds.n_classes = next;

    std::string name = path;
    const std::size_t slash = name.find_last_of('/');
    if (slash != std::string::npos) name = name.substr(slash + 1);
    name += "[";
    bool first = true;
    for (const auto& [raw, id] : mapping) {
        if (!first) name += ",";
        name += raw + "=" + std::to_string(id);
        first = false;
    }
    name += "]";
    ds.name = std::move(name);

    ds.validate();
    return ds;
}

void save_csv(const Dataset& dataset, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("csv: cannot write file '" + path + "'");

    for (int j = 0; j < dataset.n_features(); ++j) out << "f" << j << ",";
    out << "label";
    if (dataset.noise_flags) out << ",noise_flag";
    out << "\n";

    for (int i = 0; i < dataset.n_samples(); ++i) {
        for (int j = 0; j < dataset.n_features(); ++j)
            out << format_double(dataset.features(i, j)) << ",";
        out << dataset.labels[static_cast<std::size_t>(i)];
        if (dataset.noise_flags)
            out << "," << static_cast<int>((*dataset.noise_flags)[static_cast<std::size_t>(i)]);
        out << "\n";
    }
    if (!out) throw ConfigError("csv: failed writing '" + path + "'");
}

} // namespace noisyal
