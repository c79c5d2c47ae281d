#include "noisyal/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "noisyal/errors.hpp"
#include "noisyal/text.hpp"

namespace noisyal {

namespace {

// Regularized lower incomplete gamma P(a, x) by power series; valid for
// x < a + 1 where the series converges quickly.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by continued fraction (modified
// Lentz); valid for x >= a + 1.
double gamma_q_contfrac(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// q_alpha(k) for the Nemenyi test, k = 2..10: studentized range quantiles at
// infinite degrees of freedom divided by sqrt(2).
constexpr double kNemenyiQ05[] = {1.960, 2.343, 2.569, 2.728, 2.850,
                                  2.949, 3.031, 3.102, 3.164};
constexpr double kNemenyiQ10[] = {1.645, 2.052, 2.291, 2.459, 2.589,
                                  2.693, 2.780, 2.855, 2.920};

} // namespace

double chi_squared_sf(double x, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_squared_sf: dof must be >= 1");
    if (!(x > 0.0)) return 1.0;
    const double a = static_cast<double>(dof) / 2.0;
    const double half = x / 2.0;
    if (half < a + 1.0) return 1.0 - gamma_p_series(a, half);
    return gamma_q_contfrac(a, half);
}

std::vector<double> average_ranks(const std::vector<double>& scores) {
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });

    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        // Positions i..j-1 (0-based) share the average of ranks i+1..j.
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t p = i; p < j; ++p) ranks[order[p]] = shared;
        i = j;
    }
    return ranks;
}

FriedmanResult friedman_test(const Eigen::MatrixXd& scores) {
    const int k = static_cast<int>(scores.rows());
    const int n_blocks = static_cast<int>(scores.cols());
    if (k < 3) throw ConfigError("friedman test needs at least 3 methods, got " +
                                 std::to_string(k));
    if (n_blocks < 2)
        throw ConfigError("friedman test needs at least 2 blocks, got " +
                          std::to_string(n_blocks));
    for (Eigen::Index i = 0; i < scores.rows(); ++i)
        for (Eigen::Index j = 0; j < scores.cols(); ++j)
            if (!std::isfinite(scores(i, j)))
                throw ConfigError("friedman test: non-finite score");

    FriedmanResult result;
    result.mean_ranks.assign(static_cast<std::size_t>(k), 0.0);
    std::vector<double> block(static_cast<std::size_t>(k));
    for (int b = 0; b < n_blocks; ++b) {
        for (int m = 0; m < k; ++m) block[static_cast<std::size_t>(m)] = scores(m, b);
        const std::vector<double> ranks = average_ranks(block);
        for (int m = 0; m < k; ++m)
            result.mean_ranks[static_cast<std::size_t>(m)] += ranks[static_cast<std::size_t>(m)];
    }
    for (double& r : result.mean_ranks) r /= static_cast<double>(n_blocks);

    const double kd = static_cast<double>(k);
    double sum_sq = 0.0;
    for (double r : result.mean_ranks) sum_sq += r * r;
    double stat = (12.0 * n_blocks / (kd * (kd + 1.0))) *
                  (sum_sq - kd * (kd + 1.0) * (kd + 1.0) / 4.0);
    if (stat < 0.0) stat = 0.0; // guard against rounding on all-tied input
    result.statistic = stat;
    result.p_value = chi_squared_sf(stat, k - 1);
    return result;
}

double nemenyi_critical_distance(int n_methods, int n_blocks, double alpha) {
    if (n_methods < 2 || n_methods > 10)
        throw ConfigError("nemenyi parameter error: n_methods must be in [2, 10], got " +
                          std::to_string(n_methods));
    if (n_blocks < 1)
        throw ConfigError("nemenyi parameter error: n_blocks must be >= 1");
    const double* table = nullptr;
    if (std::abs(alpha - 0.05) < 1e-9) {
        table = kNemenyiQ05;
    } else if (std::abs(alpha - 0.10) < 1e-9) {
        table = kNemenyiQ10;
    } else {
        throw ConfigError("nemenyi parameter error: alpha must be 0.05 or 0.10, got " +
                          format_double(alpha));
    }
    const double q = table[n_methods - 2];
    const double kd = static_cast<double>(n_methods);
    return q * std::sqrt(kd * (kd + 1.0) / (6.0 * static_cast<double>(n_blocks)));
}

RankReport make_rank_report(const std::vector<std::string>& methods,
                            const Eigen::MatrixXd& scores, double alpha) {
    if (static_cast<Eigen::Index>(methods.size()) != scores.rows())
        throw std::invalid_argument("make_rank_report: method names do not match score rows");

    const FriedmanResult fr = friedman_test(scores);
    RankReport report;
    report.methods = methods;
    report.mean_ranks = fr.mean_ranks;
    report.friedman_statistic = fr.statistic;
    report.p_value = fr.p_value;
    report.alpha = alpha;
    report.n_blocks = static_cast<int>(scores.cols());
    report.critical_distance = nemenyi_critical_distance(static_cast<int>(methods.size()),
                                                         report.n_blocks, alpha);
    const std::size_t k = methods.size();
    report.significant.assign(k, std::vector<bool>(k, false));
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = a + 1; b < k; ++b) {
            const bool flag =
                std::abs(report.mean_ranks[a] - report.mean_ranks[b]) > report.critical_distance;
            report.significant[a][b] = flag;
            report.significant[b][a] = flag;
        }
    }
    return report;
}

std::string rank_report_to_json(const RankReport& report) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["methods"] = report.methods;
    j["mean_ranks"] = report.mean_ranks;
    j["friedman_statistic"] = report.friedman_statistic;
    j["p_value"] = report.p_value;
    j["alpha"] = report.alpha;
    j["critical_distance"] = report.critical_distance;
    j["n_blocks"] = report.n_blocks;
    j["significant"] = report.significant;
    return j.dump(2) + "\n";
}

RankReport rank_report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("rank report: invalid JSON: ") + e.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != 1)
        throw ConfigError("rank report: unsupported schema version");
    RankReport report;
    try {
        report.methods = j.at("methods").get<std::vector<std::string>>();
        report.mean_ranks = j.at("mean_ranks").get<std::vector<double>>();
        report.friedman_statistic = j.at("friedman_statistic").get<double>();
        report.p_value = j.at("p_value").get<double>();
        report.alpha = j.at("alpha").get<double>();
        report.critical_distance = j.at("critical_distance").get<double>();
        report.n_blocks = j.at("n_blocks").get<int>();
        report.significant = j.at("significant").get<std::vector<std::vector<bool>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("rank report: bad field: ") + e.what());
    }
    return report;
}

std::string rank_report_summary(const RankReport& report) {
    std::vector<std::size_t> order(report.methods.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (report.mean_ranks[a] != report.mean_ranks[b])
            return report.mean_ranks[a] < report.mean_ranks[b];
        return report.methods[a] < report.methods[b];
    });

    std::string out;
    out += "friedman chi2 = " + format_double(report.friedman_statistic) +
           ", p = " + format_double(report.p_value) + " (" +
           std::to_string(report.methods.size()) + " methods, " +
           std::to_string(report.n_blocks) + " blocks)\n";
    out += "nemenyi critical distance at alpha " + format_double(report.alpha) + " = " +
           format_double(report.critical_distance) + "\n";
    for (std::size_t i : order)
        out += "  rank " + format_double(report.mean_ranks[i]) + "  " + report.methods[i] + "\n";

    std::string pairs;
    for (std::size_t a = 0; a < report.methods.size(); ++a) {
        for (std::size_t b = a + 1; b < report.methods.size(); ++b) {
            if (!report.significant[a][b]) continue;
            const bool a_better = report.mean_ranks[a] < report.mean_ranks[b];
            const std::size_t good = a_better ? a : b;
            const std::size_t bad = a_better ? b : a;
            pairs += "  " + report.methods[good] + " beats " + report.methods[bad] + "\n";
        }
    }
    if (pairs.empty()) {
        out += "no significant pairs\n";
    } else {
        out += "significant pairs:\n" + pairs;
    }
    return out;
}

} // namespace noisyal
