#pragma once

// Statistical comparison of strategies: Friedman rank test across blocks
// (runs), then a Nemenyi post-hoc critical distance to flag which pairs of
// strategies differ significantly.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace noisyal {

// Upper-tail probability of the chi-squared distribution with `dof` degrees
// of freedom. Exposed so tests can pin it against reference values.
double chi_squared_sf(double x, int dof);

// Average-rank ranks of one block: highest score gets rank 1, ties share the
// mean of the ranks they span.
std::vector<double> average_ranks(const std::vector<double>& scores);

struct FriedmanResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::vector<double> mean_ranks; // per method, in input order
};

// scores is methods x blocks, higher = better. Needs >= 3 methods and >= 2
// blocks; all-tied input is legal and yields statistic 0, p-value 1.
FriedmanResult friedman_test(const Eigen::MatrixXd& scores);

// CD = q_alpha(k) * sqrt(k(k+1)/(6N)) from embedded studentized-range
// constants; supports alpha in {0.05, 0.10} and 2 <= k <= 10.
double nemenyi_critical_distance(int n_methods, int n_blocks, double alpha);

struct RankReport {
    std::vector<std::string> methods;
    std::vector<double> mean_ranks;
    double friedman_statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    double critical_distance = 0.0;
    int n_blocks = 0;
    // significant[a][b]: mean-rank gap between methods a and b exceeds the
    // critical distance; symmetric, false on the diagonal.
    std::vector<std::vector<bool>> significant;
};

RankReport make_rank_report(const std::vector<std::string>& methods,
                            const Eigen::MatrixXd& scores, double alpha);

std::string rank_report_to_json(const RankReport& report);
RankReport rank_report_from_json(const std::string& text);

// Plain-text critical-difference summary (methods sorted by mean rank).
std::string rank_report_summary(const RankReport& report);

} // namespace noisyal
