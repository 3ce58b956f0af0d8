#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dmmsim::stats {

class StatsError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct GroupSummary {
  std::string label;
  std::size_t count{0};
  double sum{0.0};
  double mean{0.0};
  /// Sample variance (n - 1 denominator); 0 for a single sample.
  double variance{0.0};
  double std_dev{0.0};
  double min{0.0};
  double q25{0.0};
  double median{0.0};
  double q75{0.0};
  double max{0.0};
  /// Set when count == 1 and the dispersion figures are conventional zeros.
  bool single_sample{false};
};

GroupSummary summary_stats(std::span<const double> samples, std::string label = {});

/// Linear interpolation between closest ranks, p in [0, 1].
double percentile(std::span<const double> samples, double p);

/// Sufficient statistics of one ANOVA group.
struct GroupMoments {
  std::string label;
  std::size_t count{0};
  double mean{0.0};
  double variance{0.0};
};

GroupMoments moments_of(std::span<const double> samples, std::string label = {});

struct AnovaResult {
  double ss_between{0.0};
  double ss_within{0.0};
  double ss_total{0.0};
  int df_between{0};
  int df_within{0};
  double ms_between{0.0};
  double ms_within{0.0};
  double f_stat{0.0};
  double p_value{1.0};
  double f_crit{0.0};
};

AnovaResult one_way_anova(std::span<const GroupMoments> groups, double alpha = 0.05);
AnovaResult one_way_anova(std::span<const std::vector<double>> groups, double alpha = 0.05);

/// Regularized incomplete beta I_x(a, b).
double regularized_incomplete_beta(double x, double a, double b);

/// P(F_{df1, df2} > f).
double f_tail_probability(double f, double df1, double df2);

/// f with P(F_{df1, df2} > f) = alpha.
double f_critical_value(double alpha, double df1, double df2);

struct SensitivityMatrix {
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  /// Row-major z-scores.
  std::vector<double> cells;
  double grand_mean{0.0};
  double grand_sd{0.0};
  bool degenerate{false};

  double at(std::size_t row, std::size_t col) const { return cells.at(row * col_labels.size() + col); }
};

/// z-scores pooled over every cell of the grid; `values` is row-major.
SensitivityMatrix zscore_matrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                std::span<const double> values);

struct PerformanceSummary {
  double mean_return{0.0};
  double volatility{0.0};
  /// mean / volatility; empty when volatility is zero.
  std::optional<double> risk_adjusted;
};

/// Simple per-step returns of an equity series.
std::vector<double> equity_returns(std::span<const double> equity);
PerformanceSummary dmm_performance(std::span<const double> equity);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace dmmsim::stats
