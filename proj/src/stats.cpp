#include "dmmsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dmmsim::stats {

double percentile(std::span<const double> samples, double p) {
  if (samples.empty()) throw StatsError("percentile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw StatsError("percentile: p must be in [0, 1]");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

GroupSummary summary_stats(std::span<const double> samples, std::string label) {
  if (samples.empty()) throw StatsError("summary_stats: empty sample");
  GroupSummary g;
  g.label = std::move(label);
  g.count = samples.size();
  g.sum = std::accumulate(samples.begin(), samples.end(), 0.0);
  g.mean = g.sum / static_cast<double>(g.count);
  if (g.count > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - g.mean) * (x - g.mean);
    g.variance = ss / static_cast<double>(g.count - 1);
  } else {
    g.single_sample = true;
  }
  g.std_dev = std::sqrt(g.variance);
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
  g.min = *lo;
  g.max = *hi;
  g.q25 = percentile(samples, 0.25);
  g.median = percentile(samples, 0.5);
  g.q75 = percentile(samples, 0.75);
  return g;
}

GroupMoments moments_of(std::span<const double> samples, std::string label) {
  const GroupSummary s = summary_stats(samples, std::move(label));
  return GroupMoments{s.label, s.count, s.mean, s.variance};
}

namespace {

AnovaResult finish_anova(double ss_between, double ss_within, double ss_total, int groups,
                         std::size_t total_n, double alpha) {
  AnovaResult r;
  r.ss_between = ss_between;
  r.ss_within = ss_within;
  r.ss_total = ss_total;
  r.df_between = groups - 1;
  r.df_within = static_cast<int>(total_n) - groups;
  r.ms_between = ss_between / r.df_between;
  r.ms_within = ss_within / r.df_within;
  if (r.ms_within > 0.0) {
    r.f_stat = r.ms_between / r.ms_within;
    r.p_value = f_tail_probability(r.f_stat, r.df_between, r.df_within);
  } else if (r.ms_between > 0.0) {
    r.f_stat = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  } else {
    r.f_stat = 0.0;
    r.p_value = 1.0;
  }
  r.f_crit = f_critical_value(alpha, r.df_between, r.df_within);
  return r;
}

void check_groups(std::size_t groups) {
  if (groups < 2) throw StatsError("one_way_anova: need at least 2 groups");
}

}  // namespace

AnovaResult one_way_anova(std::span<const GroupMoments> groups, double alpha) {
  check_groups(groups.size());
  std::size_t total_n = 0;
  double weighted = 0.0;
  for (const auto& g : groups) {
    if (g.count < 2) throw StatsError("one_way_anova: group '" + g.label + "' has fewer than 2 samples");
    if (!(g.variance >= 0.0)) throw StatsError("one_way_anova: negative variance in '" + g.label + "'");
    total_n += g.count;
    weighted += static_cast<double>(g.count) * g.mean;
  }
  const double grand = weighted / static_cast<double>(total_n);
  double ssb = 0.0;
  double ssw = 0.0;
  for (const auto& g : groups) {
    ssb += static_cast<double>(g.count) * (g.mean - grand) * (g.mean - grand);
    ssw += static_cast<double>(g.count - 1) * g.variance;
  }
  return finish_anova(ssb, ssw, ssb + ssw, static_cast<int>(groups.size()), total_n, alpha);
}

AnovaResult one_way_anova(std::span<const std::vector<double>> groups, double alpha) {
  check_groups(groups.size());
  std::size_t total_n = 0;
  double total_sum = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw StatsError("one_way_anova: group with fewer than 2 samples");
    total_n += g.size();
    total_sum += std::accumulate(g.begin(), g.end(), 0.0);
  }
  const double grand = total_sum / static_cast<double>(total_n);
  double ssb = 0.0;
  double ssw = 0.0;
  double sst = 0.0;
  for (const auto& g : groups) {
    const double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
    ssb += static_cast<double>(g.size()) * (mean - grand) * (mean - grand);
    for (double x : g) {
      ssw += (x - mean) * (x - mean);
      sst += (x - grand) * (x - grand);
    }
  }
  return finish_anova(ssb, ssw, sst, static_cast<int>(groups.size()), total_n, alpha);
}

namespace {

// Continued fraction for I_x(a, b), modified Lentz evaluation.
double beta_continued_fraction(double x, double a, double b) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw StatsError("regularized_incomplete_beta: continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0 && b > 0.0)) throw StatsError("regularized_incomplete_beta: a and b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw StatsError("regularized_incomplete_beta: x must be in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
  return 1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_tail_probability(double f, double df1, double df2) {
  if (!(df1 >= 1.0 && df2 >= 1.0)) throw StatsError("f_tail_probability: degrees of freedom must be >= 1");
  if (std::isnan(f) || f < 0.0) throw StatsError("f_tail_probability: f must be >= 0");
  if (f == 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  const double x = df2 / (df2 + df1 * f);
  return regularized_incomplete_beta(x, df2 / 2.0, df1 / 2.0);
}

double f_critical_value(double alpha, double df1, double df2) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("f_critical_value: alpha must be in (0, 1)");
  double lo = 0.0;
  double hi = 1.0;
  while (f_tail_probability(hi, df1, df2) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw StatsError("f_critical_value: no bracket");
  }
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f_tail_probability(mid, df1, df2) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

SensitivityMatrix zscore_matrix(std::vector<std::string> row_labels, std::vector<std::string> col_labels,
                                std::span<const double> values) {
  if (values.size() != row_labels.size() * col_labels.size()) {
    throw StatsError("zscore_matrix: values do not fill a " + std::to_string(row_labels.size()) + "x" +
                     std::to_string(col_labels.size()) + " grid");
  }
  if (values.size() < 2) throw StatsError("zscore_matrix: need at least 2 cells");
  SensitivityMatrix m;
  m.row_labels = std::move(row_labels);
  m.col_labels = std::move(col_labels);
  const GroupSummary s = summary_stats(values);
  m.grand_mean = s.mean;
  m.grand_sd = s.std_dev;
  m.cells.assign(values.size(), 0.0);
  if (!(s.std_dev > 0.0)) {
    m.degenerate = true;
    return m;
  }
  for (std::size_t i = 0; i < values.size(); ++i) m.cells[i] = (values[i] - s.mean) / s.std_dev;
  return m;
}

std::vector<double> equity_returns(std::span<const double> equity) {
  std::vector<double> out;
  for (std::size_t i = 1; i < equity.size(); ++i) {
    if (equity[i - 1] == 0.0) throw StatsError("equity_returns: zero equity at step " + std::to_string(i - 1));
    out.push_back((equity[i] - equity[i - 1]) / equity[i - 1]);
  }
  return out;
}

PerformanceSummary dmm_performance(std::span<const double> equity) {
  if (equity.size() < 2) throw StatsError("dmm_performance: need at least 2 equity points");
  const auto returns = equity_returns(equity);
  const GroupSummary s = summary_stats(returns);
  PerformanceSummary p;
  p.mean_return = s.mean;
  p.volatility = s.std_dev;
  if (p.volatility > 0.0) p.risk_adjusted = p.mean_return / p.volatility;
  return p;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw StatsError("spearman: need two equal-length series, n >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace dmmsim::stats
