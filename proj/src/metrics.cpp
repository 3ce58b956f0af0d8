#include "dmmsim/metrics.hpp"

#include <cmath>
#include <string>

namespace dmmsim {

double ep_ratio(std::span<const Order> orders, const std::function<bool(const Order&)>& include) {
  std::size_t total = 0;
  std::size_t executed = 0;
  for (const Order& o : orders) {
    if (include && !include(o)) continue;
    ++total;
    if (o.remaining_quantity == 0) ++executed;
  }
  if (total == 0) throw MetricError("ep_ratio: no submitted orders");
  return static_cast<double>(executed) / static_cast<double>(total);
}

double quoted_spread_tw(std::span<const BookSnapshot> quotes) {
  double weighted = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const BookSnapshot& q = quotes[i];
    if (!q.two_sided()) continue;
    // Each snapshot holds until the next one; the last holds for one unit.
    const double dt = i + 1 < quotes.size() ? static_cast<double>(quotes[i + 1].time - q.time) : 1.0;
    weighted += dt * (q.best_ask->to_double() - q.best_bid->to_double()) / *q.midprice;
    weight += dt;
  }
  if (weight == 0.0) throw MetricError("quoted_spread_tw: no two-sided snapshot");
  return weighted / weight;
}

double depth_best_tw(std::span<const BookSnapshot> quotes) {
  if (quotes.empty()) throw MetricError("depth_best_tw: empty quote tape");
  double weighted = 0.0;
  double weight = 0.0;
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    const double dt =
        i + 1 < quotes.size() ? static_cast<double>(quotes[i + 1].time - quotes[i].time) : 1.0;
    weighted += dt * quotes[i].depth_value_at_best;
    weight += dt;
  }
  return weighted / weight;
}

namespace {

std::optional<double> mid_at(std::span<const BookSnapshot> quotes, Timestamp t) {
  if (t < 0 || t >= static_cast<Timestamp>(quotes.size())) return std::nullopt;
  return quotes[static_cast<std::size_t>(t)].midprice;
}

}  // namespace

std::vector<SpreadTerm> spread_terms(std::span<const TradeRecord> trades,
                                     std::span<const BookSnapshot> quotes, int k) {
  if (k < 1) throw std::invalid_argument("spread horizon k must be >= 1");
  std::vector<SpreadTerm> out;
  for (const TradeRecord& tr : trades) {
    const auto m_t = mid_at(quotes, tr.trade_time);
    const auto m_k = mid_at(quotes, tr.trade_time + k);
    if (!m_t || !m_k) continue;
    const double q = tr.sign();
    const double p = tr.matched_price.to_double();
    SpreadTerm term;
    term.weight = notional(tr.matched_price, tr.matched_quantity);
    term.effective = q * (p - *m_t) / *m_t;
    term.realized = q * (p - *m_k) / *m_t;
    term.adverse = q * (*m_k - *m_t) / *m_t;
    out.push_back(term);
  }
  return out;
}

namespace {

double value_weighted(const std::vector<SpreadTerm>& terms, double SpreadTerm::*field, const char* name) {
  if (terms.empty()) throw MetricError(std::string(name) + ": no eligible trades");
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : terms) {
    num += t.weight * (t.*field);
    den += t.weight;
  }
  return num / den;
}

}  // namespace

double realized_spread_k(std::span<const TradeRecord> trades, std::span<const BookSnapshot> quotes, int k) {
  return value_weighted(spread_terms(trades, quotes, k), &SpreadTerm::realized, "realized_spread_k");
}

double adverse_selection_k(std::span<const TradeRecord> trades, std::span<const BookSnapshot> quotes, int k) {
  return value_weighted(spread_terms(trades, quotes, k), &SpreadTerm::adverse, "adverse_selection_k");
}

std::vector<std::optional<double>> price_efficiency_series(std::span<const BookSnapshot> quotes,
                                                           std::span<const double> fundamental) {
  if (fundamental.size() < quotes.size()) {
    throw std::invalid_argument("price_efficiency_series: fundamental path shorter than quote tape");
  }
  std::vector<std::optional<double>> out;
  out.reserve(quotes.size());
  for (std::size_t i = 0; i < quotes.size(); ++i) {
    if (quotes[i].midprice) {
      out.push_back(std::abs(*quotes[i].midprice - fundamental[i]) / fundamental[i]);
    } else {
      out.push_back(std::nullopt);
    }
  }
  return out;
}

std::optional<Timestamp> shock_recovery_time(std::span<const std::optional<double>> pe_series,
                                             const ShockSpec& shock) {
  shock.validate();
  if (shock.shock_time >= static_cast<Timestamp>(pe_series.size())) {
    throw MetricError("shock_recovery_time: shock at " + std::to_string(shock.shock_time) +
                      " is beyond the series");
  }
  for (std::size_t i = static_cast<std::size_t>(shock.shock_time); i < pe_series.size(); ++i) {
    if (pe_series[i] && *pe_series[i] < shock.convergence_band) {
      return static_cast<Timestamp>(i) - shock.shock_time;
    }
  }
  return std::nullopt;
}

}  // namespace dmmsim
