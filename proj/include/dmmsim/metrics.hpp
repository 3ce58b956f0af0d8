#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "dmmsim/market_dynamics.hpp"
#include "dmmsim/order_book.hpp"

namespace dmmsim {

/// Per-timestamp post-matching snapshots; entry k has time k.
using QuoteTape = std::vector<BookSnapshot>;
using TradeTape = std::vector<TradeRecord>;

class MetricError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct MetricsReport {
  std::optional<double> ep_ratio;
  std::optional<double> qs;
  std::optional<double> db;
  std::optional<double> rs5;
  std::optional<double> rs10;
  std::optional<double> as5;
  std::optional<double> as10;
  std::vector<std::optional<double>> pe_series;
  std::optional<Timestamp> recovery_timestamps;
};

/// Executed orders over all submitted orders. `include` filters the order log
/// (e.g. to drop DMM quotes); throws MetricError when nothing remains.
double ep_ratio(std::span<const Order> orders,
                const std::function<bool(const Order&)>& include = {});

/// Time-weighted mean of (a - b) / m over two-sided snapshots.
double quoted_spread_tw(std::span<const BookSnapshot> quotes);

/// Time-weighted mean of the value resting at the best bid and ask.
double depth_best_tw(std::span<const BookSnapshot> quotes);

/// Value-weighted q (p - m_{t+k}) / m_t.
double realized_spread_k(std::span<const TradeRecord> trades, std::span<const BookSnapshot> quotes, int k);

/// Value-weighted q (m_{t+k} - m_t) / m_t.
double adverse_selection_k(std::span<const TradeRecord> trades, std::span<const BookSnapshot> quotes, int k);

/// Per-trade terms behind the two value-weighted averages above. Trades
/// without both midprices, or with t + k past the tape, are dropped.
struct SpreadTerm {
  double weight{0.0};
  double effective{0.0};
  double realized{0.0};
  double adverse{0.0};
};
std::vector<SpreadTerm> spread_terms(std::span<const TradeRecord> trades,
                                     std::span<const BookSnapshot> quotes, int k);

/// |m_t - F_t| / F_t per timestamp; empty when the book is one-sided.
std::vector<std::optional<double>> price_efficiency_series(std::span<const BookSnapshot> quotes,
                                                           std::span<const double> fundamental);

/// Timestamps after the shock until PE first drops below the band;
/// std::nullopt when it never does before the horizon.
std::optional<Timestamp> shock_recovery_time(std::span<const std::optional<double>> pe_series,
                                             const ShockSpec& shock);

}  // namespace dmmsim
