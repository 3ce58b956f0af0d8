#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "dmmsim/market_dynamics.hpp"
#include "dmmsim/order_book.hpp"
#include "dmmsim/price.hpp"
#include "dmmsim/rng.hpp"

namespace dmmsim {

/// Parameters of the insider (P1) and momentum (P3) classes.
struct AgentParams {
  double price_premium{0.5};
  Quantity max_inventory{50};
  double starting_cash{100.0};
  int insider_lookahead{kLookahead};
  double refrain_threshold{0.10};
  Quantity quantity_cap{5};
  /// Timestamps an unfilled order is left working before its owner withdraws
  /// it; 0 keeps orders until filled.
  int order_lifetime{10};

  void validate() const;
};

struct AgentState {
  ParticipantId participant_id{0};
  double cash{0.0};
  Quantity inventory{0};
  std::vector<OrderId> open_order_ids;
  /// Unfilled quantity of this participant's working orders, per side.
  Quantity pending_buy{0};
  Quantity pending_sell{0};
};

/// A priced order decision; the engine turns it into a book Order.
struct OrderIntent {
  Side side{Side::Buy};
  Price price;
  Quantity quantity{0};
  bool operator==(const OrderIntent&) const = default;
};

/// Buy size that keeps inventory plus working buys within the cap.
Quantity buy_capacity(const AgentState& state, const AgentParams& params) noexcept;
/// Sell size that keeps inventory minus working sells within -cap.
Quantity sell_capacity(const AgentState& state, const AgentParams& params) noexcept;

/// Insider: trades toward the t+5 fundamental, from the t-1 fundamental.
std::optional<OrderIntent> p1_decide(const AgentState& state, const AgentParams& params,
                                     double price_prev, double price_future);

/// Momentum trader: extrapolates the t-2 → t-1 fundamental move.
std::optional<OrderIntent> p3_decide(const AgentState& state, const AgentParams& params,
                                     double price_two_back, double price_prev);

struct P2View {
  std::optional<Price> best_bid;
  std::optional<Price> best_ask;
  /// Recent execution prices, oldest first.
  std::span<const Price> matched_history;
};

struct P2Streams {
  RandomStream& arrivals;
  RandomStream& quantity;
  RandomStream& spread;
};

/// Liquidity traders acting as one collective. Each of the Poisson-many
/// decisions emits up to two orders: a sell at the best bid (or a buy at the
/// lowest recent execution) and a buy at the best ask (or a sell at the
/// highest recent execution). A drawn spread makes each price more aggressive.
std::vector<OrderIntent> p2_decide(const P2View& view, const NoiseDistributions& noise,
                                   const ArrivalModel& arrival, P2Streams streams);

struct DmmParams {
  Quantity max_inventory{100};
  double starting_cash{100000.0};
  double base_half_spread{0.05};
  double widen_factor{2.0};
  /// Fraction of the expected maker rebate passed into tighter quotes.
  double quote_aggressiveness{0.1};
  double min_half_spread{0.005};
  std::size_t volatility_window{20};
  std::size_t large_order_window{50};

  void validate() const;
};

struct DmmState {
  ParticipantId participant_id{0};
  double cash{0.0};
  Quantity inventory{0};
  Quantity max_inventory{100};
  double base_half_spread{0.05};
  double widen_factor{2.0};
  /// Remaining fraction of the run, (rounds - t) / rounds.
  double time_horizon{1.0};
  std::size_t volatility_window{20};
  std::size_t large_order_window{50};
  std::deque<double> mid_window;
  std::deque<Quantity> quantity_window;
  std::vector<OrderId> open_quotes;

  static DmmState from_params(ParticipantId id, const DmmParams& params);

  Quantity max_quote_size() const noexcept { return max_inventory / 5; }
  void record_mid(double mid);
  void record_quantities(std::span<const Quantity> quantities);
};

struct DmmQuoteInputs {
  double mid{0.0};
  /// Sample variance of simple midprice returns over the trailing window.
  double sigma2{0.0};
  double pmax{0.0};
  double pmin{0.0};
  std::vector<Quantity> incoming_quantities;
};

/// Inputs from the state's trailing window, which must already hold `mid`.
DmmQuoteInputs make_quote_inputs(const DmmState& state, std::vector<Quantity> incoming);

/// Inventory-skewed reservation mid r = s - (q / max_inventory)(sigma2 / 2) T.
double dmm_reservation_price(const DmmQuoteInputs& inputs, const DmmState& state);

/// (pmax - s) / (pmax - pmin) clamped to [0, 1]; 0.5 for a flat window.
double dmm_target_weight(const DmmQuoteInputs& inputs);

struct RollingQuantityStats {
  std::size_t count{0};
  double mean{0.0};
  double sd{0.0};
};

RollingQuantityStats rolling_quantity_stats(std::span<const Quantity> window);

/// Any incoming quantity above mean + 2 sd; false with fewer than 5 observations.
bool detect_large_order(std::span<const Quantity> incoming, const RollingQuantityStats& stats);

/// Rebate-dependent quoting inputs that are not part of the DMM's own state.
struct QuotePolicy {
  double maker_rebate_rate{0.0};
  double quote_aggressiveness{0.0};
  double min_half_spread{0.005};
};

struct DmmQuote {
  std::optional<OrderIntent> bid;
  std::optional<OrderIntent> ask;
  double reservation{0.0};
  double half_spread{0.0};
  double target_weight{0.5};
  bool widened{false};
};

DmmQuote dmm_quote(const DmmState& state, const DmmQuoteInputs& inputs,
                   const QuotePolicy& policy = {});

}  // namespace dmmsim
