#include "dmmsim/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dmmsim {

void AgentParams::validate() const {
  if (!(price_premium >= 0.0)) throw std::invalid_argument("price_premium must be >= 0");
  if (max_inventory <= 0) throw std::invalid_argument("max_inventory must be > 0");
  if (!(refrain_threshold > 0.0)) throw std::invalid_argument("refrain_threshold must be > 0");
  if (quantity_cap <= 0) throw std::invalid_argument("quantity_cap must be > 0");
  if (order_lifetime < 0) throw std::invalid_argument("order_lifetime must be >= 0");
}

Quantity buy_capacity(const AgentState& state, const AgentParams& params) noexcept {
  const Quantity room = params.max_inventory - (state.inventory + state.pending_buy);
  return std::min(std::max<Quantity>(room, 0), params.quantity_cap);
}

Quantity sell_capacity(const AgentState& state, const AgentParams& params) noexcept {
  const Quantity room = params.max_inventory + (state.inventory - state.pending_sell);
  return std::min(std::max<Quantity>(room, 0), params.quantity_cap);
}

namespace {

std::optional<OrderIntent> directional_order(const AgentState& state, const AgentParams& params,
                                             double reference, double signal) {
  const double margin = std::abs(signal - reference);
  if (signal > reference) {
    const Quantity qty = buy_capacity(state, params);
    if (qty == 0) return std::nullopt;
    return OrderIntent{Side::Buy, Price::from_double(reference + params.price_premium * margin), qty};
  }
  const Quantity qty = sell_capacity(state, params);
  if (qty == 0) return std::nullopt;
  const Price price = std::max(kTick, Price::from_double(reference - params.price_premium * margin));
  return OrderIntent{Side::Sell, price, qty};
}

}  // namespace

std::optional<OrderIntent> p1_decide(const AgentState& state, const AgentParams& params,
                                     double price_prev, double price_future) {
  if (std::abs(price_future - price_prev) / price_prev > params.refrain_threshold) {
    return std::nullopt;
  }
  return directional_order(state, params, price_prev, price_future);
}

std::optional<OrderIntent> p3_decide(const AgentState& state, const AgentParams& params,
                                     double price_two_back, double price_prev) {
  return directional_order(state, params, price_prev, price_prev + (price_prev - price_two_back));
}

std::vector<OrderIntent> p2_decide(const P2View& view, const NoiseDistributions& noise,
                                   const ArrivalModel& arrival, P2Streams streams) {
  const int decisions = poisson_arrivals(arrival, streams.arrivals);
  std::vector<OrderIntent> out;
  if (decisions == 0) return out;

  std::optional<Price> lowest;
  std::optional<Price> highest;
  if (!view.matched_history.empty()) {
    const auto [lo, hi] = std::minmax_element(view.matched_history.begin(), view.matched_history.end());
    lowest = *lo;
    highest = *hi;
  }

  auto emit = [&](Side side, Price reference) {
    const Quantity qty = draw_quantity(noise, streams.quantity);
    const Price offset = Price::from_double(draw_spread(noise, streams.spread));
    const Price price = side == Side::Buy ? reference + offset : std::max(kTick, reference - offset);
    out.push_back({side, price, qty});
  };

  for (int i = 0; i < decisions; ++i) {
    if (view.best_bid) {
      emit(Side::Sell, *view.best_bid);
    } else if (lowest) {
      emit(Side::Buy, *lowest);
    }
    if (view.best_ask) {
      emit(Side::Buy, *view.best_ask);
    } else if (highest) {
      emit(Side::Sell, *highest);
    }
  }
  return out;
}

void DmmParams::validate() const {
  if (max_inventory <= 0) throw std::invalid_argument("dmm max_inventory must be > 0");
  if (!(base_half_spread >= 0.0)) throw std::invalid_argument("base_half_spread must be >= 0");
  if (!(widen_factor >= 1.0)) throw std::invalid_argument("widen_factor must be >= 1");
  if (!(quote_aggressiveness >= 0.0)) throw std::invalid_argument("quote_aggressiveness must be >= 0");
  if (!(min_half_spread >= 0.0)) throw std::invalid_argument("min_half_spread must be >= 0");
  if (volatility_window < 2) throw std::invalid_argument("volatility_window must be >= 2");
  if (large_order_window < 5) throw std::invalid_argument("large_order_window must be >= 5");
}

DmmState DmmState::from_params(ParticipantId id, const DmmParams& params) {
  DmmState s;
  s.participant_id = id;
  s.cash = params.starting_cash;
  s.max_inventory = params.max_inventory;
  s.base_half_spread = params.base_half_spread;
  s.widen_factor = params.widen_factor;
  s.volatility_window = params.volatility_window;
  s.large_order_window = params.large_order_window;
  return s;
}

void DmmState::record_mid(double mid) {
  mid_window.push_back(mid);
  while (mid_window.size() > volatility_window) mid_window.pop_front();
}

void DmmState::record_quantities(std::span<const Quantity> quantities) {
  for (Quantity q : quantities) {
    quantity_window.push_back(q);
    while (quantity_window.size() > large_order_window) quantity_window.pop_front();
  }
}

DmmQuoteInputs make_quote_inputs(const DmmState& state, std::vector<Quantity> incoming) {
  if (state.mid_window.empty()) throw std::logic_error("make_quote_inputs: empty mid window");
  DmmQuoteInputs in;
  in.mid = state.mid_window.back();
  const auto [lo, hi] = std::minmax_element(state.mid_window.begin(), state.mid_window.end());
  in.pmin = *lo;
  in.pmax = *hi;
  const std::size_t n = state.mid_window.size();
  if (n >= 3) {
    std::vector<double> returns;
    for (std::size_t i = 1; i < n; ++i) returns.push_back(state.mid_window[i] / state.mid_window[i - 1] - 1.0);
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(returns.size());
    double ss = 0.0;
    for (double r : returns) ss += (r - mean) * (r - mean);
    in.sigma2 = ss / static_cast<double>(returns.size() - 1);
  }
  in.incoming_quantities = std::move(incoming);
  return in;
}

double dmm_reservation_price(const DmmQuoteInputs& inputs, const DmmState& state) {
  if (state.max_inventory <= 0) throw std::invalid_argument("dmm_reservation_price: max_inventory must be > 0");
  const double q_norm = static_cast<double>(state.inventory + state.max_inventory) /
                        (2.0 * static_cast<double>(state.max_inventory));
  return inputs.mid + (1.0 - 2.0 * q_norm) * (inputs.sigma2 / 2.0) * state.time_horizon;
}

double dmm_target_weight(const DmmQuoteInputs& inputs) {
  const double range = inputs.pmax - inputs.pmin;
  if (!(range > 0.0)) return 0.5;
  return std::clamp((inputs.pmax - inputs.mid) / range, 0.0, 1.0);
}

RollingQuantityStats rolling_quantity_stats(std::span<const Quantity> window) {
  RollingQuantityStats st;
  st.count = window.size();
  if (st.count == 0) return st;
  double sum = 0.0;
  for (Quantity q : window) sum += static_cast<double>(q);
  st.mean = sum / static_cast<double>(st.count);
  if (st.count >= 2) {
    double ss = 0.0;
    for (Quantity q : window) ss += (static_cast<double>(q) - st.mean) * (static_cast<double>(q) - st.mean);
    st.sd = std::sqrt(ss / static_cast<double>(st.count - 1));
  }
  return st;
}

bool detect_large_order(std::span<const Quantity> incoming, const RollingQuantityStats& stats) {
  if (stats.count < 5) return false;
  const double threshold = stats.mean + 2.0 * stats.sd;
  return std::any_of(incoming.begin(), incoming.end(),
                     [&](Quantity q) { return static_cast<double>(q) > threshold; });
}

namespace {

Quantity scaled_size(double weight, Quantity base) {
  if (base <= 0) return 0;
  // Tolerance keeps exact products such as 0.5 * 10 from rounding up to 6.
  const double raw = std::ceil(weight * static_cast<double>(base) - 1e-9);
  return std::max<Quantity>(0, static_cast<Quantity>(raw));
}

}  // namespace

DmmQuote dmm_quote(const DmmState& state, const DmmQuoteInputs& inputs, const QuotePolicy& policy) {
  DmmQuote quote;
  quote.reservation = dmm_reservation_price(inputs, state);
  quote.target_weight = dmm_target_weight(inputs);

  const std::vector<Quantity> window(state.quantity_window.begin(), state.quantity_window.end());
  quote.widened = detect_large_order(inputs.incoming_quantities, rolling_quantity_stats(window));
  const double h = state.base_half_spread * (quote.widened ? state.widen_factor : 1.0);
  quote.half_spread = std::max(policy.min_half_spread,
                               h - policy.quote_aggressiveness * policy.maker_rebate_rate * quote.reservation);

  const Price ask_price = std::max(Price::from_ticks(2), Price::from_double(quote.reservation + quote.half_spread));
  Price bid_price = Price::from_double(quote.reservation - quote.half_spread);
  if (bid_price >= ask_price) bid_price = ask_price - kTick;

  const Quantity mq = state.max_quote_size();
  const Quantity ask_base = std::min(mq, state.max_inventory + state.inventory);
  const Quantity bid_base = std::min(mq, state.max_inventory - state.inventory);
  const Quantity bid_size = scaled_size(quote.target_weight, bid_base);
  const Quantity ask_size = scaled_size(1.0 - quote.target_weight, ask_base);

  if (bid_size > 0 && bid_price.positive()) quote.bid = OrderIntent{Side::Buy, bid_price, bid_size};
  if (ask_size > 0) quote.ask = OrderIntent{Side::Sell, ask_price, ask_size};
  return quote;
}

}  // namespace dmmsim
