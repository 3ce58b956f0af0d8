#include <doctest.h>

#include <cmath>
#include <random>

#include "dmmsim/metrics.hpp"

using namespace dmmsim;

namespace {

BookSnapshot snap(Timestamp t, std::optional<double> bid, std::optional<double> ask) {
  BookSnapshot s;
  s.time = t;
  if (bid) s.best_bid = Price::from_double(*bid);
  if (ask) s.best_ask = Price::from_double(*ask);
  if (bid && ask) s.midprice = (*bid + *ask) / 2.0;
  return s;
}

QuoteTape mids(const std::vector<double>& m) {
  QuoteTape tape;
  for (std::size_t i = 0; i < m.size(); ++i) {
    BookSnapshot s;
    s.time = static_cast<Timestamp>(i);
    s.midprice = m[i];
    s.best_bid = Price::from_double(m[i] - 0.01);
    s.best_ask = Price::from_double(m[i] + 0.01);
    tape.push_back(s);
  }
  return tape;
}

TradeRecord trade(Timestamp t, double p, Quantity c, Side taker) {
  TradeRecord tr;
  tr.trade_time = t;
  tr.matched_price = Price::from_double(p);
  tr.matched_quantity = c;
  tr.buyer_id = 0;
  tr.seller_id = 1;
  tr.taker_side = taker;
  return tr;
}

Order order(Quantity original, Quantity remaining, ParticipantId owner = 0) {
  Order o;
  o.owner_id = owner;
  o.original_quantity = original;
  o.remaining_quantity = remaining;
  return o;
}

}  // namespace

TEST_CASE("executed to submitted ratio") {
  const std::vector<Order> all{order(5, 0), order(3, 0)};
  CHECK(ep_ratio(all) == 1.0);
  const std::vector<Order> half{order(5, 0), order(3, 1), order(4, 4), order(2, 0)};
  CHECK(ep_ratio(half) == 0.5);
  CHECK(ep_ratio(half, [](const Order& o) { return o.original_quantity != 3; }) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(ep_ratio(std::vector<Order>{}), MetricError);
  CHECK_THROWS_AS(ep_ratio(half, [](const Order&) { return false; }), MetricError);
}

TEST_CASE("quoted spread") {
  QuoteTape constant;
  for (Timestamp t = 0; t < 10; ++t) constant.push_back(snap(t, 133.9, 134.1));
  CHECK(std::abs(quoted_spread_tw(constant) - 0.2 / 134.0) < 1e-9);
  CHECK(std::abs(quoted_spread_tw(constant) - 0.00149254) < 1e-8);

  QuoteTape two;
  for (Timestamp t = 0; t < 4; ++t) two.push_back(snap(t, 99.9, 100.1));
  for (Timestamp t = 4; t < 8; ++t) two.push_back(snap(t, 199.0, 201.0));
  CHECK(std::abs(quoted_spread_tw(two) - (0.2 / 100.0 + 2.0 / 200.0) / 2.0) < 1e-12);

  QuoteTape locked{snap(0, 100.0, 100.0)};
  CHECK(quoted_spread_tw(locked) == 0.0);

  QuoteTape gappy{snap(0, 99.9, 100.1), snap(1, std::nullopt, 100.1), snap(2, 99.9, 100.1)};
  CHECK(std::abs(quoted_spread_tw(gappy) - 0.2 / 100.0) < 1e-12);
  QuoteTape one_sided{snap(0, 99.9, std::nullopt)};
  CHECK_THROWS_AS(quoted_spread_tw(one_sided), MetricError);
}

TEST_CASE("depth at best") {
  QuoteTape tape{snap(0, 133.9, 134.1), snap(1, std::nullopt, std::nullopt)};
  tape[0].depth_value_at_best = 133.9 * 5 + 134.1 * 8;
  CHECK(std::abs(tape[0].depth_value_at_best - 1742.3) < 1e-9);
  CHECK(std::abs(depth_best_tw(tape) - 1742.3 / 2.0) < 1e-9);
  tape.pop_back();
  CHECK(std::abs(depth_best_tw(tape) - 1742.3) < 1e-9);
  CHECK_THROWS_AS(depth_best_tw(QuoteTape{}), MetricError);
}

TEST_CASE("single-trade realized spread and adverse selection") {
  const auto flat = mids(std::vector<double>(10, 100.0));
  const TradeTape buy{trade(0, 101.0, 3, Side::Buy)};
  CHECK(std::abs(realized_spread_k(buy, flat, 5) - 0.01) < 1e-9);
  CHECK(std::abs(adverse_selection_k(buy, flat, 5)) < 1e-12);
  const TradeTape sell{trade(0, 99.0, 3, Side::Sell)};
  CHECK(std::abs(realized_spread_k(sell, flat, 5) - 0.01) < 1e-9);

  std::vector<double> rising(10, 100.0);
  for (std::size_t i = 5; i < rising.size(); ++i) rising[i] = 102.0;
  const auto up = mids(rising);
  CHECK(std::abs(adverse_selection_k(buy, up, 5) - 0.02) < 1e-9);
  const TradeTape at_future{trade(0, 102.0, 3, Side::Buy)};
  CHECK(std::abs(realized_spread_k(at_future, up, 5)) < 1e-12);
}

TEST_CASE("trades without a later midprice are not eligible") {
  const auto tape = mids(std::vector<double>(6, 100.0));
  const TradeTape late{trade(1, 101.0, 1, Side::Buy)};
  CHECK_THROWS_AS(realized_spread_k(late, tape, 5), MetricError);
  const TradeTape ok{trade(0, 101.0, 1, Side::Buy), trade(1, 101.0, 1, Side::Buy)};
  CHECK(spread_terms(ok, tape, 5).size() == 1u);
  CHECK_THROWS_AS(spread_terms(ok, tape, 0), std::invalid_argument);
}

TEST_CASE("effective spread splits into realized spread and adverse selection") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> step(0.0, 0.05);
  std::vector<double> m{100.0};
  for (int i = 1; i < 200; ++i) m.push_back(m.back() + step(gen));
  const auto tape = mids(m);
  TradeTape trades;
  for (int i = 0; i < 300; ++i) {
    const auto t = static_cast<Timestamp>(gen() % 200);
    const Side side = gen() % 2 ? Side::Buy : Side::Sell;
    const double p = m[static_cast<std::size_t>(t)] + (side == Side::Buy ? 0.03 : -0.03) + step(gen);
    trades.push_back(trade(t, p, 1 + static_cast<Quantity>(gen() % 9), side));
  }
  for (int k : {5, 10}) {
    double num_eff = 0.0;
    double num_rs = 0.0;
    double num_as = 0.0;
    double den = 0.0;
    for (const auto& tr : trades) {
      const auto t = static_cast<std::size_t>(tr.trade_time);
      if (t + static_cast<std::size_t>(k) >= m.size()) continue;
      const double q = tr.taker_side == Side::Buy ? 1.0 : -1.0;
      const double p = tr.matched_price.to_double();
      const double w = p * static_cast<double>(tr.matched_quantity);
      const double rs = q * (p - m[t + k]) / m[t];
      const double as = q * (m[t + k] - m[t]) / m[t];
      const double eff = q * (p - m[t]) / m[t];
      CHECK(std::abs(eff - (rs + as)) < 1e-12);
      num_eff += w * eff;
      num_rs += w * rs;
      num_as += w * as;
      den += w;
    }
    const double rs = realized_spread_k(trades, tape, k);
    const double as = adverse_selection_k(trades, tape, k);
    CHECK(std::abs(rs - num_rs / den) < 1e-9);
    CHECK(std::abs(as - num_as / den) < 1e-9);
    CHECK(std::abs(rs + as - num_eff / den) < 1e-9);
    for (const auto& term : spread_terms(trades, tape, k)) {
      CHECK(std::abs(term.effective - (term.realized + term.adverse)) < 1e-12);
    }
  }
}

TEST_CASE("relative metrics are scale invariant") {
  std::vector<double> m{100.0, 100.5, 99.8, 101.0, 100.2, 100.7, 100.1, 99.5};
  std::vector<double> f{100.1, 100.2, 100.0, 100.4, 100.3, 100.6, 100.2, 99.9};
  QuoteTape tape = mids(m);
  TradeTape trades{trade(0, 100.05, 3, Side::Buy), trade(1, 100.4, 2, Side::Sell), trade(2, 99.9, 7, Side::Buy)};
  const double alpha = 4.0;
  QuoteTape scaled;
  for (auto s : tape) {
    s.midprice = *s.midprice * alpha;
    s.best_bid = Price::from_ticks(s.best_bid->ticks() * 4);
    s.best_ask = Price::from_ticks(s.best_ask->ticks() * 4);
    s.depth_value_at_best = 10.0;
    scaled.push_back(s);
  }
  TradeTape scaled_trades = trades;
  for (auto& t : scaled_trades) t.matched_price = Price::from_ticks(t.matched_price.ticks() * 4);
  std::vector<double> fs;
  for (double v : f) fs.push_back(v * alpha);

  CHECK(quoted_spread_tw(scaled) == doctest::Approx(quoted_spread_tw(tape)).epsilon(1e-12));
  CHECK(realized_spread_k(scaled_trades, scaled, 5) == doctest::Approx(realized_spread_k(trades, tape, 5)).epsilon(1e-12));
  CHECK(adverse_selection_k(scaled_trades, scaled, 5) == doctest::Approx(adverse_selection_k(trades, tape, 5)).epsilon(1e-12));
  const auto pe = price_efficiency_series(tape, f);
  const auto pe_scaled = price_efficiency_series(scaled, fs);
  for (std::size_t i = 0; i < pe.size(); ++i) CHECK(*pe_scaled[i] == doctest::Approx(*pe[i]).epsilon(1e-12));
}

TEST_CASE("price efficiency") {
  QuoteTape tape{snap(0, 133.8, 134.0), snap(1, std::nullopt, 134.0), snap(2, 133.9, 134.1)};
  const std::vector<double> f{134.0, 134.0, 134.0};
  const auto pe = price_efficiency_series(tape, f);
  CHECK(std::abs(*pe[0] - 0.1 / 134.0) < 1e-12);
  CHECK(std::abs(*pe[0] - 0.000746) < 1e-6);
  CHECK_FALSE(pe[1]);
  CHECK(std::abs(*pe[2]) < 1e-12);
  CHECK_THROWS_AS(price_efficiency_series(tape, std::vector<double>{134.0}), std::invalid_argument);
}

TEST_CASE("shock recovery scans for the first step inside the band") {
  const std::vector<std::optional<double>> scripted{0.0, 0.0, 0.30, 0.12, 0.02, 0.009, 0.2};
  CHECK(shock_recovery_time(scripted, {2, 1.3, 0.01}) == 3);
  const std::vector<std::optional<double>> immediate{0.0, 0.005, 0.2};
  CHECK(shock_recovery_time(immediate, {1, 1.3, 0.01}) == 0);
  const std::vector<std::optional<double>> never{0.0, 0.3, std::nullopt, 0.2, 0.011};
  CHECK_FALSE(shock_recovery_time(never, {1, 1.3, 0.01}));
  const std::vector<std::optional<double>> gap{0.0, 0.3, std::nullopt, 0.001};
  CHECK(shock_recovery_time(gap, {1, 1.3, 0.01}) == 2);
  CHECK_THROWS_AS(shock_recovery_time(gap, {10, 1.3, 0.01}), MetricError);
}
