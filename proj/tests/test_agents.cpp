#include <doctest.h>

#include "dmmsim/agents.hpp"

using namespace dmmsim;

namespace {

Price px(double v) { return Price::from_double(v); }

DmmState dmm_with(Quantity inventory, std::initializer_list<double> mids) {
  DmmState s = DmmState::from_params(3, DmmParams{});
  s.inventory = inventory;
  for (double m : mids) s.record_mid(m);
  return s;
}

}  // namespace

TEST_CASE("insider trades toward the lookahead price") {
  AgentState st;
  AgentParams params;
  const auto buy = p1_decide(st, params, 100.0, 104.0);
  REQUIRE(buy);
  CHECK(*buy == OrderIntent{Side::Buy, px(102.0), 5});

  const auto sell = p1_decide(st, params, 100.0, 96.0);
  REQUIRE(sell);
  CHECK(*sell == OrderIntent{Side::Sell, px(98.0), 5});

  CHECK_FALSE(p1_decide(st, params, 100.0, 115.0));
  CHECK_FALSE(p1_decide(st, params, 100.0, 85.0));
}

TEST_CASE("inventory caps include working orders") {
  AgentParams params;
  AgentState full;
  full.inventory = params.max_inventory;
  CHECK_FALSE(p1_decide(full, params, 100.0, 104.0));
  CHECK(p1_decide(full, params, 100.0, 96.0));

  AgentState near;
  near.inventory = 45;
  near.pending_buy = 3;
  CHECK(buy_capacity(near, params) == 2);
  near.pending_buy = 10;
  CHECK(buy_capacity(near, params) == 0);

  AgentState shortest;
  shortest.inventory = -params.max_inventory;
  CHECK_FALSE(p3_decide(shortest, params, 102.0, 100.0));
  shortest.inventory = -48;
  shortest.pending_sell = 1;
  CHECK(sell_capacity(shortest, params) == 1);
}

TEST_CASE("momentum trader extrapolates the last move") {
  AgentState st;
  AgentParams params;
  const auto up = p3_decide(st, params, 100.0, 102.0);
  REQUIRE(up);
  CHECK(*up == OrderIntent{Side::Buy, px(103.0), 5});
  const auto flat = p3_decide(st, params, 100.0, 100.0);
  REQUIRE(flat);
  CHECK(*flat == OrderIntent{Side::Sell, px(100.0), 5});
}

TEST_CASE("liquidity traders hit the touch or fall back on execution history") {
  NoiseDistributions noise{0.0, 0.0, 5.0, 0.0};
  ArrivalModel once{100.0};
  RandomStream a(1), q(2), s(3);

  P2View book{px(133.8), px(134.2), {}};
  const auto both = p2_decide(book, noise, once, {a, q, s});
  REQUIRE(both.size() >= 2u);
  CHECK(both[0] == OrderIntent{Side::Sell, px(133.8), 5});
  CHECK(both[1] == OrderIntent{Side::Buy, px(134.2), 5});
  CHECK(both.size() % 2 == 0u);

  const std::vector<Price> history{px(134.0), px(133.77)};
  P2View empty{std::nullopt, std::nullopt, history};
  const auto fallback = p2_decide(empty, noise, once, {a, q, s});
  REQUIRE(fallback.size() >= 2u);
  CHECK(fallback[0] == OrderIntent{Side::Buy, px(133.77), 5});
  CHECK(fallback[1] == OrderIntent{Side::Sell, px(134.0), 5});

  P2View nothing{};
  CHECK(p2_decide(nothing, noise, once, {a, q, s}).empty());
  CHECK(p2_decide(book, noise, ArrivalModel{0.0}, {a, q, s}).empty());
}

TEST_CASE("a drawn spread makes liquidity orders more aggressive") {
  NoiseDistributions noise{0.1, 0.0, 5.0, 0.0};
  RandomStream a(1), q(2), s(3);
  P2View book{px(133.8), px(134.2), {}};
  const auto out = p2_decide(book, noise, ArrivalModel{50.0}, {a, q, s});
  REQUIRE(out.size() >= 2u);
  CHECK(out[0].price == px(133.7));
  CHECK(out[1].price == px(134.3));
}

TEST_CASE("reservation price shifts with inventory") {
  DmmQuoteInputs in;
  in.mid = 100.0;
  in.sigma2 = 0.04;
  DmmState st = dmm_with(0, {100.0});
  st.time_horizon = 1.0;
  CHECK(dmm_reservation_price(in, st) == 100.0);
  st.inventory = st.max_inventory;
  CHECK(dmm_reservation_price(in, st) == doctest::Approx(99.98).epsilon(1e-12));
  st.inventory = -st.max_inventory;
  CHECK(dmm_reservation_price(in, st) == doctest::Approx(100.02).epsilon(1e-12));

  double prev = 1e9;
  for (Quantity qv = -100; qv <= 100; qv += 10) {
    st.inventory = qv;
    const double r = dmm_reservation_price(in, st);
    CHECK(r <= prev);
    prev = r;
  }
  in.sigma2 = 0.0;
  st.inventory = 70;
  CHECK(dmm_reservation_price(in, st) == 100.0);
  st.max_inventory = 0;
  CHECK_THROWS_AS(dmm_reservation_price(in, st), std::invalid_argument);
}

TEST_CASE("target weight follows the position in the trailing range") {
  DmmQuoteInputs in;
  in.pmax = 110.0;
  in.pmin = 90.0;
  in.mid = 100.0;
  CHECK(dmm_target_weight(in) == 0.5);
  in.mid = 90.0;
  CHECK(dmm_target_weight(in) == 1.0);
  in.mid = 110.0;
  CHECK(dmm_target_weight(in) == 0.0);
  in.pmax = in.pmin = in.mid = 100.0;
  CHECK(dmm_target_weight(in) == 0.5);
}

TEST_CASE("quote inputs come from the trailing mid window") {
  const DmmState st = dmm_with(0, {100.0, 101.0, 99.99});
  const auto in = make_quote_inputs(st, {4, 6});
  CHECK(in.mid == 99.99);
  CHECK(in.pmax == 101.0);
  CHECK(in.pmin == 99.99);
  const double r1 = 101.0 / 100.0 - 1.0;
  const double r2 = 99.99 / 101.0 - 1.0;
  const double mean = (r1 + r2) / 2.0;
  CHECK(in.sigma2 == doctest::Approx((r1 - mean) * (r1 - mean) + (r2 - mean) * (r2 - mean)).epsilon(1e-12));
  CHECK(in.incoming_quantities == std::vector<Quantity>{4, 6});
  CHECK(make_quote_inputs(dmm_with(0, {100.0, 101.0}), {}).sigma2 == 0.0);
  CHECK_THROWS_AS(make_quote_inputs(DmmState{}, {}), std::logic_error);

  DmmState windowed = dmm_with(0, {});
  for (int i = 0; i < 30; ++i) windowed.record_mid(100.0 + i);
  CHECK(windowed.mid_window.size() == windowed.volatility_window);
  CHECK(windowed.mid_window.front() == 110.0);
}

TEST_CASE("large orders stand out from the rolling window") {
  const std::vector<Quantity> hist{2, 3, 4, 2, 3, 4};
  const auto st = rolling_quantity_stats(hist);
  CHECK(st.mean == doctest::Approx(3.0));
  CHECK(st.sd == doctest::Approx(std::sqrt(0.8)));
  const std::vector<Quantity> big{10};
  const std::vector<Quantity> typical{3};
  CHECK(detect_large_order(big, st));
  CHECK_FALSE(detect_large_order(typical, st));
  const std::vector<Quantity> cold{2, 3, 4, 5};
  CHECK_FALSE(detect_large_order(big, rolling_quantity_stats(cold)));
  CHECK(rolling_quantity_stats({}).count == 0u);
}

TEST_CASE("quotes are sized by target weight and capped by inventory") {
  DmmState st = dmm_with(0, {134.0});
  DmmQuoteInputs in;
  in.mid = 134.0;
  in.pmax = 135.0;
  in.pmin = 133.0;
  const auto q = dmm_quote(st, in);
  REQUIRE(q.bid);
  REQUIRE(q.ask);
  CHECK(*q.bid == OrderIntent{Side::Buy, px(133.95), 10});
  CHECK(*q.ask == OrderIntent{Side::Sell, px(134.05), 10});

  st = DmmState::from_params(3, DmmParams{50});
  in.mid = 134.0;
  const auto small = dmm_quote(st, in);
  CHECK(small.bid->quantity == 5);
  CHECK(small.ask->quantity == 5);

  st.inventory = st.max_inventory;
  const auto full = dmm_quote(st, in);
  CHECK_FALSE(full.bid);
  REQUIRE(full.ask);

  st.inventory = -st.max_inventory;
  CHECK_FALSE(dmm_quote(st, in).ask);
}

TEST_CASE("large incoming orders widen the quote") {
  DmmState st = dmm_with(0, {134.0});
  st.record_quantities(std::vector<Quantity>{2, 3, 4, 2, 3, 4});
  DmmQuoteInputs in;
  in.mid = in.pmax = in.pmin = 134.0;
  in.incoming_quantities = {3};
  const auto calm = dmm_quote(st, in);
  in.incoming_quantities = {30};
  const auto wide = dmm_quote(st, in);
  CHECK_FALSE(calm.widened);
  CHECK(wide.widened);
  CHECK(wide.half_spread == doctest::Approx(2.0 * calm.half_spread));
  CHECK((wide.ask->price - wide.bid->price).ticks() == 2 * (calm.ask->price - calm.bid->price).ticks());
}

TEST_CASE("rebates tighten quotes down to the floor") {
  DmmState st = dmm_with(0, {134.0});
  DmmQuoteInputs in;
  in.mid = in.pmax = in.pmin = 134.0;
  const auto none = dmm_quote(st, in, QuotePolicy{0.002, 0.1, 0.005});
  CHECK(none.half_spread == doctest::Approx(0.05 - 0.1 * 0.002 * 134.0));
  const auto floor = dmm_quote(st, in, QuotePolicy{0.002, 10.0, 0.005});
  CHECK(floor.half_spread == 0.005);
  CHECK(floor.bid->price < floor.ask->price);
}

TEST_CASE("parameter validation") {
  AgentParams a;
  a.max_inventory = 0;
  CHECK_THROWS_AS(a.validate(), std::invalid_argument);
  DmmParams d;
  d.widen_factor = 0.5;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
  d = DmmParams{};
  d.volatility_window = 1;
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}
