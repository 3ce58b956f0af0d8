#include <doctest.h>

#include <cmath>
#include <map>

#include "dmmsim/engine.hpp"

using namespace dmmsim;

namespace {

TradeRecord trade(double price, Quantity qty, ParticipantId buyer, ParticipantId seller, Side taker) {
  TradeRecord t;
  t.trade_time = 4;
  t.matched_price = Price::from_double(price);
  t.matched_quantity = qty;
  t.buyer_id = buyer;
  t.seller_id = seller;
  t.taker_side = taker;
  return t;
}

SimConfig small_config(int dmms = 2, std::uint64_t seed = 7) {
  SimConfig c;
  c.rounds = 300;
  c.num_dmms = dmms;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("settlement moves cash and shares and pays the maker") {
  std::vector<Account> acc(5);
  const auto entries = settle_trade(trade(134.0, 4, 0, 3, Side::Buy), acc, FeeSchedule::from_bps(20));
  REQUIRE(entries.size() == 3u);
  CHECK(acc[0].cash == -536.0);
  CHECK(acc[0].inventory == 4);
  CHECK(acc[3].inventory == -4);
  CHECK(entries[2].reason == LedgerReason::Rebate);
  CHECK(entries[2].participant == 3);
  CHECK(entries[2].cash_delta == doctest::Approx(1.072).epsilon(1e-12));
  CHECK(acc[3].cash == doctest::Approx(536.0 + 1.072).epsilon(1e-12));

  std::vector<Account> plain(5);
  const auto e0 = settle_trade(trade(133.77, 10, 1, 2, Side::Sell), plain, FeeSchedule::from_bps(0));
  REQUIRE(e0.size() == 2u);
  CHECK(e0[0].cash_delta == -e0[1].cash_delta);
  CHECK(plain[1].cash + plain[2].cash == 0.0);

  CHECK_THROWS_AS(settle_trade(trade(133.77, 10, 0, 0, Side::Buy), plain, {}), std::logic_error);
}

TEST_CASE("mark to market") {
  CHECK(mark_to_market({100.0, 0}, 134.0) == 100.0);
  CHECK(mark_to_market({-6580.11, 50}, 133.92) == doctest::Approx(115.89).epsilon(1e-12));
  std::vector<Account> acc{{1000.0, 3}, {1000.0, 0}};
  const double before = mark_to_market(acc[0], 120.0);
  settle_trade(trade(120.0, 2, 1, 0, Side::Buy), acc, {});
  CHECK(mark_to_market(acc[0], 120.0) == doctest::Approx(before));
}

TEST_CASE("order ids and fee schedule") {
  CHECK(make_order_id(1, "IBM", 35) == "1IBM35");
  CHECK(FeeSchedule::from_bps(20).maker_rebate_rate == doctest::Approx(0.002));
}

TEST_CASE("config validation") {
  SimConfig c;
  c.rounds = 9;
  CHECK_THROWS_AS(run_simulation(c), std::invalid_argument);
  c = SimConfig{};
  c.num_dmms = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.shock = ShockSpec{1000, 1.3, 0.01};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = SimConfig{};
  c.historical_path = FundamentalPath{std::vector<double>(100, 50.0), {}};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("default run produces reports and trades") {
  SimConfig c;
  c.seed = 42;
  const SimResult r = run_simulation(c);
  CHECK(r.steps.size() == 1000u);
  CHECK(r.quotes.size() == 1000u);
  CHECK_FALSE(r.trades.empty());
  CHECK(r.dmm_equity.size() == 1u);
  CHECK(r.dmm_equity[0].size() == 1001u);
  for (std::size_t t = 0; t < r.steps.size(); ++t) {
    CHECK(r.steps[t].time == static_cast<Timestamp>(t));
    CHECK(r.quotes[t].time == static_cast<Timestamp>(t));
    CHECK(r.steps[t].fundamental == r.path.values[t]);
    if (r.steps[t].difference) {
      CHECK(*r.steps[t].difference >= 0.0);
      CHECK(std::abs(*r.steps[t].difference -
                     std::abs(*r.quotes[t].midprice - r.path.values[t]) / r.path.values[t]) < 1e-12);
    }
  }
  for (const auto& t : r.trades) CHECK(t.buyer_id != t.seller_id);
}

TEST_CASE("runs without outside flow stay flat") {
  SimConfig c = small_config(1);
  c.asset.annual_volatility = 0.0;
  c.asset.annual_return = 0.0;
  c.insider_arrival.lambda_rate = 0.0;
  c.liquidity_arrival.lambda_rate = 0.0;
  c.momentum_arrival.lambda_rate = 0.0;
  const SimResult r = run_simulation(c);
  CHECK(r.trades.empty());
  for (const auto& s : r.steps) {
    for (std::size_t p = 0; p < s.holdings.size(); ++p) CHECK(s.holdings[p].inventory == 0);
    CHECK(s.holdings[kFirstDmm].cash == c.dmm.starting_cash);
  }
}

TEST_CASE("inventory and cash are conserved step by step") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SimResult r = run_simulation(small_config(3, seed));
    std::map<Timestamp, double> rebates;
    for (const auto& e : r.ledger) {
      if (e.reason == LedgerReason::Rebate) rebates[e.time] += e.cash_delta;
    }
    const int n = r.config.participant_count();
    const Quantity start_inventory = 0;
    double prev_cash =
        r.config.insider.starting_cash + r.config.liquidity_starting_cash + r.config.momentum.starting_cash +
                r.config.num_dmms * r.config.dmm.starting_cash;
    for (const auto& s : r.steps) {
      double cash = 0.0;
      Quantity inv = 0;
      for (int p = 0; p < n; ++p) {
        cash += s.holdings[static_cast<std::size_t>(p)].cash;
        inv += s.holdings[static_cast<std::size_t>(p)].inventory;
      }
      CHECK(inv == start_inventory);
      CHECK(std::abs((cash - prev_cash) - rebates[s.time]) < 1e-9);
      prev_cash = cash;
    }
  }
}

TEST_CASE("inventories respect their caps") {
  const SimResult r = run_simulation(small_config(2, 11));
  for (const auto& s : r.steps) {
    CHECK(std::abs(s.holdings[kInsider].inventory) <= r.config.insider.max_inventory);
    CHECK(std::abs(s.holdings[kMomentum].inventory) <= r.config.momentum.max_inventory);
    for (int k = 0; k < r.config.num_dmms; ++k) {
      CHECK(std::abs(s.holdings[static_cast<std::size_t>(kFirstDmm + k)].inventory) <= r.config.dmm.max_inventory);
    }
  }
}

TEST_CASE("identical configs replay identically") {
  const SimResult a = run_simulation(small_config(3, 5));
  const SimResult b = run_simulation(small_config(3, 5));
  CHECK(a.trades == b.trades);
  CHECK(a.dmm_equity == b.dmm_equity);
  REQUIRE(a.ledger.size() == b.ledger.size());
  for (std::size_t i = 0; i < a.ledger.size(); ++i) CHECK(a.ledger[i].cash_delta == b.ledger[i].cash_delta);
  const SimResult c = run_simulation(small_config(3, 6));
  CHECK(a.trades != c.trades);
}

TEST_CASE("shocks reach the reported fundamental") {
  SimConfig c = small_config(2);
  c.shock = ShockSpec{150, 1.3, 0.01};
  const SimResult r = run_simulation(c);
  CHECK(r.path.shock_log.size() == 1u);
  CHECK(r.steps[150].fundamental / r.steps[149].fundamental > 1.2);
}

TEST_CASE("historical paths replace the generated fundamental") {
  SimConfig c = small_config(1);
  c.historical_path = FundamentalPath{std::vector<double>(c.rounds + kLookahead, 80.0), {}};
  const SimResult r = run_simulation(c);
  for (const auto& s : r.steps) CHECK(s.fundamental == 80.0);
}
