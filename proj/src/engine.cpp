#include "dmmsim/engine.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace dmmsim {

void SimConfig::validate() const {
  if (rounds < 10) throw std::invalid_argument("rounds must be >= 10, got " + std::to_string(rounds));
  if (num_dmms < 1) throw std::invalid_argument("num_dmms must be >= 1");
  if (rebate_bps < 0) throw std::invalid_argument("rebate_bps must be >= 0");
  asset.validate();
  insider.validate();
  momentum.validate();
  dmm.validate();
  noise.validate();
  for (const ArrivalModel* a : {&insider_arrival, &liquidity_arrival, &momentum_arrival}) {
    if (!(a->lambda_rate >= 0.0)) throw std::invalid_argument("arrival rates must be >= 0");
  }
  if (liquidity_order_lifetime < 0) throw std::invalid_argument("liquidity_order_lifetime must be >= 0");
  if (shock) {
    shock->validate();
    if (shock->shock_time >= rounds) throw std::invalid_argument("shock_time must be < rounds");
  }
  if (historical_path && historical_path->usable_rounds() < rounds) {
    throw std::invalid_argument("historical path supports " +
                                std::to_string(historical_path->usable_rounds()) +
                                " rounds, config asks for " + std::to_string(rounds));
  }
}

FeeSchedule FeeSchedule::from_bps(int rebate_bps) {
  return FeeSchedule{static_cast<double>(rebate_bps) / 10000.0, 0.0};
}

std::vector<LedgerEntry> settle_trade(const TradeRecord& trade, std::vector<Account>& accounts,
                                      const FeeSchedule& fees) {
  if (trade.buyer_id == trade.seller_id) throw std::logic_error("settle_trade: self-trade");
  const double value = notional(trade.matched_price, trade.matched_quantity);
  std::vector<LedgerEntry> entries{
      {trade.trade_time, trade.buyer_id, -value, trade.matched_quantity, LedgerReason::Trade},
      {trade.trade_time, trade.seller_id, value, -trade.matched_quantity, LedgerReason::Trade},
  };
  if (fees.maker_rebate_rate > 0.0) {
    entries.push_back({trade.trade_time, trade.maker_id(), value * fees.maker_rebate_rate, 0,
                       LedgerReason::Rebate});
  }
  if (fees.taker_fee_rate > 0.0) {
    const ParticipantId taker = trade.taker_side == Side::Buy ? trade.buyer_id : trade.seller_id;
    entries.push_back({trade.trade_time, taker, -value * fees.taker_fee_rate, 0, LedgerReason::Fee});
  }
  for (const auto& e : entries) {
    Account& acc = accounts.at(static_cast<std::size_t>(e.participant));
    acc.cash += e.cash_delta;
    acc.inventory += e.inventory_delta;
  }
  return entries;
}

double mark_to_market(const Account& account, double valuation_price) noexcept {
  return account.cash + static_cast<double>(account.inventory) * valuation_price;
}

FundamentalPath build_fundamental_path(const SimConfig& config) {
  FundamentalPath path = config.historical_path
                             ? *config.historical_path
                             : generate_fundamental_path(
                                   config.asset, config.rounds,
                                   derive_seed(config.seed, {static_cast<std::uint64_t>(StreamPurpose::Fundamental)}));
  if (config.shock) path = apply_shock(std::move(path), *config.shock);
  return path;
}

std::string make_order_id(Timestamp time, const std::string& asset, std::uint64_t sequence) {
  return std::to_string(time) + asset + std::to_string(sequence);
}

namespace {

/// Working-order bookkeeping for a non-DMM participant.
struct Trader {
  AgentState state;
  int order_lifetime{0};

  void refresh(OrderBook& book, Timestamp now) {
    std::vector<OrderId> still_open;
    state.pending_buy = 0;
    state.pending_sell = 0;
    for (const auto& id : state.open_order_ids) {
      const Order& o = book.order(id);
      if (!o.is_open()) continue;
      if (order_lifetime > 0 && now - o.submit_time >= order_lifetime) {
        book.cancel(id);
        continue;
      }
      (o.side == Side::Buy ? state.pending_buy : state.pending_sell) += o.remaining_quantity;
      still_open.push_back(id);
    }
    state.open_order_ids = std::move(still_open);
  }

  void track(const OrderIntent& intent, OrderId id) {
    (intent.side == Side::Buy ? state.pending_buy : state.pending_sell) += intent.quantity;
    state.open_order_ids.push_back(std::move(id));
  }
};

class Simulation {
public:
  explicit Simulation(const SimConfig& config)
      : cfg_(config),
        fees_(FeeSchedule::from_bps(config.rebate_bps)),
        book_(config.asset.ticker),
        p1_arrivals_(config.seed, StreamPurpose::P1Arrivals),
        p2_arrivals_(config.seed, StreamPurpose::P2Arrivals),
        p2_quantity_(config.seed, StreamPurpose::P2Quantity),
        p2_spread_(config.seed, StreamPurpose::P2Spread),
        p3_arrivals_(config.seed, StreamPurpose::P3Arrivals) {
    result_.config = config;
    result_.path = build_fundamental_path(config);

    accounts_.resize(static_cast<std::size_t>(config.participant_count()));
    accounts_[kInsider].cash = config.insider.starting_cash;
    accounts_[kLiquidity].cash = config.liquidity_starting_cash;
    accounts_[kMomentum].cash = config.momentum.starting_cash;

    insider_ = Trader{AgentState{kInsider, config.insider.starting_cash, 0, {}, 0, 0},
                      config.insider.order_lifetime};
    liquidity_ = Trader{AgentState{kLiquidity, config.liquidity_starting_cash, 0, {}, 0, 0},
                        config.liquidity_order_lifetime};
    momentum_ = Trader{AgentState{kMomentum, config.momentum.starting_cash, 0, {}, 0, 0},
                       config.momentum.order_lifetime};

    for (int k = 0; k < config.num_dmms; ++k) {
      const ParticipantId id = kFirstDmm + k;
      dmms_.push_back(DmmState::from_params(id, config.dmm));
      accounts_[static_cast<std::size_t>(id)].cash = config.dmm.starting_cash;
      result_.dmm_equity.push_back({config.dmm.starting_cash});
    }
  }

  SimResult run() {
    for (Timestamp t = 0; t < cfg_.rounds; ++t) step(t);
    result_.final_accounts = accounts_;
    result_.orders = book_.order_log();
    return std::move(result_);
  }

private:
  const std::vector<double>& fundamental() const { return result_.path.values; }

  OrderId submit(Timestamp t, ParticipantId owner, const OrderIntent& intent) {
    Order o;
    o.order_id = make_order_id(t, cfg_.asset.ticker, sequence_++);
    o.owner_id = owner;
    o.submit_time = t;
    o.asset = cfg_.asset.ticker;
    o.side = intent.side;
    o.limit_price = intent.price;
    o.original_quantity = intent.quantity;
    o.remaining_quantity = intent.quantity;
    OrderId id = o.order_id;
    book_.submit(std::move(o));
    return id;
  }

  /// Midprice the DMMs center on: last two-sided mid, else last trade, else the opening price.
  double reference_mid() const {
    if (prev_snapshot_ && prev_snapshot_->midprice) return *prev_snapshot_->midprice;
    if (last_price_) return *last_price_;
    return fundamental().front();
  }

  void step(Timestamp t) {
    const auto& f = fundamental();
    const std::size_t ti = static_cast<std::size_t>(t);

    // (1) order-status updates from the previous timestamp.
    for (Trader* tr : {&insider_, &liquidity_, &momentum_}) {
      tr->refresh(book_, t);
      tr->state.cash = accounts_[static_cast<std::size_t>(tr->state.participant_id)].cash;
      tr->state.inventory = accounts_[static_cast<std::size_t>(tr->state.participant_id)].inventory;
    }

    // (3) trader decisions; P2 sees the book as it stood before this step's flow.
    struct Pending {
      Trader* trader;
      OrderIntent intent;
    };
    std::vector<Pending> flow;
    const P2View view{book_.best_bid(), book_.best_ask(),
                      std::span<const Price>(history_.data(), history_.size())};

    if (t >= 1 && poisson_arrivals(cfg_.insider_arrival, p1_arrivals_) >= 1) {
      if (auto intent = p1_decide(insider_.state, cfg_.insider, f[ti - 1],
                                  f[ti + static_cast<std::size_t>(cfg_.insider.insider_lookahead)])) {
        flow.push_back({&insider_, *intent});
      }
    }
    for (const auto& intent : p2_decide(view, cfg_.noise, cfg_.liquidity_arrival,
                                        P2Streams{p2_arrivals_, p2_quantity_, p2_spread_})) {
      flow.push_back({&liquidity_, intent});
    }
    if (t >= 2 && poisson_arrivals(cfg_.momentum_arrival, p3_arrivals_) >= 1) {
      if (auto intent = p3_decide(momentum_.state, cfg_.momentum, f[ti - 2], f[ti - 1])) {
        flow.push_back({&momentum_, *intent});
      }
    }
    std::vector<Quantity> incoming;
    for (const auto& p : flow) incoming.push_back(p.intent.quantity);

    // (4) DMMs refresh quotes in index order after seeing the traders' flow
    // (not each other's). Their quotes are queued ahead of that flow, so the
    // DMM is the resting side of the trades it facilitates.
    const double s = reference_mid();
    const QuotePolicy policy{fees_.maker_rebate_rate, cfg_.dmm.quote_aggressiveness,
                             cfg_.dmm.min_half_spread};
    for (DmmState& dmm : dmms_) {
      for (const auto& id : dmm.open_quotes) {
        if (book_.order(id).is_open()) book_.cancel(id);
      }
      dmm.open_quotes.clear();
      dmm.inventory = accounts_[static_cast<std::size_t>(dmm.participant_id)].inventory;
      dmm.cash = accounts_[static_cast<std::size_t>(dmm.participant_id)].cash;
      dmm.time_horizon = static_cast<double>(cfg_.rounds - t) / static_cast<double>(cfg_.rounds);
      dmm.record_mid(s);
      const DmmQuote quote = dmm_quote(dmm, make_quote_inputs(dmm, incoming), policy);
      if (quote.bid) dmm.open_quotes.push_back(submit(t, dmm.participant_id, *quote.bid));
      if (quote.ask) dmm.open_quotes.push_back(submit(t, dmm.participant_id, *quote.ask));
      dmm.record_quantities(incoming);
    }
    for (const auto& p : flow) {
      p.trader->track(p.intent, submit(t, p.trader->state.participant_id, p.intent));
    }

    // (5) matching, (6) settlement.
    for (const TradeRecord& trade : book_.match_crossing(t)) {
      for (auto& e : settle_trade(trade, accounts_, fees_)) result_.ledger.push_back(e);
      last_price_ = trade.matched_price.to_double();
      history_.push_back(trade.matched_price);
      if (history_.size() > cfg_.liquidity_history_window) history_.erase(history_.begin());
      result_.trades.push_back(trade);
    }

    // (7) snapshot and report.
    BookSnapshot snap = book_.snapshot(t);
    StepReport report;
    report.time = t;
    report.holdings = accounts_;
    report.price_history = last_price_;
    report.fundamental = f[ti];
    if (snap.midprice) report.difference = std::abs(*snap.midprice - f[ti]) / f[ti];
    result_.steps.push_back(std::move(report));

    const double valuation = snap.midprice ? *snap.midprice : (last_price_ ? *last_price_ : f[ti]);
    for (std::size_t k = 0; k < dmms_.size(); ++k) {
      result_.dmm_equity[k].push_back(
          mark_to_market(accounts_[static_cast<std::size_t>(kFirstDmm) + k], valuation));
    }
    result_.quotes.push_back(snap);
    prev_snapshot_ = std::move(snap);
  }

  SimConfig cfg_;
  FeeSchedule fees_;
  OrderBook book_;
  RandomStream p1_arrivals_;
  RandomStream p2_arrivals_;
  RandomStream p2_quantity_;
  RandomStream p2_spread_;
  RandomStream p3_arrivals_;
  std::vector<Account> accounts_;
  Trader insider_;
  Trader liquidity_;
  Trader momentum_;
  std::vector<DmmState> dmms_;
  std::vector<Price> history_;
  std::optional<double> last_price_;
  std::optional<BookSnapshot> prev_snapshot_;
  std::uint64_t sequence_{0};
  SimResult result_;
};

}  // namespace

SimResult run_simulation(const SimConfig& config) {
  config.validate();
  return Simulation(config).run();
}

}  // namespace dmmsim
