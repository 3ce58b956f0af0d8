#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dmmsim/agents.hpp"
#include "dmmsim/market_dynamics.hpp"
#include "dmmsim/order_book.hpp"

namespace dmmsim {

/// Fixed participant indices; DMM k (0-based) is kFirstDmm + k.
inline constexpr ParticipantId kInsider = 0;
inline constexpr ParticipantId kLiquidity = 1;
inline constexpr ParticipantId kMomentum = 2;
inline constexpr ParticipantId kFirstDmm = 3;

struct SimConfig {
  int rounds{1000};
  int num_dmms{1};
  int rebate_bps{20};
  AssetSpec asset{};
  AgentParams insider{};
  AgentParams momentum{};
  double liquidity_starting_cash{100.0};
  int liquidity_order_lifetime{10};
  /// Most recent executions P2 consults when a book side is empty.
  std::size_t liquidity_history_window{20};
  DmmParams dmm{};
  NoiseDistributions noise{};
  ArrivalModel insider_arrival{1.0};
  ArrivalModel liquidity_arrival{0.5};
  ArrivalModel momentum_arrival{1.0};
  std::optional<ShockSpec> shock;
  /// Replaces the generated GBM path when set.
  std::optional<FundamentalPath> historical_path;
  std::uint64_t seed{1};

  void validate() const;
  int participant_count() const noexcept { return kFirstDmm + num_dmms; }
};

struct FeeSchedule {
  double maker_rebate_rate{0.0};
  double taker_fee_rate{0.0};

  static FeeSchedule from_bps(int rebate_bps);
};

enum class LedgerReason { Trade, Rebate, Fee };

struct LedgerEntry {
  Timestamp time{0};
  ParticipantId participant{0};
  double cash_delta{0.0};
  Quantity inventory_delta{0};
  LedgerReason reason{LedgerReason::Trade};
};

struct Account {
  double cash{0.0};
  Quantity inventory{0};
};

struct StepReport {
  Timestamp time{0};
  /// Indexed by participant id.
  std::vector<Account> holdings;
  /// Last execution price, carried forward; empty before the first trade.
  std::optional<double> price_history;
  double fundamental{0.0};
  /// |mid - fundamental| / fundamental; empty when the book is one-sided.
  std::optional<double> difference;
};

struct SimResult {
  SimConfig config;
  FundamentalPath path;
  std::vector<TradeRecord> trades;
  std::vector<BookSnapshot> quotes;
  std::vector<StepReport> steps;
  std::vector<LedgerEntry> ledger;
  std::vector<Account> final_accounts;
  /// Final state of every submitted order, in submission order.
  std::vector<Order> orders;
  /// Mark-to-market equity per DMM per timestamp, starting with the pre-trading value.
  std::vector<std::vector<double>> dmm_equity;

  bool is_dmm(ParticipantId id) const noexcept {
    return id >= kFirstDmm && id < config.participant_count();
  }
};

/// Transfers cash and inventory for one trade and credits the maker rebate.
/// Returns the ledger entries it applied.
std::vector<LedgerEntry> settle_trade(const TradeRecord& trade, std::vector<Account>& accounts,
                                      const FeeSchedule& fees);

double mark_to_market(const Account& account, double valuation_price) noexcept;

/// Fundamental path for a config: historical or generated, with the shock applied.
FundamentalPath build_fundamental_path(const SimConfig& config);

SimResult run_simulation(const SimConfig& config);

/// "<time><asset><sequence>", e.g. "1IBM35".
std::string make_order_id(Timestamp time, const std::string& asset, std::uint64_t sequence);

}  // namespace dmmsim
