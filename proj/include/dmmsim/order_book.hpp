#pragma once

#include <cstddef>
#include <functional>
#include <list>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "dmmsim/price.hpp"

namespace dmmsim {

enum class OrderStatus { Pending, Executed, Partial, Canceled };
const char* to_string(OrderStatus s) noexcept;

using OrderId = std::string;

struct Order {
  OrderId order_id;
  ParticipantId owner_id{0};
  Timestamp submit_time{0};
  std::string asset;
  Side side{Side::Buy};
  Price limit_price;
  Quantity original_quantity{0};
  Quantity remaining_quantity{0};
  OrderStatus status{OrderStatus::Pending};

  bool is_open() const noexcept {
    return status == OrderStatus::Pending || status == OrderStatus::Partial;
  }
};

struct TradeRecord {
  Timestamp trade_time{0};
  Price matched_price;
  Quantity matched_quantity{0};
  ParticipantId buyer_id{0};
  ParticipantId seller_id{0};
  Side taker_side{Side::Buy};
  OrderId maker_order_id;
  OrderId taker_order_id;

  ParticipantId maker_id() const noexcept {
    return taker_side == Side::Buy ? seller_id : buyer_id;
  }
  /// +1 for buyer-initiated trades, -1 for seller-initiated.
  int sign() const noexcept { return taker_side == Side::Buy ? 1 : -1; }
  bool operator==(const TradeRecord&) const = default;
};

struct BookSnapshot {
  Timestamp time{0};
  std::optional<Price> best_ask;
  std::optional<Price> best_bid;
  std::optional<double> midprice;
  double depth_value_at_best{0.0};

  bool two_sided() const noexcept { return best_ask && best_bid; }
};

class BookError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Single-asset limit order book with price-time priority.
///
/// Submission and matching are separate phases: `submit` only queues an
/// order, `match_crossing` resolves every cross at the end of a timestamp.
/// Within the crossing loop the earlier-submitted order of a pair is the
/// resting (maker) side and sets the execution price. Self-trades never
/// happen: the newer order of a same-owner cross skips to the next eligible
/// counterparty, and if none exists it is canceled (cancel-newest).
class OrderBook {
public:
  explicit OrderBook(std::string asset);

  const std::string& asset() const noexcept { return asset_; }

  void submit(Order order);
  std::vector<TradeRecord> match_crossing(Timestamp time);
  void cancel(const OrderId& order_id);
  BookSnapshot snapshot(Timestamp time) const;

  std::optional<Price> best_bid() const;
  std::optional<Price> best_ask() const;

  const Order& order(const OrderId& order_id) const;
  bool contains(const OrderId& order_id) const noexcept;

  /// Every order ever submitted, in submission order, with current state.
  const std::vector<Order>& order_log() const noexcept { return orders_; }

  /// Resting orders of one side in priority order.
  std::vector<const Order*> resting(Side side) const;
  Quantity resting_quantity(Side side) const;

private:
  using Queue = std::list<std::size_t>;
  using BidLevels = std::map<Price, Queue, std::greater<>>;
  using AskLevels = std::map<Price, Queue>;

  void enqueue(std::size_t idx);
  void dequeue(std::size_t idx);
  std::optional<std::size_t> find_counterparty(std::size_t incoming) const;
  TradeRecord execute(std::size_t bid_idx, std::size_t ask_idx, Timestamp time);

  std::string asset_;
  std::vector<Order> orders_;
  std::vector<Queue::iterator> positions_;
  std::unordered_map<OrderId, std::size_t> index_;
  BidLevels bids_;
  AskLevels asks_;
};

}  // namespace dmmsim
