#include "dmmsim/order_book.hpp"

#include <algorithm>

namespace dmmsim {

const char* to_string(OrderStatus s) noexcept {
  switch (s) {
    case OrderStatus::Pending: return "PENDING";
    case OrderStatus::Executed: return "EXECUTED";
    case OrderStatus::Partial: return "PARTIAL";
    case OrderStatus::Canceled: return "CANCELED";
  }
  return "UNKNOWN";
}

OrderBook::OrderBook(std::string asset) : asset_(std::move(asset)) {}

void OrderBook::submit(Order order) {
  if (order.order_id.empty()) throw BookError("order rejected: empty order_id");
  if (index_.contains(order.order_id)) {
    throw BookError("order rejected: duplicate order_id " + order.order_id);
  }
  if (order.original_quantity <= 0) {
    throw BookError("order rejected: non-positive quantity for " + order.order_id);
  }
  if (!order.limit_price.positive()) {
    throw BookError("order rejected: non-positive price for " + order.order_id);
  }
  if (order.remaining_quantity != order.original_quantity) {
    throw BookError("order rejected: remaining != original quantity for " + order.order_id);
  }
  if (order.asset != asset_) {
    throw BookError("order rejected: asset " + order.asset + " does not trade in this book");
  }
  order.status = OrderStatus::Pending;
  const std::size_t idx = orders_.size();
  index_.emplace(order.order_id, idx);
  orders_.push_back(std::move(order));
  positions_.emplace_back();
  enqueue(idx);
}

void OrderBook::enqueue(std::size_t idx) {
  const Order& o = orders_[idx];
  Queue& q = o.side == Side::Buy ? bids_[o.limit_price] : asks_[o.limit_price];
  positions_[idx] = q.insert(q.end(), idx);
}

void OrderBook::dequeue(std::size_t idx) {
  const Order& o = orders_[idx];
  auto drop = [&](auto& levels) {
    auto it = levels.find(o.limit_price);
    it->second.erase(positions_[idx]);
    if (it->second.empty()) levels.erase(it);
  };
  if (o.side == Side::Buy) {
    drop(bids_);
  } else {
    drop(asks_);
  }
}

std::optional<std::size_t> OrderBook::find_counterparty(std::size_t incoming) const {
  const Order& in = orders_[incoming];
  auto scan = [&](const auto& levels, auto crosses) -> std::optional<std::size_t> {
    for (const auto& [price, queue] : levels) {
      if (!crosses(price)) break;
      for (std::size_t idx : queue) {
        if (orders_[idx].owner_id != in.owner_id) return idx;
      }
    }
    return std::nullopt;
  };
  if (in.side == Side::Buy) {
    return scan(asks_, [&](Price p) { return p <= in.limit_price; });
  }
  return scan(bids_, [&](Price p) { return p >= in.limit_price; });
}

TradeRecord OrderBook::execute(std::size_t bid_idx, std::size_t ask_idx, Timestamp time) {
  Order& bid = orders_[bid_idx];
  Order& ask = orders_[ask_idx];
  const bool bid_rests = bid_idx < ask_idx;
  const Order& maker = bid_rests ? bid : ask;
  const Order& taker = bid_rests ? ask : bid;

  TradeRecord trade;
  trade.trade_time = time;
  trade.matched_price = maker.limit_price;
  trade.matched_quantity = std::min(bid.remaining_quantity, ask.remaining_quantity);
  trade.buyer_id = bid.owner_id;
  trade.seller_id = ask.owner_id;
  trade.taker_side = taker.side;
  trade.maker_order_id = maker.order_id;
  trade.taker_order_id = taker.order_id;

  for (std::size_t idx : {bid_idx, ask_idx}) {
    Order& o = orders_[idx];
    o.remaining_quantity -= trade.matched_quantity;
    if (o.remaining_quantity == 0) {
      o.status = OrderStatus::Executed;
      dequeue(idx);
    } else {
      o.status = OrderStatus::Partial;
    }
  }
  return trade;
}

std::vector<TradeRecord> OrderBook::match_crossing(Timestamp time) {
  std::vector<TradeRecord> trades;
  while (!bids_.empty() && !asks_.empty()) {
    const auto& [bid_price, bid_queue] = *bids_.begin();
    const auto& [ask_price, ask_queue] = *asks_.begin();
    if (bid_price < ask_price) break;

    const std::size_t b = bid_queue.front();
    const std::size_t a = ask_queue.front();
    if (orders_[b].owner_id != orders_[a].owner_id) {
      trades.push_back(execute(b, a, time));
      continue;
    }

    const std::size_t incoming = std::max(a, b);
    if (auto other = find_counterparty(incoming)) {
      const bool incoming_is_bid = orders_[incoming].side == Side::Buy;
      trades.push_back(incoming_is_bid ? execute(incoming, *other, time)
                                       : execute(*other, incoming, time));
    } else {
      orders_[incoming].status = OrderStatus::Canceled;
      dequeue(incoming);
    }
  }
  return trades;
}

void OrderBook::cancel(const OrderId& order_id) {
  auto it = index_.find(order_id);
  if (it == index_.end()) throw BookError("cancel failed: unknown order_id " + order_id);
  Order& o = orders_[it->second];
  if (!o.is_open()) {
    throw BookError("cancel failed: order " + order_id + " is " + to_string(o.status));
  }
  dequeue(it->second);
  o.status = OrderStatus::Canceled;
}

std::optional<Price> OrderBook::best_bid() const {
  if (bids_.empty()) return std::nullopt;
  return bids_.begin()->first;
}

std::optional<Price> OrderBook::best_ask() const {
  if (asks_.empty()) return std::nullopt;
  return asks_.begin()->first;
}

BookSnapshot OrderBook::snapshot(Timestamp time) const {
  BookSnapshot snap;
  snap.time = time;
  snap.best_bid = best_bid();
  snap.best_ask = best_ask();
  if (snap.two_sided()) {
    snap.midprice = (snap.best_ask->to_double() + snap.best_bid->to_double()) / 2.0;
  }
  std::int64_t tick_value = 0;
  auto level_value = [&](const Queue& q) {
    for (std::size_t idx : q) {
      tick_value += orders_[idx].limit_price.ticks() * orders_[idx].remaining_quantity;
    }
  };
  if (!bids_.empty()) level_value(bids_.begin()->second);
  if (!asks_.empty()) level_value(asks_.begin()->second);
  snap.depth_value_at_best =
      static_cast<double>(tick_value) / static_cast<double>(Price::kTicksPerUnit);
  return snap;
}

const Order& OrderBook::order(const OrderId& order_id) const {
  auto it = index_.find(order_id);
  if (it == index_.end()) throw BookError("unknown order_id " + order_id);
  return orders_[it->second];
}

bool OrderBook::contains(const OrderId& order_id) const noexcept {
  return index_.contains(order_id);
}

std::vector<const Order*> OrderBook::resting(Side side) const {
  std::vector<const Order*> out;
  auto collect = [&](const auto& levels) {
    for (const auto& [price, queue] : levels) {
      for (std::size_t idx : queue) out.push_back(&orders_[idx]);
    }
  };
  if (side == Side::Buy) {
    collect(bids_);
  } else {
    collect(asks_);
  }
  return out;
}

Quantity OrderBook::resting_quantity(Side side) const {
  Quantity total = 0;
  for (const Order* o : resting(side)) total += o->remaining_quantity;
  return total;
}

}  // namespace dmmsim
