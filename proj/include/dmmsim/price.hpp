#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace dmmsim {

using Timestamp = std::int64_t;
using Quantity = std::int64_t;
using ParticipantId = int;

enum class Side { Buy, Sell };

inline constexpr Side opposite(Side s) noexcept { return s == Side::Buy ? Side::Sell : Side::Buy; }
const char* to_string(Side s) noexcept;

/// Fixed-point price on a 0.01 tick grid.
///
/// Prices are compared and summed in integer ticks so book ordering and
/// depth values are exact; conversion to double happens only at the
/// metrics boundary.
class Price {
public:
  static constexpr std::int64_t kTicksPerUnit = 100;

  constexpr Price() = default;

  static constexpr Price from_ticks(std::int64_t ticks) noexcept {
    Price p;
    p.ticks_ = ticks;
    return p;
  }

  /// Nearest tick, halves rounded up.
  static Price from_double(double value) noexcept;

  constexpr std::int64_t ticks() const noexcept { return ticks_; }
  constexpr double to_double() const noexcept {
    return static_cast<double>(ticks_) / static_cast<double>(kTicksPerUnit);
  }
  constexpr bool positive() const noexcept { return ticks_ > 0; }

  constexpr Price operator+(Price o) const noexcept { return from_ticks(ticks_ + o.ticks_); }
  constexpr Price operator-(Price o) const noexcept { return from_ticks(ticks_ - o.ticks_); }

  auto operator<=>(const Price&) const = default;

  /// Shortest decimal form, e.g. "134.1".
  std::string str() const;

private:
  std::int64_t ticks_{0};
};

inline constexpr Price kTick = Price::from_ticks(1);

/// price × quantity in currency, computed from integer ticks.
double notional(Price price, Quantity quantity) noexcept;

}  // namespace dmmsim
