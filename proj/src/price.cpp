#include "dmmsim/price.hpp"

#include <cmath>

#include "dmmsim/csv.hpp"

namespace dmmsim {

const char* to_string(Side s) noexcept { return s == Side::Buy ? "BUY" : "SELL"; }

Price Price::from_double(double value) noexcept {
  // The epsilon absorbs binary representation error so that e.g. 102.005 rounds up.
  const double scaled = value * static_cast<double>(kTicksPerUnit);
  return from_ticks(static_cast<std::int64_t>(std::floor(scaled + 0.5 + 1e-7)));
}

std::string Price::str() const { return format_double(to_double()); }

double notional(Price price, Quantity quantity) noexcept {
  return static_cast<double>(price.ticks() * quantity) / static_cast<double>(Price::kTicksPerUnit);
}

}  // namespace dmmsim
