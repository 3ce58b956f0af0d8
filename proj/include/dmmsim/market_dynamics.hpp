#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "dmmsim/price.hpp"
#include "dmmsim/rng.hpp"

namespace dmmsim {

/// Years per timestamp: one trading minute (252 days × 390 minutes).
inline constexpr double kMinuteYears = 1.0 / (252.0 * 390.0);

/// Extra path values past the last round, for the insider's t+5 signal.
inline constexpr int kLookahead = 5;

struct AssetSpec {
  std::string ticker{"KO"};
  double annual_return{0.0236};
  double annual_volatility{0.13};
  double initial_price{134.0};
  double step_years{kMinuteYears};

  void validate() const;
};

/// Preset by ticker (KO, SBUX, NVDA); throws for unknown tickers.
AssetSpec asset_preset(const std::string& ticker, double initial_price = 134.0);
bool is_asset_preset(const std::string& ticker) noexcept;

struct ShockRecord {
  Timestamp time{0};
  double multiplier{1.0};
  bool operator==(const ShockRecord&) const = default;
};

struct FundamentalPath {
  std::vector<double> values;
  std::vector<ShockRecord> shock_log;

  /// Rounds the path can drive with the insider lookahead honored.
  int usable_rounds() const noexcept {
    return static_cast<int>(values.size()) - kLookahead;
  }
};

struct ArrivalModel {
  double lambda_rate{1.0};
};

struct NoiseDistributions {
  double spread_mean{0.0};
  double spread_sd{0.0};
  double quantity_mean{5.0};
  double quantity_sd{2.0};

  void validate() const;
};

struct ShockSpec {
  Timestamp shock_time{500};
  double multiplier{1.30};
  double convergence_band{0.01};

  void validate() const;
};

/// Log-Euler geometric Brownian motion; `rounds + kLookahead` values.
FundamentalPath generate_fundamental_path(const AssetSpec& spec, int rounds, std::uint64_t seed);

int poisson_arrivals(const ArrivalModel& model, RandomStream& stream);
/// Normal draw clamped at zero.
double draw_spread(const NoiseDistributions& dist, RandomStream& stream);
/// Rounded normal draw truncated to at least one share.
Quantity draw_quantity(const NoiseDistributions& dist, RandomStream& stream);

FundamentalPath apply_shock(FundamentalPath path, const ShockSpec& shock);

/// Reads a "timestamp,price" CSV.
FundamentalPath load_historical_path(const std::filesystem::path& file);
void save_historical_path(const FundamentalPath& path, const std::filesystem::path& file);

}  // namespace dmmsim
