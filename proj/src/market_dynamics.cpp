#include "dmmsim/market_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "dmmsim/csv.hpp"

namespace dmmsim {

void AssetSpec::validate() const {
  if (ticker.empty()) throw std::invalid_argument("asset: empty ticker");
  if (!(annual_volatility >= 0.0)) throw std::invalid_argument("asset: volatility must be >= 0");
  if (!(initial_price > 0.0)) throw std::invalid_argument("asset: initial price must be > 0");
  if (!(step_years > 0.0)) throw std::invalid_argument("asset: step_years must be > 0");
}

namespace {

struct Preset {
  const char* ticker;
  double annual_return;
  double annual_volatility;
};

constexpr Preset kPresets[] = {
    {"KO", 0.0236, 0.13},
    {"SBUX", -0.27, 0.254},
    {"NVDA", 2.07, 0.495},
};

}  // namespace

AssetSpec asset_preset(const std::string& ticker, double initial_price) {
  for (const auto& p : kPresets) {
    if (ticker == p.ticker) {
      return AssetSpec{p.ticker, p.annual_return, p.annual_volatility, initial_price, kMinuteYears};
    }
  }
  throw std::invalid_argument("unknown asset preset: " + ticker);
}

bool is_asset_preset(const std::string& ticker) noexcept {
  for (const auto& p : kPresets) {
    if (ticker == p.ticker) return true;
  }
  return false;
}

void NoiseDistributions::validate() const {
  if (!(spread_sd >= 0.0)) throw std::invalid_argument("noise: spread_sd must be >= 0");
  if (!(quantity_sd >= 0.0)) throw std::invalid_argument("noise: quantity_sd must be >= 0");
}

void ShockSpec::validate() const {
  if (shock_time < 1) throw std::invalid_argument("shock: shock_time must be >= 1");
  if (!(multiplier > 0.0)) throw std::invalid_argument("shock: multiplier must be > 0");
  if (!(convergence_band > 0.0)) throw std::invalid_argument("shock: convergence_band must be > 0");
}

FundamentalPath generate_fundamental_path(const AssetSpec& spec, int rounds, std::uint64_t seed) {
  spec.validate();
  if (rounds < 1) throw std::invalid_argument("generate_fundamental_path: rounds must be >= 1");
  RandomStream stream(seed);
  const double drift = (spec.annual_return - 0.5 * spec.annual_volatility * spec.annual_volatility) *
                       spec.step_years;
  const double diffusion = spec.annual_volatility * std::sqrt(spec.step_years);

  FundamentalPath path;
  const std::size_t n = static_cast<std::size_t>(rounds) + kLookahead;
  path.values.reserve(n);
  path.values.push_back(spec.initial_price);
  for (std::size_t k = 1; k < n; ++k) {
    const double z = stream.standard_normal();
    path.values.push_back(path.values.back() * std::exp(drift + diffusion * z));
  }
  return path;
}

int poisson_arrivals(const ArrivalModel& model, RandomStream& stream) {
  if (!(model.lambda_rate >= 0.0)) throw std::invalid_argument("arrival rate must be >= 0");
  return stream.poisson(model.lambda_rate);
}

double draw_spread(const NoiseDistributions& dist, RandomStream& stream) {
  return std::max(0.0, stream.normal(dist.spread_mean, dist.spread_sd));
}

Quantity draw_quantity(const NoiseDistributions& dist, RandomStream& stream) {
  const double raw = stream.normal(dist.quantity_mean, dist.quantity_sd);
  return std::max<Quantity>(1, std::llround(raw));
}

FundamentalPath apply_shock(FundamentalPath path, const ShockSpec& shock) {
  if (shock.shock_time < 1 || shock.shock_time >= static_cast<Timestamp>(path.values.size())) {
    throw std::out_of_range("apply_shock: shock_time " + std::to_string(shock.shock_time) +
                            " outside path of length " + std::to_string(path.values.size()));
  }
  if (!(shock.multiplier > 0.0)) throw std::invalid_argument("apply_shock: multiplier must be > 0");
  for (std::size_t k = static_cast<std::size_t>(shock.shock_time); k < path.values.size(); ++k) {
    path.values[k] *= shock.multiplier;
  }
  path.shock_log.push_back({shock.shock_time, shock.multiplier});
  return path;
}

FundamentalPath load_historical_path(const std::filesystem::path& file) {
  const std::string text = read_text_file(file);
  FundamentalPath path;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool header_seen = false;
  long long last_ts = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const auto line = trim(std::string_view(text).substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    auto where = [&] { return file.string() + ":" + std::to_string(line_no) + ": "; };
    if (!header_seen) {
      if (line != "timestamp,price") {
        throw std::runtime_error(where() + "expected header 'timestamp,price'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 2) throw std::runtime_error(where() + "expected 2 fields");
    long long ts = 0;
    double price = 0.0;
    try {
      ts = parse_integer(fields[0]);
      price = parse_double(fields[1]);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where() + "malformed row: " + e.what());
    }
    if (!path.values.empty() && ts <= last_ts) {
      throw std::runtime_error(where() + "timestamps must be strictly increasing");
    }
    if (!(price > 0.0) || !std::isfinite(price)) {
      throw std::runtime_error(where() + "price must be > 0");
    }
    last_ts = ts;
    path.values.push_back(price);
  }
  if (!header_seen) throw std::runtime_error(file.string() + ": empty file");
  if (path.usable_rounds() < 1) {
    throw std::runtime_error(file.string() + ": need at least " + std::to_string(kLookahead + 1) +
                             " rows, found " + std::to_string(path.values.size()));
  }
  return path;
}

void save_historical_path(const FundamentalPath& path, const std::filesystem::path& file) {
  CsvWriter w;
  w.row({"timestamp", "price"});
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    w.row({std::to_string(k), format_double(path.values[k])});
  }
  w.write(file);
}

}  // namespace dmmsim
