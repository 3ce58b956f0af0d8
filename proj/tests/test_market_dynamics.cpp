#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dmmsim/market_dynamics.hpp"

using namespace dmmsim;

namespace {

struct Moments {
  double mean{0.0};
  double variance{0.0};
  std::size_t n{0};
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.n = xs.size();
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(m.n);
  for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
  m.variance /= static_cast<double>(m.n - 1);
  return m;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dmmsim_md_" + name);
}

}  // namespace

TEST_CASE("asset presets") {
  const auto ko = asset_preset("KO");
  CHECK(ko.annual_return == 0.0236);
  CHECK(ko.annual_volatility == 0.13);
  const auto sbux = asset_preset("SBUX");
  CHECK(sbux.annual_return == -0.27);
  CHECK(sbux.annual_volatility == 0.254);
  const auto nvda = asset_preset("NVDA", 50.0);
  CHECK(nvda.annual_return == 2.07);
  CHECK(nvda.annual_volatility == 0.495);
  CHECK(nvda.initial_price == 50.0);
  CHECK(is_asset_preset("KO"));
  CHECK_FALSE(is_asset_preset("IBM"));
  CHECK_THROWS_AS(asset_preset("IBM"), std::invalid_argument);
}

TEST_CASE("zero-volatility paths are deterministic") {
  AssetSpec flat{"X", 0.0, 0.0, 100.0};
  const auto p = generate_fundamental_path(flat, 50, 3);
  REQUIRE(p.values.size() == 55u);
  CHECK(p.usable_rounds() == 50);
  for (double v : p.values) CHECK(v == 100.0);

  AssetSpec drift{"X", 0.5, 0.0, 100.0};
  const auto d = generate_fundamental_path(drift, 20, 3);
  for (std::size_t k = 0; k < d.values.size(); ++k) {
    CHECK(d.values[k] == doctest::Approx(100.0 * std::exp(0.5 * kMinuteYears * static_cast<double>(k))).epsilon(1e-12));
  }
}

TEST_CASE("generated paths are reproducible from the seed") {
  const auto spec = asset_preset("NVDA");
  CHECK(generate_fundamental_path(spec, 100, 9).values == generate_fundamental_path(spec, 100, 9).values);
  CHECK(generate_fundamental_path(spec, 100, 9).values != generate_fundamental_path(spec, 100, 10).values);
  CHECK_THROWS_AS(generate_fundamental_path(spec, 0, 1), std::invalid_argument);
  AssetSpec bad = spec;
  bad.initial_price = 0.0;
  CHECK_THROWS_AS(generate_fundamental_path(bad, 10, 1), std::invalid_argument);
}

TEST_CASE("log returns of a long path match the lognormal step moments") {
  const auto spec = asset_preset("KO");
  const auto path = generate_fundamental_path(spec, 100000, 17);
  std::vector<double> r;
  for (std::size_t k = 1; k < path.values.size(); ++k) r.push_back(std::log(path.values[k] / path.values[k - 1]));
  const Moments m = moments(r);
  const double sigma2 = spec.annual_volatility * spec.annual_volatility * spec.step_years;
  const double mu = (spec.annual_return - 0.5 * spec.annual_volatility * spec.annual_volatility) * spec.step_years;
  const double n = static_cast<double>(m.n);
  CHECK(std::abs(m.mean - mu) < 3.0 * std::sqrt(sigma2 / n));
  CHECK(std::abs(m.variance - sigma2) < 3.0 * sigma2 * std::sqrt(2.0 / (n - 1.0)));
}

TEST_CASE("poisson arrivals") {
  RandomStream s(11);
  CHECK(poisson_arrivals({0.0}, s) == 0);
  CHECK_THROWS_AS(poisson_arrivals({-1.0}, s), std::invalid_argument);
  const int n = 100000;
  int zeros = 0;
  for (int i = 0; i < n; ++i) zeros += poisson_arrivals({1.0}, s) == 0 ? 1 : 0;
  const double p0 = std::exp(-1.0);
  CHECK(std::abs(static_cast<double>(zeros) / n - p0) < 3.0 * std::sqrt(p0 * (1 - p0) / n));
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += poisson_arrivals({4.0}, s);
  CHECK(std::abs(sum / n - 4.0) < 3.0 * std::sqrt(4.0 / n));
}

TEST_CASE("spread and quantity draws") {
  RandomStream s(12);
  NoiseDistributions fixed{0.03, 0.0, 5.0, 0.0};
  for (int i = 0; i < 10; ++i) {
    CHECK(draw_spread(fixed, s) == 0.03);
    CHECK(draw_quantity(fixed, s) == 5);
  }
  NoiseDistributions negative{-1.0, 0.0, -4.0, 0.0};
  CHECK(draw_spread(negative, s) == 0.0);
  CHECK(draw_quantity(negative, s) == 1);

  NoiseDistributions noisy{0.5, 0.1, 20.0, 2.0};
  const int n = 100000;
  double spread_sum = 0.0;
  double qty_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    spread_sum += draw_spread(noisy, s);
    const Quantity q = draw_quantity(noisy, s);
    CHECK(q >= 1);
    qty_sum += static_cast<double>(q);
  }
  CHECK(std::abs(spread_sum / n - 0.5) < 3.0 * 0.1 / std::sqrt(n));
  // Rounding to whole shares adds variance 1/12.
  CHECK(std::abs(qty_sum / n - 20.0) < 3.0 * std::sqrt(4.0 + 1.0 / 12.0) / std::sqrt(n));

  NoiseDistributions bad{0.0, -1.0, 5.0, 2.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("shocks scale the path from the shock time on") {
  FundamentalPath p;
  p.values.assign(20, 100.0);
  const auto same = apply_shock(p, {5, 1.0});
  CHECK(same.values == p.values);
  const auto shocked = apply_shock(p, {10, 1.3});
  for (std::size_t k = 0; k < 20; ++k) CHECK(shocked.values[k] == doctest::Approx(k < 10 ? 100.0 : 130.0));
  REQUIRE(shocked.shock_log.size() == 1u);
  CHECK(shocked.shock_log[0] == ShockRecord{10, 1.3});
  CHECK_THROWS_AS(apply_shock(p, {20, 1.3}), std::out_of_range);
  CHECK_THROWS_AS(apply_shock(p, {0, 1.3}), std::out_of_range);
  CHECK_THROWS_AS(apply_shock(p, {3, 0.0}), std::invalid_argument);
}

TEST_CASE("historical paths round-trip and validate") {
  const auto file = temp_file("path.csv");
  const auto path = generate_fundamental_path(asset_preset("SBUX"), 1000, 5);
  save_historical_path(path, file);
  const auto loaded = load_historical_path(file);
  CHECK(loaded.values == path.values);
  CHECK(loaded.values.size() == 1005u);
  CHECK(loaded.usable_rounds() == 1000);

  auto write = [&](const std::string& text) {
    std::ofstream(file) << text;
    return file;
  };
  CHECK_THROWS_AS(load_historical_path(write("timestamp,price\n0,1\n1,0\n2,1\n3,1\n4,1\n5,1\n")), std::runtime_error);
  CHECK_THROWS_AS(load_historical_path(write("timestamp,price\n0,1\n1,1\n")), std::runtime_error);
  CHECK_THROWS_AS(load_historical_path(write("timestamp,price\n0,1\n1,abc\n")), std::runtime_error);
  CHECK_THROWS_AS(load_historical_path(write("time,value\n0,1\n")), std::runtime_error);
  CHECK_THROWS_AS(load_historical_path(write("")), std::runtime_error);
  CHECK_THROWS_AS(load_historical_path(temp_file("missing.csv")), std::runtime_error);
  std::filesystem::remove(file);
}
