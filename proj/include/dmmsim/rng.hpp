#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dmmsim {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Folds a list of integer tags into one seed. Order-sensitive and pure.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept;

/// Named sub-streams of one trial; each purpose draws from its own generator.
enum class StreamPurpose : std::uint64_t {
  Fundamental = 1,
  P1Arrivals,
  P2Arrivals,
  P2Quantity,
  P2Spread,
  P3Arrivals,
  DmmSelection,
};

/// Seeded random source. Draw methods are total over their documented domains.
class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  RandomStream(std::uint64_t trial_seed, StreamPurpose purpose)
      : engine_(derive_seed(trial_seed, {static_cast<std::uint64_t>(purpose)})) {}

  double standard_normal();
  double normal(double mean, double sd);
  /// Poisson(lambda); lambda == 0 always yields 0.
  int poisson(double lambda);
  /// Uniform in [0, n).
  std::size_t uniform_index(std::size_t n);

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace dmmsim
