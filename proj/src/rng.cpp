#include "dmmsim/rng.hpp"

#include <stdexcept>

namespace dmmsim {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) noexcept {
  std::uint64_t h = mix64(base);
  for (std::uint64_t tag : tags) h = mix64(h ^ mix64(tag));
  return h;
}

double RandomStream::standard_normal() { return normal_(engine_); }

double RandomStream::normal(double mean, double sd) {
  if (sd == 0.0) return mean;
  return mean + sd * standard_normal();
}

int RandomStream::poisson(double lambda) {
  if (lambda <= 0.0) return 0;
  std::poisson_distribution<int> dist(lambda);
  return dist(engine_);
}

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

}  // namespace dmmsim
