#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace mcm {

/// Seeded random source whose draws are reproducible across standard
/// libraries. Only the engine comes from <random>; the distribution
/// transforms are written out here because the std:: distributions are
/// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on {0, ..., n-1}.
  std::size_t index(std::size_t n);

  double exponential() { return -std::log1p(-uniform()); }

  double normal();

  /// Dirichlet(1, ..., 1) on k outcomes.
  std::vector<double> flat_dirichlet(std::size_t k);

  /// Draws an index with probability proportional to `weights`.
  std::size_t categorical(const std::vector<double>& weights);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Mixes a base seed with a stream tag so independent stages draw from
/// decorrelated engines.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace mcm
