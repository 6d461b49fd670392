#include "mcm/rng.hpp"

#include <cmath>
#include <numbers>

#include "mcm/error.hpp"

namespace mcm {

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "index() over an empty range");
  // Lemire-style rejection keeps the draw unbiased.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return static_cast<std::size_t>(x % bound);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::vector<double> Rng::flat_dirichlet(std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) {
    x = exponential();
    total += x;
  }
  for (auto& x : w) x /= total;
  return w;
}

std::size_t Rng::categorical(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  // Rounding can leave u marginally past the last bucket.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "categorical() with no positive weight");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finaliser
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidProportion: return "InvalidProportion";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EqualInputs: return "EqualInputs";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::PreconditionB1: return "PreconditionB1";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::LoopCapExceeded: return "LoopCapExceeded";
    case ErrorCode::DuplicateColumns: return "DuplicateColumns";
    case ErrorCode::ConditionDViolated: return "ConditionDViolated";
    case ErrorCode::KappaOne: return "KappaOne";
    case ErrorCode::EmptyCandidateFamily: return "EmptyCandidateFamily";
    case ErrorCode::CountMismatch: return "CountMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace mcm
