#pragma once

namespace mcm {

/// Numerical thresholds shared by the exact and finite-sample engines.
///
/// `clamp` absorbs representation noise when a vector is accepted as a point
/// of the simplex; `support` is the decision threshold for "this entry is
/// positive" and for equality of proportions.
struct Tolerances {
  double clamp = 1e-12;
  double support = 1e-9;
  double sum = 1e-9;
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace mcm
