#pragma once

#include "fairkm/errors.hpp"
#include "fairkm/rational.hpp"

#include <cmath>
#include <cstdint>

namespace fairkm {

struct FairletIntegers
{
  std::int64_t p{0};
  std::int64_t q{1};
  Rational     achieved;  // p/q in lowest terms
};

inline constexpr std::int64_t kFairletMaxDenominator = 1000;

/// Largest p/q <= target with q <= 1000, p = floor(q * target). Ties keep the
/// smallest q.
inline FairletIntegers get_fairlet_integers(Rational const &target)
{
  if (target < Rational(0) || target > Rational(1))
  {
    throw InvalidInput("fairlet target must lie in [0,1], got " + target.str());
  }
  FairletIntegers best;
  Rational        best_ratio(0);
  for (std::int64_t q = 1; q <= kFairletMaxDenominator; ++q)
  {
    std::int64_t const p = target.floor_times(q);
    Rational const     r(p, q);
    if (r > best_ratio)
    {
      best_ratio = r;
      best.p     = p;
      best.q     = q;
    }
  }
  best.achieved = best_ratio;
  return best;
}

/// Floating-point input: p = floor(q * target) evaluated in double.
inline FairletIntegers get_fairlet_integers(double target)
{
  if (!(target >= 0.0 && target <= 1.0))
  {
    throw InvalidInput("fairlet target must lie in [0,1]");
  }
  FairletIntegers best;
  double          best_ratio = 0.0;
  for (std::int64_t q = 1; q <= kFairletMaxDenominator; ++q)
  {
    auto const   p = static_cast<std::int64_t>(std::floor(static_cast<double>(q) * target));
    double const r = static_cast<double>(p) / static_cast<double>(q);
    if (r > best_ratio)
    {
      best_ratio = r;
      best.p     = p;
      best.q     = q;
    }
  }
  best.achieved = Rational(best.p, best.q);
  return best;
}

}  // namespace fairkm
