#pragma once

#include "fairkm/core.hpp"
#include "fairkm/rational.hpp"

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairkm {

/// Balance of a single cluster from its per-group member counts: the minimum
/// over ordered group pairs of count(g)/count(g'). Pairs where both counts are
/// zero are skipped; a zero numerator against a positive denominator gives 0.
inline Rational cluster_balance(std::span<std::int64_t const> member_counts)
{
  std::int64_t lo    = -1;
  std::int64_t hi    = 0;
  std::int64_t total = 0;
  for (auto c : member_counts)
  {
    if (c < 0)
    {
      throw InvalidInput("cluster_balance: negative count");
    }
    lo = lo < 0 ? c : std::min(lo, c);
    hi = std::max(hi, c);
    total += c;
  }
  if (total == 0)
  {
    throw InvalidInput("cluster_balance: empty cluster");
  }
  if (member_counts.size() < 2)
  {
    return Rational(1);
  }
  return Rational(lo, hi);
}

/// counts[j][g]: members of cluster j in group g of feature s.
inline std::vector<std::vector<std::int64_t>> cluster_group_counts(std::span<Label const> labels,
                                                                   Dataset const         &data,
                                                                   std::size_t            s,
                                                                   std::size_t            k)
{
  auto const &feat = data.feature(s);
  if (labels.size() != data.n())
  {
    throw InvalidInput("labels cover " + std::to_string(labels.size()) + " objects, dataset has " +
                       std::to_string(data.n()));
  }
  std::vector<std::vector<std::int64_t>> counts(k, std::vector<std::int64_t>(feat.group_count()));
  for (std::size_t i = 0; i < labels.size(); ++i)
  {
    auto const j = labels[i];
    if (j < 0 || static_cast<std::size_t>(j) >= k)
    {
      throw InvalidInput("label " + std::to_string(j) + " of object " + std::to_string(i) +
                         " outside [0," + std::to_string(k) + ")");
    }
    ++counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(feat.membership[i])];
  }
  return counts;
}

/// Minimum cluster balance over all k clusters for feature s.
inline Rational clustering_balance(std::span<Label const> labels, Dataset const &data, std::size_t s,
                                   std::size_t k)
{
  auto const counts = cluster_group_counts(labels, data, s, k);
  Rational   best(1);
  for (std::size_t j = 0; j < k; ++j)
  {
    std::int64_t total = 0;
    for (auto c : counts[j])
    {
      total += c;
    }
    if (total == 0)
    {
      throw InvalidInput("clustering_balance: cluster " + std::to_string(j) + " is empty");
    }
    best = std::min(best, cluster_balance(counts[j]));
  }
  return best;
}

inline Rational dataset_balance(Dataset const &data, std::size_t s)
{
  return cluster_balance(group_counts(data, s));
}

/// Largest balance guaranteed attainable with k clusters:
/// floor(min_g |G_g| / k) / ceil(max_g |G_g| / k).
inline Rational feasible_balance(Dataset const &data, std::size_t s, std::size_t k)
{
  if (k == 0)
  {
    throw InvalidInput("feasible_balance: k must be at least 1");
  }
  auto const counts = group_counts(data, s);
  auto const [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  auto const kk       = static_cast<std::int64_t>(k);
  std::int64_t const num = *lo / kk;
  std::int64_t const den = (*hi + kk - 1) / kk;
  if (num == 0)
  {
    return Rational(0);
  }
  return Rational(num, den);
}

/// Either a tolerance lambda in [0,1] applied to a reference balance, or explicit
/// per-feature targets.
struct FairnessSpec
{
  enum class Mode
  {
    Tolerance,
    Explicit
  };
  enum class Reference
  {
    FeasibleBalance,  // B_s(X,k), used in all experiments
    DatasetBalance    // B_s(X)
  };

  Mode                  mode{Mode::Tolerance};
  Rational              lambda{1};
  std::vector<Rational> explicit_targets;
  Reference             reference{Reference::FeasibleBalance};

  static FairnessSpec tolerance(Rational lambda, Reference ref = Reference::FeasibleBalance)
  {
    FairnessSpec spec;
    spec.mode      = Mode::Tolerance;
    spec.lambda    = lambda;
    spec.reference = ref;
    return spec;
  }
  static FairnessSpec targets(std::vector<Rational> per_feature)
  {
    FairnessSpec spec;
    spec.mode             = Mode::Explicit;
    spec.explicit_targets = std::move(per_feature);
    return spec;
  }
  static FairnessSpec vanilla() { return tolerance(Rational(1)); }
};

struct ResolvedTargets
{
  std::vector<Rational>    targets;
  std::vector<std::string> warnings;

  [[nodiscard]] bool all_zero() const
  {
    return std::all_of(targets.begin(), targets.end(), [](Rational const &t) { return t.is_zero(); });
  }
};

inline ResolvedTargets resolve_targets(FairnessSpec const &spec, Dataset const &data, std::size_t k)
{
  ResolvedTargets out;
  auto const      features = data.feature_count();
  if (spec.mode == FairnessSpec::Mode::Tolerance)
  {
    if (spec.lambda < Rational(0) || spec.lambda > Rational(1))
    {
      throw InvalidInput("lambda must lie in [0,1], got " + spec.lambda.str());
    }
    for (std::size_t s = 0; s < features; ++s)
    {
      Rational const ref = spec.reference == FairnessSpec::Reference::FeasibleBalance
                               ? feasible_balance(data, s, k)
                               : dataset_balance(data, s);
      out.targets.push_back((Rational(1) - spec.lambda) * ref);
    }
    return out;
  }
  if (spec.explicit_targets.size() != features)
  {
    throw InvalidInput("expected " + std::to_string(features) + " explicit targets, got " +
                       std::to_string(spec.explicit_targets.size()));
  }
  for (std::size_t s = 0; s < features; ++s)
  {
    auto const &t = spec.explicit_targets[s];
    if (t < Rational(0) || t > Rational(1))
    {
      throw InvalidInput("target for feature '" + data.feature(s).name + "' must lie in [0,1], got " +
                         t.str());
    }
    auto const feasible = feasible_balance(data, s, k);
    if (t > feasible)
    {
      out.warnings.push_back("target " + t.str() + " for feature '" + data.feature(s).name +
                             "' exceeds the guaranteed feasible balance " + feasible.str() +
                             " for k=" + std::to_string(k) + "; the instance may be infeasible");
    }
    out.targets.push_back(t);
  }
  return out;
}

/// Sum of squared distances between each object and the center of its cluster.
inline double clustering_cost(Matrix const &points, std::span<Label const> labels, Matrix const &centers)
{
  if (labels.size() != points.rows() || centers.cols() != points.cols())
  {
    throw InvalidInput("clustering_cost: shape mismatch");
  }
  double cost = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i)
  {
    auto const j = labels[i];
    if (j < 0 || static_cast<std::size_t>(j) >= centers.rows())
    {
      throw InvalidInput("clustering_cost: label out of range at object " + std::to_string(i));
    }
    cost += squared_distance(points.row(i), centers.row(static_cast<std::size_t>(j)));
  }
  return cost;
}

struct BalanceReport
{
  std::vector<std::vector<Rational>> per_cluster;  // [feature][cluster]
  std::vector<Rational>              clustering;   // [feature]
  std::vector<Rational>              dataset;      // [feature]
};

inline BalanceReport balance_report(std::span<Label const> labels, Dataset const &data, std::size_t k)
{
  BalanceReport report;
  for (std::size_t s = 0; s < data.feature_count(); ++s)
  {
    auto const            counts = cluster_group_counts(labels, data, s, k);
    std::vector<Rational> per;
    Rational              worst(1);
    for (std::size_t j = 0; j < k; ++j)
    {
      auto const b = cluster_balance(counts[j]);
      per.push_back(b);
      worst = std::min(worst, b);
    }
    report.per_cluster.push_back(std::move(per));
    report.clustering.push_back(worst);
    report.dataset.push_back(dataset_balance(data, s));
  }
  return report;
}

/// Exact check of every per-cluster balance constraint and non-emptiness.
inline bool satisfies_targets(std::span<Label const> labels, Dataset const &data, std::size_t k,
                              std::span<Rational const> targets)
{
  for (std::size_t s = 0; s < data.feature_count(); ++s)
  {
    auto const counts = cluster_group_counts(labels, data, s, k);
    for (auto const &row : counts)
    {
      auto const [lo, hi] = std::minmax_element(row.begin(), row.end());
      if (*hi == 0 || !targets[s].satisfied_by(*lo, *hi))
      {
        return false;
      }
    }
  }
  return true;
}

}  // namespace fairkm
