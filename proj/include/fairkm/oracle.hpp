#pragma once

// Brute-force ground truth for tiny instances. Nothing here shares code with
// the heuristics or the branch-and-bound solver beyond the plain data types.

#include "fairkm/blp.hpp"
#include "fairkm/core.hpp"
#include "fairkm/rational.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fairkm {

struct OracleResult
{
  std::vector<Label> best_labels;
  double             best_cost{std::numeric_limits<double>::infinity()};
  std::uint64_t      feasible_count{0};
  std::uint64_t      evaluated_count{0};
};

inline constexpr std::size_t kOracleMaxObjects    = 14;
inline constexpr std::size_t kOracleMaxRows       = 12;
inline constexpr std::size_t kOracleMaxClusters   = 3;

namespace detail {

// Every group count of every cluster is at least target times every other group count.
inline bool oracle_balanced(std::vector<std::int64_t> const &W, std::size_t k, std::size_t G, Rational const &t)
{
  for (std::size_t j = 0; j < k; ++j)
  {
    for (std::size_t g = 0; g < G; ++g)
    {
      for (std::size_t h = 0; h < G; ++h)
      {
        if (g != h && static_cast<__int128>(W[j * G + g]) * t.den() <
                          static_cast<__int128>(W[j * G + h]) * t.num())
        {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace detail

/// Minimum clustering cost (centroid centers) over every partition of the
/// objects into exactly k non-empty clusters that meets the per-feature targets.
/// Partitions are enumerated as restricted-growth strings.
inline OracleResult exact_fair_kmeans(Dataset const &data, std::size_t k, std::span<Rational const> targets)
{
  std::size_t const n = data.n();
  if (n > kOracleMaxObjects || k > kOracleMaxClusters || k == 0 || k > n)
  {
    throw InvalidInput("oracle limited to n <= 14 and 1 <= k <= min(3, n); got n=" + std::to_string(n) +
                       ", k=" + std::to_string(k));
  }
  if (targets.size() != data.feature_count())
  {
    throw InvalidInput("oracle: one target per sensitive feature required");
  }
  std::size_t const d = data.d();
  OracleResult      out;
  std::vector<Label> rgs(n, 0);
  std::vector<Label> prefix_max(n, 0);

  auto evaluate = [&]() {
    ++out.evaluated_count;
    for (std::size_t s = 0; s < data.feature_count(); ++s)
    {
      auto const               &feat = data.feature(s);
      std::size_t const         G    = feat.group_count();
      std::vector<std::int64_t> W(k * G, 0);
      for (std::size_t i = 0; i < n; ++i)
      {
        ++W[static_cast<std::size_t>(rgs[i]) * G + static_cast<std::size_t>(feat.membership[i])];
      }
      if (!detail::oracle_balanced(W, k, G, targets[s]))
      {
        return;
      }
    }
    ++out.feasible_count;
    std::vector<double>      sums(k * d, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
      auto const j = static_cast<std::size_t>(rgs[i]);
      ++sizes[j];
      for (std::size_t f = 0; f < d; ++f)
      {
        sums[j * d + f] += data.points()(i, f);
      }
    }
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      auto const j = static_cast<std::size_t>(rgs[i]);
      for (std::size_t f = 0; f < d; ++f)
      {
        double const diff = data.points()(i, f) - sums[j * d + f] / static_cast<double>(sizes[j]);
        cost += diff * diff;
      }
    }
    if (cost < out.best_cost)
    {
      out.best_cost   = cost;
      out.best_labels = rgs;
    }
  };

  // rgs[0] = 0; rgs[i] <= max(rgs[0..i-1]) + 1; exactly k distinct values.
  auto recurse = [&](auto &&self, std::size_t i, Label used) -> void {
    if (i == n)
    {
      if (static_cast<std::size_t>(used) == k)
      {
        evaluate();
      }
      return;
    }
    // Not enough objects left to open the remaining clusters.
    if (static_cast<std::size_t>(used) + (n - i) < k)
    {
      return;
    }
    Label const top = std::min<Label>(used, static_cast<Label>(k) - 1);
    for (Label v = 0; v <= top; ++v)
    {
      rgs[i] = v;
      self(self, i + 1, v == used ? used + 1 : used);
    }
  };
  rgs[0] = 0;
  recurse(recurse, 1, 1);

  if (out.feasible_count == 0)
  {
    throw InfeasibleTarget("oracle: none of the " + std::to_string(out.evaluated_count) +
                           " partitions satisfies the targets");
  }
  return out;
}

struct OracleAssignment
{
  std::vector<Label> labels;
  double             objective{std::numeric_limits<double>::infinity()};
  std::uint64_t      feasible_count{0};
};

/// Minimum objective over all k^rows assignments that keep every cluster
/// non-empty (when required) and satisfy the weighted balance constraints.
inline OracleAssignment exact_fair_assignment(AssignmentProblem const &p)
{
  if (p.rows > kOracleMaxRows || p.clusters > kOracleMaxClusters || p.clusters == 0)
  {
    throw InvalidInput("oracle limited to rows <= 12 and 1 <= k <= 3");
  }
  std::size_t const  n = p.rows;
  std::size_t const  k = p.clusters;
  OracleAssignment   out;
  std::vector<Label> x(n, 0);
  std::uint64_t      total = 1;
  for (std::size_t i = 0; i < n; ++i)
  {
    total *= k;
  }
  for (std::uint64_t code = 0; code < total; ++code)
  {
    std::uint64_t c = code;
    for (std::size_t i = 0; i < n; ++i)
    {
      x[i] = static_cast<Label>(c % k);
      c /= k;
    }
    if (p.require_nonempty)
    {
      std::vector<bool> used(k, false);
      for (auto j : x)
      {
        used[static_cast<std::size_t>(j)] = true;
      }
      if (std::find(used.begin(), used.end(), false) != used.end())
      {
        continue;
      }
    }
    bool ok = true;
    for (std::size_t s = 0; s < p.group_sizes.size() && ok; ++s)
    {
      std::size_t const         G = p.group_sizes[s];
      std::vector<std::int64_t> W(k * G, 0);
      for (std::size_t i = 0; i < n; ++i)
      {
        for (std::size_t g = 0; g < G; ++g)
        {
          W[static_cast<std::size_t>(x[i]) * G + g] += p.weights[s][i * G + g];
        }
      }
      ok = detail::oracle_balanced(W, k, G, p.targets[s]);
    }
    if (!ok)
    {
      continue;
    }
    ++out.feasible_count;
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
      obj += p.costs[i * k + static_cast<std::size_t>(x[i])];
    }
    if (obj < out.objective)
    {
      out.objective = obj;
      out.labels    = x;
    }
  }
  if (out.feasible_count == 0)
  {
    throw InfeasibleTarget("oracle: no assignment satisfies the constraints");
  }
  return out;
}

}  // namespace fairkm
