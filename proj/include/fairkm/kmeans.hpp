#pragma once

#include "fairkm/core.hpp"
#include "fairkm/random.hpp"
#include "fairkm/transport.hpp"

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace fairkm {

/// Index of the closest center (ties go to the lowest index) and its squared distance.
inline std::pair<std::size_t, double> nearest_center(std::span<double const> point, Matrix const &centers)
{
  std::size_t best   = 0;
  double      best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centers.rows(); ++j)
  {
    double const d = squared_distance(point, centers.row(j));
    if (d < best_d)
    {
      best   = j;
      best_d = d;
    }
  }
  return {best, best_d};
}

/// k-means++ seeding (D^2 sampling) over the rows listed in `candidates`
/// (all rows when empty). Optional per-row weights multiply the sampling mass.
/// Returns the indices of the chosen rows.
inline std::vector<std::size_t> kmeanspp_indices(Matrix const &points, std::size_t k, Rng &rng,
                                                 std::span<double const>      weights    = {},
                                                 std::span<std::size_t const> candidates = {})
{
  std::vector<std::size_t> pool;
  if (candidates.empty())
  {
    pool.resize(points.rows());
    for (std::size_t i = 0; i < pool.size(); ++i)
    {
      pool[i] = i;
    }
  }
  else
  {
    pool.assign(candidates.begin(), candidates.end());
  }
  if (k == 0 || k > pool.size())
  {
    throw InvalidInput("k-means++: cannot choose " + std::to_string(k) + " centers from " +
                       std::to_string(pool.size()) + " objects");
  }
  auto weight = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  std::vector<std::size_t> chosen;
  std::vector<bool>        taken(pool.size(), false);
  std::vector<double>      d2(pool.size(), std::numeric_limits<double>::infinity());

  auto pick_uniform = [&]() {
    std::size_t free_count = 0;
    for (std::size_t p = 0; p < pool.size(); ++p)
    {
      free_count += taken[p] ? 0 : 1;
    }
    auto target = uniform_index(rng, free_count);
    for (std::size_t p = 0; p < pool.size(); ++p)
    {
      if (!taken[p] && target-- == 0)
      {
        return p;
      }
    }
    return pool.size() - 1;
  };

  auto take = [&](std::size_t p) {
    taken[p] = true;
    chosen.push_back(pool[p]);
    auto const c = points.row(pool[p]);
    for (std::size_t q = 0; q < pool.size(); ++q)
    {
      d2[q] = std::min(d2[q], squared_distance(points.row(pool[q]), c));
    }
  };

  take(pick_uniform());
  while (chosen.size() < k)
  {
    double total = 0.0;
    for (std::size_t p = 0; p < pool.size(); ++p)
    {
      if (!taken[p])
      {
        total += weight(pool[p]) * d2[p];
      }
    }
    if (!(total > 0.0))
    {
      take(pick_uniform());
      continue;
    }
    double      r    = uniform01(rng) * total;
    std::size_t pick = pool.size();
    std::size_t last = pool.size();
    for (std::size_t p = 0; p < pool.size(); ++p)
    {
      if (taken[p])
      {
        continue;
      }
      double const mass = weight(pool[p]) * d2[p];
      if (mass <= 0.0)
      {
        continue;
      }
      last = p;
      r -= mass;
      if (r < 0.0)
      {
        pick = p;
        break;
      }
    }
    take(pick < pool.size() ? pick : last);
  }
  return chosen;
}

inline Matrix rows_of(Matrix const &points, std::span<std::size_t const> indices)
{
  Matrix out(indices.size(), points.cols());
  for (std::size_t j = 0; j < indices.size(); ++j)
  {
    auto const src = points.row(indices[j]);
    std::copy(src.begin(), src.end(), out.row(j).begin());
  }
  return out;
}

/// k-means++ initial centers: positions of k distinct objects.
inline Matrix kmeanspp_init(Matrix const &points, std::size_t k, Rng &rng)
{
  auto const idx = kmeanspp_indices(points, k, rng);
  return rows_of(points, idx);
}

/// Per-cluster arithmetic mean. Every cluster must be non-empty.
inline Matrix update_centers(Matrix const &points, std::span<Label const> labels, std::size_t k)
{
  Matrix                   centers(k, points.cols());
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < points.rows(); ++i)
  {
    auto const j = static_cast<std::size_t>(labels[i]);
    auto       c = centers.row(j);
    auto const x = points.row(i);
    for (std::size_t f = 0; f < x.size(); ++f)
    {
      c[f] += x[f];
    }
    ++sizes[j];
  }
  for (std::size_t j = 0; j < k; ++j)
  {
    if (sizes[j] == 0)
    {
      throw InvalidInput("update_centers: cluster " + std::to_string(j) + " is empty");
    }
    for (auto &v : centers.row(j))
    {
      v /= static_cast<double>(sizes[j]);
    }
  }
  return centers;
}

/// Relative improvement 1 - now/prev; 0 when the previous cost is 0.
inline double improvement(double cost_prev, double cost_now)
{
  if (cost_prev <= 0.0)
  {
    return 0.0;
  }
  return 1.0 - cost_now / cost_prev;
}

/// n x k matrix of squared distances, row-major.
inline std::vector<double> distance_matrix(Matrix const &points, Matrix const &centers)
{
  std::vector<double> out(points.rows() * centers.rows());
  for (std::size_t i = 0; i < points.rows(); ++i)
  {
    auto const x = points.row(i);
    for (std::size_t j = 0; j < centers.rows(); ++j)
    {
      out[i * centers.rows() + j] = squared_distance(x, centers.row(j));
    }
  }
  return out;
}

/// Cheapest assignment given a row-major n x k cost matrix such that every
/// cluster receives at least one row: plain argmin when that already covers
/// all clusters, otherwise an exact bounded transport solve.
inline std::vector<Label> cheapest_nonempty_assignment(std::vector<double> costs, std::size_t n, std::size_t k)
{
  if (k > n)
  {
    throw InvalidInput("cannot fill " + std::to_string(k) + " clusters with " + std::to_string(n) + " objects");
  }
  std::vector<Label>       labels(n);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t i = 0; i < n; ++i)
  {
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
    {
      if (costs[i * k + j] < costs[i * k + best])
      {
        best = j;
      }
    }
    labels[i] = static_cast<Label>(best);
    ++sizes[best];
  }
  if (std::find(sizes.begin(), sizes.end(), std::size_t{0}) == sizes.end())
  {
    return labels;
  }
  auto result = solve_transport<double>(n, k, std::move(costs), std::vector<std::int64_t>(k, 1),
                                        std::vector<std::int64_t>(k, static_cast<std::int64_t>(n)));
  if (!result)
  {
    throw Error("non-empty assignment unexpectedly infeasible");
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    labels[i] = result->assignment[i];
  }
  return labels;
}

/// Nearest-center assignment subject to every cluster receiving at least one object.
inline std::vector<Label> nearest_assignment_nonempty(Matrix const &points, Matrix const &centers)
{
  return cheapest_nonempty_assignment(distance_matrix(points, centers), points.rows(), centers.rows());
}

}  // namespace fairkm
