#pragma once

// S-MPFC preprocessing: vanilla k-means groups the objects into r batches,
// each summarized by its centroid, its size and its per-group member counts.

#include "fairkm/blp.hpp"
#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/random.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace fairkm {

struct BatchOptions
{
  std::size_t kmeans_iters{25};
  double      tolerance{1e-4};
  std::size_t subsample_threshold{1'000'000};  // n at or above which centers are fit on a sample
  std::size_t subsample_size{200'000};
};

struct BatchSet
{
  Matrix                                 representatives;  // r x d
  std::vector<std::int64_t>              sizes;
  std::vector<std::vector<std::int64_t>> weights;  // weights[s][b * G_s + g]
  std::vector<std::size_t>               group_sizes;
  std::vector<std::int32_t>              membership;  // per object
  double                                 scatter{0.0};  // sum of squared distances to own representative

  std::size_t r() const { return representatives.rows(); }
};

namespace detail {

// Lloyd iterations over `points` (optionally restricted to `rows`), reseeding
// empty clusters with the point farthest from its center.
inline Matrix fit_batch_centers(Matrix const &points, std::span<std::size_t const> rows, std::size_t r, Rng &rng,
                                BatchOptions const &opt)
{
  Matrix sample = rows.empty() ? points : rows_of(points, rows);
  Matrix centers = kmeanspp_init(sample, r, rng);
  std::size_t const        m = sample.rows();
  std::size_t const        d = sample.cols();
  std::vector<std::int32_t> label(m);
  std::vector<double>       dist(m);
  double                    prev = 0.0;
  for (std::size_t it = 0; it < opt.kmeans_iters; ++it)
  {
    double cost = 0.0;
    for (std::size_t i = 0; i < m; ++i)
    {
      auto const [j, dd] = nearest_center(sample.row(i), centers);
      label[i]           = static_cast<std::int32_t>(j);
      dist[i]            = dd;
      cost += dd;
    }
    Matrix                   next(r, d);
    std::vector<std::size_t> count(r, 0);
    for (std::size_t i = 0; i < m; ++i)
    {
      auto const j = static_cast<std::size_t>(label[i]);
      auto       c = next.row(j);
      auto const x = sample.row(i);
      for (std::size_t f = 0; f < d; ++f)
      {
        c[f] += x[f];
      }
      ++count[j];
    }
    for (std::size_t j = 0; j < r; ++j)
    {
      if (count[j] == 0)
      {
        auto const far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
        auto const src = sample.row(far);
        std::copy(src.begin(), src.end(), next.row(j).begin());
        dist[far] = 0.0;
        continue;
      }
      for (auto &v : next.row(j))
      {
        v /= static_cast<double>(count[j]);
      }
    }
    centers = std::move(next);
    if (it > 0 && improvement(prev, cost) < opt.tolerance)
    {
      break;
    }
    prev = cost;
  }
  return centers;
}

}  // namespace detail

/// Representatives, sizes and group weights for a given object-to-batch map.
inline BatchSet assemble_batches(Dataset const &data, std::vector<std::int32_t> membership, std::size_t r)
{
  std::size_t const n = data.n();
  std::size_t const d = data.d();
  auto const       &pts = data.points();
  if (membership.size() != n)
  {
    throw InvalidInput("batch membership must list one batch per object");
  }
  for (auto b : membership)
  {
    if (b < 0 || static_cast<std::size_t>(b) >= r)
    {
      throw InvalidInput("batch index out of range");
    }
  }
  BatchSet out;
  out.representatives = Matrix(r, d);
  out.sizes.assign(r, 0);
  for (std::size_t i = 0; i < n; ++i)
  {
    auto const b = static_cast<std::size_t>(membership[i]);
    auto       c = out.representatives.row(b);
    auto const x = pts.row(i);
    for (std::size_t f = 0; f < d; ++f)
    {
      c[f] += x[f];
    }
    ++out.sizes[b];
  }
  for (std::size_t b = 0; b < r; ++b)
  {
    if (out.sizes[b] == 0)
    {
      throw InvalidInput("batch " + std::to_string(b) + " is empty");
    }
  }
  for (std::size_t b = 0; b < r; ++b)
  {
    for (auto &v : out.representatives.row(b))
    {
      v /= static_cast<double>(out.sizes[b]);
    }
  }
  for (auto const &feat : data.features())
  {
    std::size_t const         G = feat.group_count();
    std::vector<std::int64_t> w(r * G, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
      ++w[static_cast<std::size_t>(membership[i]) * G + static_cast<std::size_t>(feat.membership[i])];
    }
    out.group_sizes.push_back(G);
    out.weights.push_back(std::move(w));
  }
  for (std::size_t i = 0; i < n; ++i)
  {
    out.scatter += squared_distance(pts.row(i), out.representatives.row(static_cast<std::size_t>(membership[i])));
  }
  out.membership = std::move(membership);
  return out;
}

/// Groups the objects into r non-empty batches.
inline BatchSet build_batches(Dataset const &data, std::size_t r, Rng &rng, BatchOptions const &opt = {})
{
  std::size_t const n = data.n();
  if (r == 0 || r > n)
  {
    throw InvalidInput("batch count r=" + std::to_string(r) + " must lie in [1, n=" + std::to_string(n) + "]");
  }
  auto const &pts = data.points();
  std::vector<std::int32_t> membership(n);

  if (r == n)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      membership[i] = static_cast<std::int32_t>(i);
    }
  }
  else
  {
    std::vector<std::size_t> sample;
    if (n >= opt.subsample_threshold && opt.subsample_size < n && opt.subsample_size >= r)
    {
      // Floyd's algorithm: distinct indices without materializing a permutation.
      std::vector<bool> taken(n, false);
      for (std::size_t j = n - opt.subsample_size; j < n; ++j)
      {
        auto t = uniform_index(rng, j + 1);
        if (taken[t])
        {
          t = j;
        }
        taken[t] = true;
      }
      for (std::size_t i = 0; i < n; ++i)
      {
        if (taken[i])
        {
          sample.push_back(i);
        }
      }
    }
    Matrix const centers = detail::fit_batch_centers(pts, sample, r, rng, opt);
    std::vector<double>      dist(n);
    std::vector<std::size_t> count(r, 0);
    for (std::size_t i = 0; i < n; ++i)
    {
      auto const [j, dd] = nearest_center(pts.row(i), centers);
      membership[i]  = static_cast<std::int32_t>(j);
      dist[i]            = dd;
      ++count[j];
    }
    // The final full pass can still leave a batch empty; give it the farthest object.
    for (std::size_t j = 0; j < r; ++j)
    {
      if (count[j] != 0)
      {
        continue;
      }
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
      {
        if (count[static_cast<std::size_t>(membership[i])] > 1 && (far == n || dist[i] > dist[far]))
        {
          far = i;
        }
      }
      --count[static_cast<std::size_t>(membership[far])];
      membership[far] = static_cast<std::int32_t>(j);
      dist[far]           = 0.0;
      count[j]            = 1;
    }
  }

  return assemble_batches(data, std::move(membership), r);
}

/// Center j = size-weighted mean of the representatives assigned to j.
inline Matrix weighted_update(Matrix const &representatives, std::span<std::int64_t const> sizes,
                              std::span<Label const> rep_labels, std::size_t k)
{
  Matrix              centers(k, representatives.cols());
  std::vector<double> mass(k, 0.0);
  for (std::size_t b = 0; b < representatives.rows(); ++b)
  {
    auto const j = static_cast<std::size_t>(rep_labels[b]);
    auto const w = static_cast<double>(sizes[b]);
    auto       c = centers.row(j);
    auto const x = representatives.row(b);
    for (std::size_t f = 0; f < x.size(); ++f)
    {
      c[f] += w * x[f];
    }
    mass[j] += w;
  }
  for (std::size_t j = 0; j < k; ++j)
  {
    if (mass[j] == 0.0)
    {
      throw InvalidInput("weighted_update: cluster " + std::to_string(j) + " has no representative");
    }
    for (auto &v : centers.row(j))
    {
      v /= mass[j];
    }
  }
  return centers;
}

inline std::vector<Label> map_back(BatchSet const &batches, std::span<Label const> rep_labels)
{
  if (rep_labels.size() != batches.r())
  {
    throw InvalidInput("map_back: expected " + std::to_string(batches.r()) + " representative labels");
  }
  std::vector<Label> out(batches.membership.size());
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] = rep_labels[static_cast<std::size_t>(batches.membership[i])];
  }
  return out;
}

/// Weighted assignment problem over the representatives for fixed centers.
inline AssignmentProblem batch_problem(BatchSet const &batches, Matrix const &centers, std::vector<Rational> targets)
{
  AssignmentProblem p;
  p.rows        = batches.r();
  p.clusters    = centers.rows();
  p.costs       = distance_matrix(batches.representatives, centers);
  p.targets     = std::move(targets);
  p.group_sizes = batches.group_sizes;
  p.weights     = batches.weights;
  return p;
}

/// Size-weighted cost of the representatives; adding `scatter` gives the
/// clustering cost of the mapped-back objects under the same centers.
inline double weighted_cost(BatchSet const &batches, std::span<Label const> rep_labels, Matrix const &centers)
{
  double total = 0.0;
  for (std::size_t b = 0; b < batches.r(); ++b)
  {
    total += static_cast<double>(batches.sizes[b]) *
             squared_distance(batches.representatives.row(b), centers.row(static_cast<std::size_t>(rep_labels[b])));
  }
  return total;
}

}  // namespace fairkm
