#pragma once

#include "fairkm/errors.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace fairkm {

/// Result of a bounded transportation problem.
template <typename Cost>
struct TransportResult
{
  std::vector<std::int32_t> assignment;  // per row, the receiving column
  std::vector<std::int64_t> counts;      // rows received per column
  Cost                      cost{};
};

/// Min-cost assignment of m unit-supply rows to k columns where column j must
/// receive between lower[j] and upper[j] rows.
///
/// Successive shortest paths: rows are inserted one at a time and each insertion
/// augments along a shortest path of the residual graph. Assigned rows only act
/// as transit between columns, so the residual graph collapses to k column
/// nodes plus the sink; the cheapest column-to-column move is kept in a lazy
/// min-heap per ordered pair. Lower bounds are enforced by a lexicographic
/// penalty on the sink arcs (one unit of "debt" per row a column still needs),
/// which avoids mixing a big-M constant into the costs.
///
/// Returns std::nullopt when no assignment satisfies the bounds.
template <typename Cost>
class TransportSolver
{
public:
  TransportSolver(std::size_t rows, std::size_t cols, std::vector<Cost> costs,
                  std::vector<std::int64_t> lower, std::vector<std::int64_t> upper)
    : m_(rows)
    , k_(cols)
    , costs_(std::move(costs))
    , lower_(std::move(lower))
    , upper_(std::move(upper))
  {
    if (costs_.size() != m_ * k_ || lower_.size() != k_ || upper_.size() != k_)
    {
      throw InvalidInput("TransportSolver: shape mismatch");
    }
  }

  [[nodiscard]] std::optional<TransportResult<Cost>> solve()
  {
    if (k_ == 0)
    {
      return m_ == 0 ? std::optional<TransportResult<Cost>>(TransportResult<Cost>{}) : std::nullopt;
    }
    std::int64_t lo_sum = 0;
    std::int64_t hi_sum = 0;
    for (std::size_t j = 0; j < k_; ++j)
    {
      if (lower_[j] < 0)
      {
        lower_[j] = 0;
      }
      if (upper_[j] < lower_[j])
      {
        return std::nullopt;
      }
      lo_sum += lower_[j];
      hi_sum += upper_[j];
    }
    auto const m = static_cast<std::int64_t>(m_);
    if (lo_sum > m || hi_sum < m)
    {
      return std::nullopt;
    }

    assign_.assign(m_, -1);
    counts_.assign(k_, 0);
    heaps_.assign(k_ * k_, Heap{});

    for (std::size_t v = 0; v < m_; ++v)
    {
      if (!augment(v))
      {
        return std::nullopt;
      }
    }
    for (std::size_t j = 0; j < k_; ++j)
    {
      if (counts_[j] < lower_[j])
      {
        return std::nullopt;
      }
    }

    TransportResult<Cost> result;
    result.assignment = assign_;
    result.counts     = counts_;
    for (std::size_t v = 0; v < m_; ++v)
    {
      result.cost += cost(v, static_cast<std::size_t>(assign_[v]));
    }
    return result;
  }

private:
  // Lexicographic path length: debt first (negative = satisfies lower bounds), then cost.
  struct Lex
  {
    std::int64_t debt{0};
    Cost         cost{};

    friend bool operator<(Lex const &a, Lex const &b)
    {
      return a.debt != b.debt ? a.debt < b.debt : a.cost < b.cost;
    }
    friend Lex operator+(Lex const &a, Lex const &b) { return {a.debt + b.debt, a.cost + b.cost}; }
  };

  struct Entry
  {
    Cost         delta;
    std::int32_t row;
    friend bool  operator>(Entry const &a, Entry const &b)
    {
      return a.delta != b.delta ? a.delta > b.delta : a.row > b.row;
    }
  };
  using Heap = std::priority_queue<Entry, std::vector<Entry>, std::greater<>>;

  Cost cost(std::size_t row, std::size_t col) const { return costs_[row * k_ + col]; }

  void place(std::size_t row, std::size_t col)
  {
    assign_[row] = static_cast<std::int32_t>(col);
    for (std::size_t to = 0; to < k_; ++to)
    {
      if (to != col)
      {
        heaps_[col * k_ + to].push(Entry{cost(row, to) - cost(row, col), static_cast<std::int32_t>(row)});
      }
    }
  }

  // Cheapest row currently in `from` that can move to `to`, or -1.
  std::int32_t top_row(std::size_t from, std::size_t to)
  {
    auto &heap = heaps_[from * k_ + to];
    while (!heap.empty())
    {
      auto const &e = heap.top();
      if (assign_[static_cast<std::size_t>(e.row)] == static_cast<std::int32_t>(from))
      {
        return e.row;
      }
      heap.pop();
    }
    return -1;
  }

  bool augment(std::size_t v)
  {
    constexpr auto    none = std::numeric_limits<std::int32_t>::min();
    std::vector<Lex>  dist(k_);
    std::vector<bool> reached(k_, true);
    std::vector<std::int32_t> pred_col(k_, -1);  // -1: entered directly from v
    std::vector<std::int32_t> pred_row(k_, none);
    for (std::size_t j = 0; j < k_; ++j)
    {
      dist[j] = Lex{0, cost(v, j)};
    }

    // Column-to-column arcs; rebuilt per augmentation since heap tops change.
    std::vector<std::int32_t> move_row(k_ * k_, -1);
    std::vector<Cost>         move_cost(k_ * k_, Cost{});
    for (std::size_t a = 0; a < k_; ++a)
    {
      if (counts_[a] == 0)
      {
        continue;
      }
      for (std::size_t b = 0; b < k_; ++b)
      {
        if (a == b)
        {
          continue;
        }
        auto const r = top_row(a, b);
        if (r >= 0)
        {
          move_row[a * k_ + b]  = r;
          move_cost[a * k_ + b] = heaps_[a * k_ + b].top().delta;
        }
      }
    }

    // Bellman-Ford over k nodes; the residual graph has no negative cycles.
    for (std::size_t pass = 0; pass + 1 < k_ + 1; ++pass)
    {
      bool changed = false;
      for (std::size_t a = 0; a < k_; ++a)
      {
        for (std::size_t b = 0; b < k_; ++b)
        {
          auto const r = move_row[a * k_ + b];
          if (r < 0)
          {
            continue;
          }
          Lex const cand = dist[a] + Lex{0, move_cost[a * k_ + b]};
          if (cand < dist[b])
          {
            dist[b]     = cand;
            pred_col[b] = static_cast<std::int32_t>(a);
            pred_row[b] = r;
            changed     = true;
          }
        }
      }
      if (!changed)
      {
        break;
      }
    }

    std::int32_t best = -1;
    Lex          best_len{};
    for (std::size_t j = 0; j < k_; ++j)
    {
      if (!reached[j] || counts_[j] >= upper_[j])
      {
        continue;
      }
      Lex const len = dist[j] + Lex{counts_[j] < lower_[j] ? -1 : 0, Cost{}};
      if (best < 0 || len < best_len)
      {
        best     = static_cast<std::int32_t>(j);
        best_len = len;
      }
    }
    if (best < 0)
    {
      return false;
    }

    ++counts_[static_cast<std::size_t>(best)];
    // Walk back: each transit row moves into the column after it on the path.
    auto col = static_cast<std::size_t>(best);
    std::size_t guard = 0;
    while (pred_col[col] >= 0)
    {
      auto const prev = static_cast<std::size_t>(pred_col[col]);
      place(static_cast<std::size_t>(pred_row[col]), col);
      col = prev;
      if (++guard > k_)
      {
        throw Error("TransportSolver: cyclic predecessor chain");
      }
    }
    place(v, col);
    return true;
  }

  std::size_t               m_;
  std::size_t               k_;
  std::vector<Cost>         costs_;
  std::vector<std::int64_t> lower_;
  std::vector<std::int64_t> upper_;
  std::vector<std::int32_t> assign_;
  std::vector<std::int64_t> counts_;
  std::vector<Heap>         heaps_;
};

template <typename Cost>
std::optional<TransportResult<Cost>> solve_transport(std::size_t rows, std::size_t cols,
                                                     std::vector<Cost>         costs,
                                                     std::vector<std::int64_t> lower,
                                                     std::vector<std::int64_t> upper)
{
  return TransportSolver<Cost>(rows, cols, std::move(costs), std::move(lower), std::move(upper)).solve();
}

}  // namespace fairkm
