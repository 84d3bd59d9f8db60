#pragma once

#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/rational.hpp"
#include "fairkm/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fairkm {

/// Assignment of rows (objects or weighted representatives) to k fixed centers
/// minimizing the summed row costs, such that every row goes to one cluster,
/// no cluster is empty and, per cluster and sensitive feature, the weighted
/// count of every group is at least target times the weighted count of every
/// other group.
struct AssignmentProblem
{
  std::size_t         rows{0};
  std::size_t         clusters{0};
  std::vector<double> costs;  // rows x clusters, row-major

  std::vector<Rational>    targets;      // per feature
  std::vector<std::size_t> group_sizes;  // groups per feature
  // weights[s][row * group_sizes[s] + g]: weight of `row` in group g of feature s.
  std::vector<std::vector<std::int64_t>> weights;
  bool                                   require_nonempty{true};

  [[nodiscard]] double cost(std::size_t row, std::size_t j) const { return costs[row * clusters + j]; }

  /// Unit-weight problem for the objects of `data`.
  static AssignmentProblem for_objects(Dataset const &data, std::vector<double> costs, std::size_t k,
                                       std::vector<Rational> targets)
  {
    AssignmentProblem p;
    p.rows     = data.n();
    p.clusters = k;
    p.costs    = std::move(costs);
    p.targets  = std::move(targets);
    for (auto const &feat : data.features())
    {
      auto const                G = feat.group_count();
      std::vector<std::int64_t> w(data.n() * G, 0);
      for (std::size_t i = 0; i < data.n(); ++i)
      {
        w[i * G + static_cast<std::size_t>(feat.membership[i])] = 1;
      }
      p.group_sizes.push_back(G);
      p.weights.push_back(std::move(w));
    }
    return p;
  }

  void validate() const
  {
    if (costs.size() != rows * clusters)
    {
      throw InvalidInput("assignment: cost matrix has wrong size");
    }
    if (clusters == 0)
    {
      throw InvalidInput("assignment: need at least one cluster");
    }
    if (targets.size() != group_sizes.size() || weights.size() != group_sizes.size())
    {
      throw InvalidInput("assignment: targets/weights do not match the feature count");
    }
    for (std::size_t s = 0; s < group_sizes.size(); ++s)
    {
      if (weights[s].size() != rows * group_sizes[s])
      {
        throw InvalidInput("assignment: weight table of feature " + std::to_string(s) + " has wrong size");
      }
      if (targets[s] < Rational(0) || targets[s] > Rational(1))
      {
        throw InvalidInput("assignment: target outside [0,1]");
      }
      for (auto w : weights[s])
      {
        if (w < 0)
        {
          throw InvalidInput("assignment: negative group weight");
        }
      }
    }
    for (auto c : costs)
    {
      if (!std::isfinite(c) || c < 0.0)
      {
        throw InvalidInput("assignment: costs must be finite and non-negative");
      }
    }
  }
};

struct AssignmentOptions
{
  std::optional<double>        time_cap_seconds;
  std::optional<std::uint64_t> node_limit;
  double                       relative_gap{0.0};
  int                          lagrangian_iterations{150};
};

struct AssignmentSolution
{
  std::vector<Label> row_to_cluster;
  double             objective{0.0};
  bool               optimal{false};
  std::uint64_t      nodes_explored{0};
  double             lower_bound{0.0};
};

/// Objective summed in row order.
inline double assignment_objective(AssignmentProblem const &p, std::span<Label const> labels)
{
  double obj = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i)
  {
    obj += p.cost(i, static_cast<std::size_t>(labels[i]));
  }
  return obj;
}

/// Exact check of all assignment constraints.
inline bool assignment_feasible(AssignmentProblem const &p, std::span<Label const> labels)
{
  if (labels.size() != p.rows)
  {
    return false;
  }
  std::vector<std::size_t> sizes(p.clusters, 0);
  for (auto j : labels)
  {
    if (j < 0 || static_cast<std::size_t>(j) >= p.clusters)
    {
      return false;
    }
    ++sizes[static_cast<std::size_t>(j)];
  }
  if (p.require_nonempty && std::find(sizes.begin(), sizes.end(), std::size_t{0}) != sizes.end())
  {
    return false;
  }
  for (std::size_t s = 0; s < p.group_sizes.size(); ++s)
  {
    auto const                G = p.group_sizes[s];
    std::vector<std::int64_t> W(p.clusters * G, 0);
    for (std::size_t i = 0; i < p.rows; ++i)
    {
      auto const j = static_cast<std::size_t>(labels[i]);
      for (std::size_t g = 0; g < G; ++g)
      {
        W[j * G + g] += p.weights[s][i * G + g];
      }
    }
    for (std::size_t j = 0; j < p.clusters; ++j)
    {
      auto const first = W.begin() + static_cast<std::ptrdiff_t>(j * G);
      auto const [lo, hi] = std::minmax_element(first, first + static_cast<std::ptrdiff_t>(G));
      if (!p.targets[s].satisfied_by(*lo, *hi))
      {
        return false;
      }
    }
  }
  return true;
}

/// Cost of the fixed rows plus, for every free row (label < 0), its cheapest cluster.
/// Never exceeds the objective of any completion.
inline double lower_bound(AssignmentProblem const &p, std::span<Label const> partial)
{
  double bound = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i)
  {
    if (partial[i] >= 0)
    {
      bound += p.cost(i, static_cast<std::size_t>(partial[i]));
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < p.clusters; ++j)
    {
      best = std::min(best, p.cost(i, j));
    }
    bound += best;
  }
  return bound;
}

namespace detail {

class AssignmentSearch
{
public:
  AssignmentSearch(AssignmentProblem const &p, AssignmentOptions const &opt)
    : p_(p)
    , opt_(opt)
    , n_(p.rows)
    , k_(p.clusters)
    , start_(std::chrono::steady_clock::now())
  {
    for (auto G : p_.group_sizes)
    {
      offsets_.push_back(total_groups_);
      total_groups_ += G;
    }
    w_.assign(n_ * total_groups_, 0);
    for (std::size_t s = 0; s < p_.group_sizes.size(); ++s)
    {
      auto const G = p_.group_sizes[s];
      for (std::size_t i = 0; i < n_; ++i)
      {
        for (std::size_t g = 0; g < G; ++g)
        {
          w_[i * total_groups_ + offsets_[s] + g] = p_.weights[s][i * G + g];
        }
      }
    }
    for (auto const &t : p_.targets)
    {
      lowered_targets_.push_back(t.is_zero() ? 0.0 : std::nextafter(t.to_double(), 0.0));
    }
  }

  AssignmentSolution run()
  {
    if (p_.require_nonempty && k_ > n_)
    {
      throw InfeasibleTarget("cannot fill " + std::to_string(k_) + " clusters with " + std::to_string(n_) +
                             " rows");
    }
    domain_.assign(n_ * k_, 1);

    // Incumbent from nearest assignment, then repaired.
    {
      std::vector<Label> start(n_);
      for (std::size_t i = 0; i < n_; ++i)
      {
        start[i] = static_cast<Label>(argmin_row(i, p_.costs));
      }
      try_incumbent(repair(std::move(start)));
    }

    std::vector<double> reduced = p_.costs;
    double              lag     = -std::numeric_limits<double>::infinity();
    if (!p_.targets.empty() || p_.require_nonempty)
    {
      lag = lagrangian(reduced);
    }
    root_bound_ = std::max(lag, simple_root_bound());

    if (has_incumbent_ && root_bound_ >= prune_threshold())
    {
      return finish(true);
    }
    if (has_incumbent_ && std::isfinite(lag))
    {
      fix_by_reduced_cost(reduced, lag);
    }
    build_order(reduced);
    if (!std::isfinite(lag))
    {
      lag_const_ = 0.0;
      reduced    = p_.costs;
    }
    reduced_ = std::move(reduced);
    init_state();
    if (!root_feasible())
    {
      return finish(true);
    }
    bool const complete = dfs(0);
    return finish(complete);
  }

private:
  // ----------------------------------------------------------------- helpers

  std::size_t argmin_row(std::size_t i, std::vector<double> const &c) const
  {
    std::size_t best = k_;
    for (std::size_t j = 0; j < k_; ++j)
    {
      if (domain_[i * k_ + j] && (best == k_ || c[i * k_ + j] < c[i * k_ + best]))
      {
        best = j;
      }
    }
    return best;
  }

  double prune_threshold() const
  {
    double const tol = std::max(1.0, std::abs(incumbent_obj_)) * 1e-12;
    return incumbent_obj_ - std::max(tol, opt_.relative_gap * std::abs(incumbent_obj_));
  }

  bool out_of_budget()
  {
    if (opt_.node_limit && nodes_ >= *opt_.node_limit)
    {
      return true;
    }
    if (opt_.time_cap_seconds && (nodes_ & 1023U) == 0)
    {
      std::chrono::duration<double> const el = std::chrono::steady_clock::now() - start_;
      if (el.count() >= *opt_.time_cap_seconds)
      {
        timed_out_ = true;
      }
    }
    return timed_out_;
  }

  void try_incumbent(std::optional<std::vector<Label>> const &labels)
  {
    if (!labels || !assignment_feasible(p_, *labels))
    {
      return;
    }
    double const obj = assignment_objective(p_, *labels);
    if (!has_incumbent_ || obj < incumbent_obj_)
    {
      incumbent_     = *labels;
      incumbent_obj_ = obj;
      has_incumbent_ = true;
    }
  }

  // Exact violation of one cluster/feature: sum over groups of the shortfall
  // (target * max - count), scaled by the target denominator.
  double cluster_violation(std::span<std::int64_t const> W, std::size_t s) const
  {
    auto const   G  = p_.group_sizes[s];
    auto const  &t  = p_.targets[s];
    std::int64_t hi = 0;
    for (std::size_t g = 0; g < G; ++g)
    {
      hi = std::max(hi, W[offsets_[s] + g]);
    }
    double v = 0.0;
    for (std::size_t g = 0; g < G; ++g)
    {
      __int128 const gap = static_cast<__int128>(t.num()) * hi - static_cast<__int128>(t.den()) * W[offsets_[s] + g];
      if (gap > 0)
      {
        v += static_cast<double>(gap) / static_cast<double>(t.den());
      }
    }
    return v;
  }

  double violation_of(std::span<std::int64_t const> W, std::size_t size) const
  {
    double v = (p_.require_nonempty && size == 0) ? 1e12 : 0.0;
    for (std::size_t s = 0; s < p_.group_sizes.size(); ++s)
    {
      v += cluster_violation(W, s);
    }
    return v;
  }

  // Greedy repair toward feasibility with cheapest single-row moves, then
  // cost polishing that keeps feasibility.
  std::optional<std::vector<Label>> repair(std::vector<Label> a)
  {
    std::size_t const         T = total_groups_;
    std::vector<std::int64_t> W(k_ * T, 0);
    std::vector<std::size_t>  size(k_, 0);
    for (std::size_t i = 0; i < n_; ++i)
    {
      auto const j = static_cast<std::size_t>(a[i]);
      ++size[j];
      for (std::size_t g = 0; g < T; ++g)
      {
        W[j * T + g] += w_[i * T + g];
      }
    }
    std::vector<double> viol(k_);
    for (std::size_t j = 0; j < k_; ++j)
    {
      viol[j] = violation_of(std::span(W).subspan(j * T, T), size[j]);
    }
    std::vector<std::int64_t> Wa(T);
    std::vector<std::int64_t> Wb(T);

    auto move_delta = [&](std::size_t i, std::size_t from, std::size_t to) {
      for (std::size_t g = 0; g < T; ++g)
      {
        Wa[g] = W[from * T + g] - w_[i * T + g];
        Wb[g] = W[to * T + g] + w_[i * T + g];
      }
      return violation_of(Wa, size[from] - 1) + violation_of(Wb, size[to] + 1) - viol[from] - viol[to];
    };
    auto apply_move = [&](std::size_t i, std::size_t to) {
      auto const from = static_cast<std::size_t>(a[i]);
      for (std::size_t g = 0; g < T; ++g)
      {
        W[from * T + g] -= w_[i * T + g];
        W[to * T + g] += w_[i * T + g];
      }
      --size[from];
      ++size[to];
      a[i]       = static_cast<Label>(to);
      viol[from] = violation_of(std::span(W).subspan(from * T, T), size[from]);
      viol[to]   = violation_of(std::span(W).subspan(to * T, T), size[to]);
    };
    auto total_violation = [&]() { return std::accumulate(viol.begin(), viol.end(), 0.0); };

    std::size_t const max_steps = 20 * n_ + 100;
    for (std::size_t step = 0; step < max_steps && total_violation() > 0.0; ++step)
    {
      double      best_key = std::numeric_limits<double>::infinity();
      std::size_t best_i   = n_;
      std::size_t best_j   = k_;
      for (std::size_t i = 0; i < n_; ++i)
      {
        auto const from = static_cast<std::size_t>(a[i]);
        for (std::size_t to = 0; to < k_; ++to)
        {
          if (to == from || !domain_[i * k_ + to])
          {
            continue;
          }
          double const dv = move_delta(i, from, to);
          if (!(dv < 0.0))
          {
            continue;
          }
          double const dc  = p_.cost(i, to) - p_.cost(i, from);
          double const key = dc / -dv;
          if (key < best_key)
          {
            best_key = key;
            best_i   = i;
            best_j   = to;
          }
        }
      }
      if (best_i == n_)
      {
        return std::nullopt;
      }
      apply_move(best_i, best_j);
    }
    if (total_violation() > 0.0)
    {
      return std::nullopt;
    }
    polish(a, W, size);
    return a;
  }

  // Feasibility-preserving cost descent: single-row moves, then exact per-cell
  // transport given the current cluster counts of every weight pattern.
  void polish(std::vector<Label> &a, std::vector<std::int64_t> &W, std::vector<std::size_t> &size)
  {
    std::size_t const T = total_groups_;
    // Rows with identical weight vectors are interchangeable for the constraints.
    std::map<std::vector<std::int64_t>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < n_; ++i)
    {
      cells[std::vector<std::int64_t>(w_.begin() + static_cast<std::ptrdiff_t>(i * T),
                                      w_.begin() + static_cast<std::ptrdiff_t>((i + 1) * T))]
          .push_back(i);
    }
    std::vector<std::int64_t> Wa(T);
    std::vector<std::int64_t> Wb(T);
    for (int round = 0; round < 50; ++round)
    {
      bool improved = false;
      for (std::size_t pass = 0; pass < n_; ++pass)
      {
        double      best_dc = -1e-12;
        std::size_t best_i  = n_;
        std::size_t best_j  = k_;
        for (std::size_t i = 0; i < n_; ++i)
        {
          auto const from = static_cast<std::size_t>(a[i]);
          if (p_.require_nonempty && size[from] == 1)
          {
            continue;
          }
          for (std::size_t to = 0; to < k_; ++to)
          {
            if (to == from || !domain_[i * k_ + to])
            {
              continue;
            }
            double const dc = p_.cost(i, to) - p_.cost(i, from);
            if (!(dc < best_dc))
            {
              continue;
            }
            for (std::size_t g = 0; g < T; ++g)
            {
              Wa[g] = W[from * T + g] - w_[i * T + g];
              Wb[g] = W[to * T + g] + w_[i * T + g];
            }
            if (violation_of(Wa, size[from] - 1) == 0.0 && violation_of(Wb, size[to] + 1) == 0.0)
            {
              best_dc = dc;
              best_i  = i;
              best_j  = to;
            }
          }
        }
        if (best_i == n_)
        {
          break;
        }
        auto const from = static_cast<std::size_t>(a[best_i]);
        for (std::size_t g = 0; g < T; ++g)
        {
          W[from * T + g] -= w_[best_i * T + g];
          W[best_j * T + g] += w_[best_i * T + g];
        }
        --size[from];
        ++size[best_j];
        a[best_i] = static_cast<Label>(best_j);
        improved  = true;
      }
      for (auto const &[pattern, members] : cells)
      {
        if (members.size() < 2)
        {
          continue;
        }
        std::vector<std::int64_t> counts(k_, 0);
        std::vector<double>       c(members.size() * k_);
        bool                      restricted = false;
        for (std::size_t r = 0; r < members.size(); ++r)
        {
          ++counts[static_cast<std::size_t>(a[members[r]])];
          for (std::size_t j = 0; j < k_; ++j)
          {
            c[r * k_ + j] = p_.cost(members[r], j);
            restricted    = restricted || !domain_[members[r] * k_ + j];
          }
        }
        if (restricted)
        {
          continue;
        }
        double before = 0.0;
        for (auto i : members)
        {
          before += p_.cost(i, static_cast<std::size_t>(a[i]));
        }
        auto res = solve_transport<double>(members.size(), k_, std::move(c), counts, counts);
        if (res && res->cost < before - 1e-12 * std::max(1.0, before))
        {
          for (std::size_t r = 0; r < members.size(); ++r)
          {
            a[members[r]] = res->assignment[r];
          }
          improved = true;
        }
      }
      if (!improved)
      {
        break;
      }
    }
  }

  double simple_root_bound() const
  {
    std::vector<Label> none(n_, -1);
    return lower_bound(p_, none);
  }

  // Subgradient ascent on the Lagrangian dual of the balance and non-emptiness
  // constraints. Leaves the best reduced costs in `reduced` and returns the bound.
  double lagrangian(std::vector<double> &reduced)
  {
    std::size_t const T = total_groups_;
    // Multipliers: pi[j][s][g][h] for constraint W_g - t W_h >= 0, nu[j] for size >= 1.
    std::vector<std::size_t> pair_offset;
    std::size_t              pairs = 0;
    for (auto G : p_.group_sizes)
    {
      pair_offset.push_back(pairs);
      pairs += G * G;
    }
    std::vector<double> pi(k_ * pairs, 0.0);
    std::vector<double> nu(k_, 0.0);
    std::vector<double> best_pi = pi;
    std::vector<double> best_nu = nu;
    std::vector<double> coef(k_ * T, 0.0);
    std::vector<double> r(n_ * k_);
    std::vector<Label>  x(n_);
    std::vector<double> grad_pi(k_ * pairs, 0.0);
    std::vector<double> grad_nu(k_, 0.0);
    std::vector<double> Wd(k_ * T);
    std::vector<double> sizes(k_);

    double best       = -std::numeric_limits<double>::infinity();
    double theta      = 2.0;
    int    stall      = 0;
    double upper_hint = has_incumbent_ ? incumbent_obj_ : std::numeric_limits<double>::quiet_NaN();

    auto evaluate = [&]() {
      std::fill(coef.begin(), coef.end(), 0.0);
      for (std::size_t j = 0; j < k_; ++j)
      {
        for (std::size_t s = 0; s < p_.group_sizes.size(); ++s)
        {
          auto const G = p_.group_sizes[s];
          double const t = lowered_targets_[s];
          for (std::size_t g = 0; g < G; ++g)
          {
            for (std::size_t h = 0; h < G; ++h)
            {
              if (g == h)
              {
                continue;
              }
              double const m = pi[j * pairs + pair_offset[s] + g * G + h];
              coef[j * T + offsets_[s] + g] += m;
              coef[j * T + offsets_[s] + h] -= t * m;
            }
          }
        }
      }
      double L = 0.0;
      for (std::size_t j = 0; j < k_; ++j)
      {
        L += nu[j];
      }
      for (std::size_t i = 0; i < n_; ++i)
      {
        double      best_r = std::numeric_limits<double>::infinity();
        std::size_t arg    = 0;
        for (std::size_t j = 0; j < k_; ++j)
        {
          double v = p_.cost(i, j) - nu[j];
          for (std::size_t g = 0; g < T; ++g)
          {
            auto const wg = w_[i * T + g];
            if (wg != 0)
            {
              v -= static_cast<double>(wg) * coef[j * T + g];
            }
          }
          r[i * k_ + j] = v;
          if (domain_[i * k_ + j] && v < best_r)
          {
            best_r = v;
            arg    = j;
          }
        }
        x[i] = static_cast<Label>(arg);
        L += best_r;
      }
      return L;
    };

    int const iterations = std::max(1, opt_.lagrangian_iterations);
    for (int it = 0; it < iterations; ++it)
    {
      double const L = evaluate();
      if (L > best)
      {
        best    = L;
        best_pi = pi;
        best_nu = nu;
        reduced = r;
        stall   = 0;
      }
      else if (++stall >= 10)
      {
        theta *= 0.5;
        stall = 0;
      }
      if (it % 25 == 24)
      {
        try_incumbent(repair(x));
        if (has_incumbent_)
        {
          upper_hint = incumbent_obj_;
          if (best >= prune_threshold())
          {
            break;
          }
        }
      }
      // Subgradient of the relaxed constraints at x.
      std::fill(Wd.begin(), Wd.end(), 0.0);
      std::fill(sizes.begin(), sizes.end(), 0.0);
      for (std::size_t i = 0; i < n_; ++i)
      {
        auto const j = static_cast<std::size_t>(x[i]);
        sizes[j] += 1.0;
        for (std::size_t g = 0; g < T; ++g)
        {
          Wd[j * T + g] += static_cast<double>(w_[i * T + g]);
        }
      }
      double norm2 = 0.0;
      std::fill(grad_pi.begin(), grad_pi.end(), 0.0);
      std::fill(grad_nu.begin(), grad_nu.end(), 0.0);
      for (std::size_t j = 0; j < k_; ++j)
      {
        if (p_.require_nonempty)
        {
          double gnu = sizes[j] - 1.0;
          if (!(nu[j] <= 0.0 && gnu > 0.0))
          {
            grad_nu[j] = gnu;
            norm2 += gnu * gnu;
          }
        }
        for (std::size_t s = 0; s < p_.group_sizes.size(); ++s)
        {
          auto const   G = p_.group_sizes[s];
          double const t = lowered_targets_[s];
          if (t == 0.0)
          {
            continue;
          }
          for (std::size_t g = 0; g < G; ++g)
          {
            for (std::size_t h = 0; h < G; ++h)
            {
              if (g == h)
              {
                continue;
              }
              auto const   idx = j * pairs + pair_offset[s] + g * G + h;
              double const gv  = Wd[j * T + offsets_[s] + g] - t * Wd[j * T + offsets_[s] + h];
              if (pi[idx] <= 0.0 && gv > 0.0)
              {
                continue;
              }
              grad_pi[idx] = gv;
              norm2 += gv * gv;
            }
          }
        }
      }
      if (norm2 <= 0.0)
      {
        try_incumbent(x);
        // x satisfies every relaxed constraint with complementary slackness: optimal.
        break;
      }
      double gap = std::isnan(upper_hint) ? std::max(1.0, std::abs(L)) * 0.05 : upper_hint - L;
      gap        = std::max(gap, 1e-9 * std::max(1.0, std::abs(L)));
      double const step = theta * gap / norm2;
      for (std::size_t idx = 0; idx < pi.size(); ++idx)
      {
        pi[idx] = std::max(0.0, pi[idx] - step * grad_pi[idx]);
      }
      for (std::size_t j = 0; j < k_; ++j)
      {
        nu[j] = std::max(0.0, nu[j] - step * grad_nu[j]);
      }
    }
    lag_const_ = std::accumulate(best_nu.begin(), best_nu.end(), 0.0);
    return best;
  }

  void fix_by_reduced_cost(std::vector<double> const &reduced, double lag)
  {
    double const limit = prune_threshold();
    for (std::size_t i = 0; i < n_; ++i)
    {
      double rmin = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k_; ++j)
      {
        if (domain_[i * k_ + j])
        {
          rmin = std::min(rmin, reduced[i * k_ + j]);
        }
      }
      for (std::size_t j = 0; j < k_; ++j)
      {
        if (domain_[i * k_ + j] && lag + (reduced[i * k_ + j] - rmin) >= limit)
        {
          domain_[i * k_ + j] = 0;
        }
      }
    }
  }

  void build_order(std::vector<double> const &reduced)
  {
    std::vector<double> regret(n_, 0.0);
    values_.assign(n_, {});
    for (std::size_t i = 0; i < n_; ++i)
    {
      auto &vals = values_[i];
      for (std::size_t j = 0; j < k_; ++j)
      {
        if (domain_[i * k_ + j])
        {
          vals.push_back(static_cast<std::uint32_t>(j));
        }
      }
      std::stable_sort(vals.begin(), vals.end(), [&](auto a, auto b) {
        return reduced[i * k_ + a] < reduced[i * k_ + b];
      });
      if (vals.size() <= 1)
      {
        regret[i] = std::numeric_limits<double>::infinity();
      }
      else
      {
        double a = std::numeric_limits<double>::infinity();
        double b = std::numeric_limits<double>::infinity();
        for (auto j : vals)
        {
          double const c = p_.cost(i, j);
          if (c < a)
          {
            b = a;
            a = c;
          }
          else if (c < b)
          {
            b = c;
          }
        }
        regret[i] = b - a;
      }
    }
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](auto a, auto b) { return regret[a] > regret[b]; });
  }

  void init_state()
  {
    std::size_t const T = total_groups_;
    suffix_cost_.assign(n_ + 1, 0.0);
    suffix_red_.assign(n_ + 1, 0.0);
    for (std::size_t d = n_; d-- > 0;)
    {
      auto const  i  = order_[d];
      double      mc = std::numeric_limits<double>::infinity();
      double      mr = std::numeric_limits<double>::infinity();
      for (auto j : values_[i])
      {
        mc = std::min(mc, p_.cost(i, j));
        mr = std::min(mr, reduced_[i * k_ + j]);
      }
      suffix_cost_[d] = suffix_cost_[d + 1] + mc;
      suffix_red_[d]  = suffix_red_[d + 1] + mr;
    }
    W_.assign(k_ * T, 0);
    A_.assign(k_ * T, 0);
    F_.assign(T, 0);
    size_.assign(k_, 0);
    avail_.assign(k_, 0);
    for (std::size_t i = 0; i < n_; ++i)
    {
      for (std::size_t g = 0; g < T; ++g)
      {
        F_[g] += w_[i * T + g];
      }
      for (auto j : values_[i])
      {
        ++avail_[j];
        for (std::size_t g = 0; g < T; ++g)
        {
          A_[j * T + g] += w_[i * T + g];
        }
      }
    }
    current_.assign(n_, -1);
  }

  // Necessary conditions for a feasible completion of the current partial assignment.
  bool propagate_ok() const
  {
    std::size_t const T          = total_groups_;
    std::size_t       free_rows  = n_ - depth_;
    std::size_t       empty      = 0;
    for (std::size_t j = 0; j < k_; ++j)
    {
      if (size_[j] == 0)
      {
        if (p_.require_nonempty && avail_[j] == 0)
        {
          return false;
        }
        ++empty;
      }
    }
    if (p_.require_nonempty && empty > free_rows)
    {
      return false;
    }
    for (std::size_t s = 0; s < p_.group_sizes.size(); ++s)
    {
      auto const &t = p_.targets[s];
      if (t.is_zero())
      {
        continue;
      }
      auto const G = p_.group_sizes[s];
      auto const o = offsets_[s];
      for (std::size_t g = 0; g < G; ++g)
      {
        std::int64_t need_total = 0;
        for (std::size_t j = 0; j < k_; ++j)
        {
          std::int64_t hi = 0;
          for (std::size_t h = 0; h < G; ++h)
          {
            hi = std::max(hi, W_[j * T + o + h]);
          }
          std::int64_t need = t.ceil_times(hi);
          if (p_.require_nonempty)
          {
            need = std::max<std::int64_t>(need, 1);
          }
          std::int64_t const missing = need - W_[j * T + o + g];
          if (missing > 0)
          {
            if (missing > A_[j * T + o + g])
            {
              return false;
            }
            need_total += missing;
          }
        }
        if (need_total > F_[o + g])
        {
          return false;
        }
      }
      // Summed over clusters, the free g supply must cover every shortfall
      // against t * W_h, including the free h weight not absorbed by slack.
      auto const num = static_cast<__int128>(t.num());
      auto const den = static_cast<__int128>(t.den());
      for (std::size_t g = 0; g < G; ++g)
      {
        for (std::size_t h = 0; h < G; ++h)
        {
          if (g == h)
          {
            continue;
          }
          __int128 deficit = 0;
          __int128 slack   = 0;
          for (std::size_t j = 0; j < k_; ++j)
          {
            __int128 const diff = num * W_[j * T + o + h] - den * W_[j * T + o + g];
            (diff > 0 ? deficit : slack) += diff > 0 ? diff : -diff;
          }
          __int128 const spill = num * F_[o + h] - slack;
          if (deficit + (spill > 0 ? spill : 0) > den * F_[o + g])
          {
            return false;
          }
        }
      }
    }
    return true;
  }

  bool root_feasible() const
  {
    return propagate_ok();
  }

  void apply(std::size_t i, std::size_t j)
  {
    std::size_t const T = total_groups_;
    current_[i]         = static_cast<Label>(j);
    ++size_[j];
    for (auto jj : values_[i])
    {
      --avail_[jj];
      for (std::size_t g = 0; g < T; ++g)
      {
        A_[jj * T + g] -= w_[i * T + g];
      }
    }
    for (std::size_t g = 0; g < T; ++g)
    {
      W_[j * T + g] += w_[i * T + g];
      F_[g] -= w_[i * T + g];
    }
    fixed_cost_ += p_.cost(i, j);
    fixed_red_ += reduced_[i * k_ + j];
    ++depth_;
  }

  void undo(std::size_t i, std::size_t j)
  {
    std::size_t const T = total_groups_;
    --depth_;
    fixed_cost_ -= p_.cost(i, j);
    fixed_red_ -= reduced_[i * k_ + j];
    for (std::size_t g = 0; g < T; ++g)
    {
      W_[j * T + g] -= w_[i * T + g];
      F_[g] += w_[i * T + g];
    }
    for (auto jj : values_[i])
    {
      ++avail_[jj];
      for (std::size_t g = 0; g < T; ++g)
      {
        A_[jj * T + g] += w_[i * T + g];
      }
    }
    --size_[j];
    current_[i] = -1;
  }

  // Returns false when the budget ran out before the subtree was exhausted.
  bool dfs(std::size_t d)
  {
    if (out_of_budget())
    {
      return false;
    }
    ++nodes_;
    if (d == n_)
    {
      // Rebuild the objective in row order to compare like-for-like.
      if (assignment_feasible(p_, current_))
      {
        double const obj = assignment_objective(p_, current_);
        if (!has_incumbent_ || obj < incumbent_obj_)
        {
          incumbent_     = current_;
          incumbent_obj_ = obj;
          has_incumbent_ = true;
        }
      }
      return true;
    }
    auto const i = order_[d];
    for (auto j : values_[i])
    {
      if (has_incumbent_)
      {
        double const limit = prune_threshold();
        double const lag   = lag_const_ + fixed_red_ + reduced_[i * k_ + j] + suffix_red_[d + 1];
        if (lag >= limit)
        {
          // Values are sorted by reduced cost, so later ones are no better.
          break;
        }
        if (fixed_cost_ + p_.cost(i, j) + suffix_cost_[d + 1] >= limit)
        {
          continue;
        }
      }
      apply(i, j);
      bool const ok = propagate_ok();
      bool       complete = true;
      if (ok)
      {
        complete = dfs(d + 1);
      }
      undo(i, j);
      if (!complete)
      {
        return false;
      }
    }
    return true;
  }

  AssignmentSolution finish(bool complete)
  {
    if (!has_incumbent_)
    {
      if (complete)
      {
        throw InfeasibleTarget("no assignment satisfies the balance targets and non-emptiness");
      }
      throw TimeCapNoIncumbent("assignment search exhausted its budget after " + std::to_string(nodes_) +
                               " nodes without a feasible assignment");
    }
    AssignmentSolution sol;
    sol.row_to_cluster = incumbent_;
    sol.objective      = incumbent_obj_;
    sol.optimal        = complete && opt_.relative_gap == 0.0;
    sol.nodes_explored = nodes_;
    sol.lower_bound    = complete ? incumbent_obj_ : std::min(root_bound_, incumbent_obj_);
    return sol;
  }

  AssignmentProblem const &p_;
  AssignmentOptions const &opt_;
  std::size_t              n_;
  std::size_t              k_;
  std::chrono::steady_clock::time_point start_;

  std::size_t               total_groups_{0};
  std::vector<std::size_t>  offsets_;
  std::vector<std::int64_t> w_;  // n x total_groups
  std::vector<double>       lowered_targets_;

  std::vector<std::uint8_t>                domain_;
  std::vector<std::size_t>                 order_;
  std::vector<std::vector<std::uint32_t>>  values_;
  std::vector<double>                      reduced_;
  std::vector<double>                      suffix_cost_;
  std::vector<double>                      suffix_red_;
  double                                   lag_const_{0.0};
  double                                   root_bound_{0.0};

  std::vector<std::int64_t> W_;
  std::vector<std::int64_t> A_;
  std::vector<std::int64_t> F_;
  std::vector<std::size_t>  size_;
  std::vector<std::size_t>  avail_;
  std::vector<Label>        current_;
  std::size_t               depth_{0};
  double                    fixed_cost_{0.0};
  double                    fixed_red_{0.0};

  std::vector<Label> incumbent_;
  double             incumbent_obj_{0.0};
  bool               has_incumbent_{false};
  std::uint64_t      nodes_{0};
  bool               timed_out_{false};
};

}  // namespace detail

/// Optimal fair assignment by depth-first branch-and-bound.
///
/// Rows are branched in descending regret order and clusters tried in
/// ascending reduced-cost order. Nodes are pruned by the cheapest-completion
/// bound, by a Lagrangian bound over the balance and non-emptiness
/// constraints, and by counting whether the remaining group supply can still
/// lift every cluster to its required minimum. `optimal` is false when a time
/// or node cap stopped the search early; the best incumbent is returned then.
inline AssignmentSolution solve_assignment(AssignmentProblem const &problem, AssignmentOptions const &options = {})
{
  problem.validate();
  if (problem.rows < problem.clusters && problem.require_nonempty)
  {
    throw InfeasibleTarget("more clusters than rows");
  }
  bool const vacuous = std::all_of(problem.targets.begin(), problem.targets.end(),
                                   [](Rational const &t) { return t.is_zero(); });
  if (vacuous && problem.require_nonempty)
  {
    AssignmentSolution sol;
    sol.row_to_cluster = cheapest_nonempty_assignment(problem.costs, problem.rows, problem.clusters);
    sol.objective      = assignment_objective(problem, sol.row_to_cluster);
    sol.optimal        = true;
    sol.lower_bound    = sol.objective;
    return sol;
  }
  detail::AssignmentSearch search(problem, options);
  return search.run();
}

}  // namespace fairkm
