#pragma once

// MS-FlowFC staged assignment. Protected groups are assigned one at a time in
// descending size order; every stage after the first is a min-cost flow whose
// per-center demand and capacity come from the counts of earlier stages.

#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/mincostflow.hpp"
#include "fairkm/random.hpp"
#include "fairkm/rational.hpp"
#include "fairkm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

namespace fairkm {

inline constexpr std::int64_t kDefaultCostScale      = 1'000'000;
inline constexpr std::size_t  kDefaultFirstStageCap  = 50;

struct StagePlan
{
  std::vector<std::int32_t>             order;    // group indices, largest first
  std::vector<std::vector<std::size_t>> members;  // members[l] = objects of order[l]
};

/// Groups of feature s by descending size; equal sizes keep group index order.
inline StagePlan plan_stages(Dataset const &data, std::size_t s)
{
  auto const &feat = data.feature(s);
  auto const  G    = feat.group_count();
  std::vector<std::vector<std::size_t>> by_group(G);
  for (std::size_t i = 0; i < data.n(); ++i)
  {
    by_group[static_cast<std::size_t>(feat.membership[i])].push_back(i);
  }
  StagePlan plan;
  plan.order.resize(G);
  std::iota(plan.order.begin(), plan.order.end(), 0);
  std::stable_sort(plan.order.begin(), plan.order.end(), [&](std::int32_t a, std::int32_t b) {
    return by_group[static_cast<std::size_t>(a)].size() > by_group[static_cast<std::size_t>(b)].size();
  });
  for (auto g : plan.order)
  {
    plan.members.push_back(std::move(by_group[static_cast<std::size_t>(g)]));
  }
  return plan;
}

struct StageBounds
{
  std::vector<Rational>                lb;
  std::vector<std::optional<Rational>> ub;  // nullopt = unbounded
};

/// prior_counts[j] lists |C_j ∩ G_l'| for every earlier stage l'.
inline StageBounds stage_bounds(std::vector<std::vector<std::int64_t>> const &prior_counts, Rational const &target)
{
  StageBounds b;
  for (auto const &counts : prior_counts)
  {
    if (target.is_zero() || counts.empty())
    {
      b.lb.emplace_back(0);
      b.ub.emplace_back(std::nullopt);
      continue;
    }
    auto const [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    b.lb.push_back(target * Rational(*hi));
    b.ub.emplace_back(Rational(*lo) / target);
  }
  return b;
}

/// Objects of one stage routed to centers and on to a sink. Center j must
/// absorb -h_w[j] units and may pass up to u[j] more to the sink, so it
/// receives between -h_w[j] and -h_w[j] + u[j] objects.
struct FlowNetwork
{
  std::size_t               m{0};
  std::size_t               k{0};
  std::vector<std::int64_t> arc_cost;  // m x k
  std::vector<std::int64_t> h_w;
  std::vector<std::int64_t> u;
  std::vector<std::int64_t> eps_w;
  std::vector<std::int64_t> eps_arc;

  std::int64_t h_sink() const
  {
    return -(static_cast<std::int64_t>(m) + std::accumulate(h_w.begin(), h_w.end(), std::int64_t{0}));
  }
  std::int64_t min_received(std::size_t j) const { return -h_w[j]; }
  std::int64_t max_received(std::size_t j) const { return -h_w[j] + u[j]; }

  std::int64_t total_demand() const
  {
    std::int64_t total = 0;
    for (std::size_t j = 0; j < k; ++j)
    {
      total += min_received(j);
    }
    return total;
  }
  std::int64_t total_capacity() const
  {
    std::int64_t total = 0;
    for (std::size_t j = 0; j < k; ++j)
    {
      total += max_received(j);
    }
    return total;
  }
  bool needs_adjustment() const
  {
    auto const mm = static_cast<std::int64_t>(m);
    for (std::size_t j = 0; j < k; ++j)
    {
      if (u[j] < 0)
      {
        return true;
      }
    }
    return total_demand() > mm || total_capacity() < mm;
  }
  std::int64_t epsilon_total() const
  {
    return std::accumulate(eps_w.begin(), eps_w.end(), std::int64_t{0}) +
           std::accumulate(eps_arc.begin(), eps_arc.end(), std::int64_t{0});
  }
};

inline std::int64_t scaled_cost(double squared, std::int64_t cost_scale)
{
  double const v = std::round(squared * static_cast<double>(cost_scale));
  if (!(v < 4.0e15))
  {
    throw InvalidInput("arc cost too large for integer scaling; scale the features to [0,1] first");
  }
  return static_cast<std::int64_t>(v);
}

inline FlowNetwork build_network(Matrix const &points, std::span<std::size_t const> stage_objects,
                                 Matrix const &centers, StageBounds const &bounds,
                                 std::int64_t cost_scale = kDefaultCostScale)
{
  FlowNetwork net;
  net.m = stage_objects.size();
  net.k = centers.rows();
  net.arc_cost.resize(net.m * net.k);
  for (std::size_t v = 0; v < net.m; ++v)
  {
    auto const x = points.row(stage_objects[v]);
    for (std::size_t j = 0; j < net.k; ++j)
    {
      net.arc_cost[v * net.k + j] = scaled_cost(squared_distance(x, centers.row(j)), cost_scale);
    }
  }
  auto const mm = static_cast<std::int64_t>(net.m);
  net.h_w.resize(net.k);
  net.u.resize(net.k);
  net.eps_w.assign(net.k, 0);
  net.eps_arc.assign(net.k, 0);
  for (std::size_t j = 0; j < net.k; ++j)
  {
    net.h_w[j]            = -bounds.lb[j].ceil_times(1);
    std::int64_t const hi = bounds.ub[j] ? std::min(bounds.ub[j]->floor_times(1), mm) : mm;
    net.u[j]              = hi + net.h_w[j];
  }
  return net;
}

struct FlowSolution
{
  std::vector<std::int32_t> object_to_center;  // per stage object
  std::vector<std::int64_t> to_sink;           // flow on (w, sink)
  std::int64_t              cost{0};
};

enum class FlowMethod
{
  Transport,  // bipartite successive shortest paths specialised for small k
  Graph       // generic successive shortest paths on the explicit network
};

inline std::optional<FlowSolution> solve_min_cost_flow(FlowNetwork const &net,
                                                       FlowMethod         method = FlowMethod::Transport)
{
  for (std::size_t j = 0; j < net.k; ++j)
  {
    if (net.u[j] < 0 || net.h_w[j] > 0)
    {
      return std::nullopt;
    }
  }
  FlowSolution out;
  out.to_sink.assign(net.k, 0);
  if (method == FlowMethod::Transport)
  {
    std::vector<std::int64_t> lower(net.k);
    std::vector<std::int64_t> upper(net.k);
    for (std::size_t j = 0; j < net.k; ++j)
    {
      lower[j] = net.min_received(j);
      upper[j] = net.max_received(j);
    }
    auto res = solve_transport<std::int64_t>(net.m, net.k, net.arc_cost, std::move(lower), std::move(upper));
    if (!res)
    {
      return std::nullopt;
    }
    out.object_to_center = std::move(res->assignment);
    out.cost             = res->cost;
    for (std::size_t j = 0; j < net.k; ++j)
    {
      out.to_sink[j] = res->counts[j] - net.min_received(j);
    }
    return out;
  }

  // Nodes: objects 0..m-1, centers m..m+k-1, sink m+k.
  MinCostFlowGraph g(net.m + net.k + 1);
  std::size_t const sink = net.m + net.k;
  std::vector<std::pair<std::size_t, std::size_t>> obj_arcs(net.m * net.k);
  std::vector<std::pair<std::size_t, std::size_t>> sink_arcs(net.k);
  for (std::size_t v = 0; v < net.m; ++v)
  {
    g.set_supply(v, 1);
    for (std::size_t j = 0; j < net.k; ++j)
    {
      obj_arcs[v * net.k + j] = g.add_arc(v, net.m + j, 1, net.arc_cost[v * net.k + j]);
    }
  }
  for (std::size_t j = 0; j < net.k; ++j)
  {
    g.set_supply(net.m + j, net.h_w[j]);
    sink_arcs[j] = g.add_arc(net.m + j, sink, net.u[j], 0);
  }
  g.set_supply(sink, net.h_sink());
  auto const cost = g.solve();
  if (!cost)
  {
    return std::nullopt;
  }
  out.cost = *cost;
  out.object_to_center.assign(net.m, -1);
  for (std::size_t v = 0; v < net.m; ++v)
  {
    for (std::size_t j = 0; j < net.k; ++j)
    {
      if (g.flow_on(obj_arcs[v * net.k + j]) == 1)
      {
        out.object_to_center[v] = static_cast<std::int32_t>(j);
      }
    }
  }
  for (std::size_t j = 0; j < net.k; ++j)
  {
    out.to_sink[j] = g.flow_on(sink_arcs[j]);
  }
  return out;
}

/// Relaxes demands (eps_w) and capacities (eps_arc) one unit at a time until
/// the network is feasible, each time at the center whose balance would suffer
/// least. A center whose demand exceeds its own capacity is relaxed on the
/// demand side first.
inline void adjust_parameters(FlowNetwork &net, std::vector<std::vector<std::int64_t>> const &prior_counts,
                              Rational const &target)
{
  auto const mm = static_cast<std::int64_t>(net.m);
  auto decrement_demand = [&](std::size_t j) {
    ++net.h_w[j];
    ++net.eps_w[j];
    ++net.u[j];  // keeps the maximum received count unchanged
  };

  for (std::size_t j = 0; j < net.k; ++j)
  {
    while (net.u[j] < 0)
    {
      decrement_demand(j);
    }
  }

  auto max_prior = [&](std::size_t j) {
    return prior_counts[j].empty() ? 0 : *std::max_element(prior_counts[j].begin(), prior_counts[j].end());
  };
  auto min_prior = [&](std::size_t j) {
    return prior_counts[j].empty() ? 0 : *std::min_element(prior_counts[j].begin(), prior_counts[j].end());
  };

  while (net.total_demand() > mm)
  {
    std::size_t best = net.k;
    Rational    best_score;
    for (std::size_t j = 0; j < net.k; ++j)
    {
      std::int64_t const d = net.min_received(j);
      if (d < 1)
      {
        continue;
      }
      auto const hi    = max_prior(j);
      Rational   score = hi > 0 ? target - Rational(d - 1, hi) : target;
      if (score < Rational(0))
      {
        score = Rational(0);
      }
      if (best == net.k || score < best_score)
      {
        best       = j;
        best_score = score;
      }
    }
    decrement_demand(best);
  }

  while (net.total_capacity() < mm)
  {
    std::size_t best = 0;
    Rational    best_score;
    for (std::size_t j = 0; j < net.k; ++j)
    {
      Rational score = target - Rational(min_prior(j), net.max_received(j) + 1);
      if (score < Rational(0))
      {
        score = Rational(0);
      }
      if (j == 0 || score < best_score)
      {
        best       = j;
        best_score = score;
      }
    }
    ++net.u[best];
    ++net.eps_arc[best];
  }
}

/// Nearest-center assignment of the first-stage objects. Centers that attract
/// nobody are moved onto a stage object drawn by D^2 sampling and the stage is
/// repeated, at most `cap` times. `centers` is updated in place.
inline std::vector<std::int32_t> first_stage_assign(Matrix const &points, std::span<std::size_t const> objects,
                                                    Matrix &centers, Rng &rng,
                                                    std::size_t cap = kDefaultFirstStageCap)
{
  std::size_t const k = centers.rows();
  if (k > objects.size())
  {
    throw FirstStageDegenerate("first stage has " + std::to_string(objects.size()) +
                               " objects but k=" + std::to_string(k) + " centers need one each");
  }
  std::vector<std::int32_t> out(objects.size());
  for (std::size_t attempt = 0;; ++attempt)
  {
    std::vector<std::size_t> sizes(k, 0);
    std::vector<double>      d2(objects.size());
    for (std::size_t v = 0; v < objects.size(); ++v)
    {
      auto const [j, d] = nearest_center(points.row(objects[v]), centers);
      out[v]            = static_cast<std::int32_t>(j);
      d2[v]             = d;
      ++sizes[j];
    }
    std::vector<std::size_t> empty;
    for (std::size_t j = 0; j < k; ++j)
    {
      if (sizes[j] == 0)
      {
        empty.push_back(j);
      }
    }
    if (empty.empty())
    {
      return out;
    }
    if (attempt >= cap)
    {
      throw FirstStageDegenerate("first stage still leaves " + std::to_string(empty.size()) +
                                 " center(s) empty after " + std::to_string(cap) + " re-initializations");
    }
    for (auto j : empty)
    {
      double total = 0.0;
      for (auto v : d2)
      {
        total += v;
      }
      std::size_t pick = uniform_index(rng, objects.size());
      if (total > 0.0)
      {
        double r = uniform01(rng) * total;
        for (std::size_t v = 0; v < objects.size(); ++v)
        {
          r -= d2[v];
          if (r < 0.0 && d2[v] > 0.0)
          {
            pick = v;
            break;
          }
        }
      }
      auto const src = points.row(objects[pick]);
      std::copy(src.begin(), src.end(), centers.row(j).begin());
      for (std::size_t v = 0; v < objects.size(); ++v)
      {
        d2[v] = std::min(d2[v], squared_distance(points.row(objects[v]), src));
      }
    }
  }
}

struct StagedAssignment
{
  std::vector<Label> labels;
  std::int64_t       epsilon_demand{0};
  std::int64_t       epsilon_capacity{0};

  std::int64_t epsilon_total() const { return epsilon_demand + epsilon_capacity; }
};

struct FlowOptions
{
  std::int64_t cost_scale{kDefaultCostScale};
  std::size_t  first_stage_cap{kDefaultFirstStageCap};
  FlowMethod   method{FlowMethod::Transport};
};

/// Full MS-FlowFC assignment step for a single sensitive feature.
inline StagedAssignment staged_assign(Dataset const &data, Matrix const &centers_in, Rational const &target,
                                      Rng &rng, FlowOptions const &opt = {})
{
  if (data.feature_count() != 1)
  {
    throw UnsupportedConfiguration("MS-FlowFC needs exactly one sensitive feature, dataset has " +
                                   std::to_string(data.feature_count()));
  }
  std::size_t const k = centers_in.rows();
  StagedAssignment  out;

  // No balance requirement: every stage is plain nearest-center assignment, so
  // the whole step collapses to one nearest assignment that keeps clusters non-empty.
  if (target.is_zero())
  {
    out.labels = nearest_assignment_nonempty(data.points(), centers_in);
    return out;
  }

  auto const plan    = plan_stages(data, 0);
  Matrix     centers = centers_in;
  out.labels.assign(data.n(), -1);
  std::vector<std::vector<std::int64_t>> prior(k);

  auto const first = first_stage_assign(data.points(), plan.members[0], centers, rng, opt.first_stage_cap);
  for (std::size_t j = 0; j < k; ++j)
  {
    prior[j].push_back(0);
  }
  for (std::size_t v = 0; v < first.size(); ++v)
  {
    out.labels[plan.members[0][v]] = first[v];
    ++prior[static_cast<std::size_t>(first[v])].back();
  }

  for (std::size_t l = 1; l < plan.members.size(); ++l)
  {
    auto const &objs   = plan.members[l];
    auto const  bounds = stage_bounds(prior, target);
    auto        net    = build_network(data.points(), objs, centers, bounds, opt.cost_scale);
    if (net.needs_adjustment())
    {
      adjust_parameters(net, prior, target);
    }
    auto sol = solve_min_cost_flow(net, opt.method);
    if (!sol)
    {
      throw Error("stage network infeasible after adjustment");
    }
    out.epsilon_demand += std::accumulate(net.eps_w.begin(), net.eps_w.end(), std::int64_t{0});
    out.epsilon_capacity += std::accumulate(net.eps_arc.begin(), net.eps_arc.end(), std::int64_t{0});
    for (std::size_t j = 0; j < k; ++j)
    {
      prior[j].push_back(0);
    }
    for (std::size_t v = 0; v < objs.size(); ++v)
    {
      auto const j       = sol->object_to_center[v];
      out.labels[objs[v]] = j;
      ++prior[static_cast<std::size_t>(j)].back();
    }
  }
  return out;
}

}  // namespace fairkm
