#pragma once

// Decomposition scheme: k-means++ centers, then alternate an assignment step
// (chosen by the algorithm) with a center update until a stopping rule fires.

#include "fairkm/batching.hpp"
#include "fairkm/blp.hpp"
#include "fairkm/core.hpp"
#include "fairkm/errors.hpp"
#include "fairkm/flow.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/random.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace fairkm {

enum class Algorithm
{
  Mpfc,
  Flow,
  Smpfc,
  Lloyd
};

inline std::string_view algorithm_name(Algorithm a)
{
  switch (a)
  {
  case Algorithm::Mpfc: return "mpfc";
  case Algorithm::Flow: return "flow";
  case Algorithm::Smpfc: return "smpfc";
  case Algorithm::Lloyd: return "lloyd";
  }
  return "?";
}

inline Algorithm parse_algorithm(std::string_view name)
{
  if (name == "mpfc") return Algorithm::Mpfc;
  if (name == "flow" || name == "ms-flowfc") return Algorithm::Flow;
  if (name == "smpfc" || name == "s-mpfc") return Algorithm::Smpfc;
  if (name == "lloyd") return Algorithm::Lloyd;
  throw InvalidInput("unknown algorithm '" + std::string(name) + "' (expected mpfc, flow, smpfc or lloyd)");
}

struct RunConfig
{
  std::size_t                k{2};
  std::optional<double>      max_time;  // seconds, whole multi-seed run
  double                     delta{0.001};
  std::size_t                max_iter{100};
  std::vector<std::uint64_t> seeds{0};
  Algorithm                  algorithm{Algorithm::Mpfc};

  AssignmentOptions solver;
  FlowOptions       flow;
  std::size_t       r{100};
  BatchOptions      batching;
  std::uint64_t     batch_seed{0};
  std::size_t       threads{1};

  void validate() const
  {
    if (k == 0)
    {
      throw InvalidInput("k must be at least 1");
    }
    if (!(delta >= 0.0))
    {
      throw InvalidInput("delta must be non-negative");
    }
    if (max_iter == 0)
    {
      throw InvalidInput("max_iter must be at least 1");
    }
    if (seeds.empty())
    {
      throw InvalidInput("at least one seed is required");
    }
    if (max_time && !(*max_time > 0.0))
    {
      throw InvalidInput("max_time must be positive");
    }
  }
};

struct ClusteringSolution
{
  std::vector<Label>    labels;
  Matrix                centers;
  double                cost{0.0};
  std::vector<Rational> balances;
  std::vector<bool>     target_met;
  std::size_t           iterations{0};
  std::uint64_t         seed{0};
  double                elapsed{0.0};
  std::int64_t          epsilon_adjustments{0};  // relaxations used by the assignment behind `labels`
  bool                  assignments_optimal{true};  // false if any capped solve returned an incumbent
};

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

inline InfeasibleTarget explain_infeasible(Dataset const &data, std::size_t k, std::vector<Rational> const &targets,
                                           std::string const &cause, std::size_t batch_count = 0)
{
  std::string msg = "no assignment meets the target balance (" + cause + ");";
  for (std::size_t s = 0; s < targets.size(); ++s)
  {
    msg += " feature '" + data.feature(s).name + "': target " + targets[s].str() + ", feasible balance " +
           feasible_balance(data, s, k).str() + ";";
  }
  msg += " lower the target or raise lambda";
  if (batch_count > 0)
  {
    msg += ", or use more batches than r=" + std::to_string(batch_count) +
           " (batches move as a whole, so few batches may admit no balanced split)";
  }
  return InfeasibleTarget(msg);
}

}  // namespace detail

/// One run of the decomposition scheme. `batches` must be supplied for S-MPFC.
/// `deadline` (if set) is checked between iterations; the last completed
/// iterate is returned when it passes.
inline ClusteringSolution run_once(Dataset const &data, RunConfig const &config, std::vector<Rational> const &targets,
                                   std::uint64_t seed, BatchSet const *batches = nullptr,
                                   std::optional<detail::Clock::time_point> deadline = std::nullopt)
{
  config.validate();
  auto const        start = detail::Clock::now();
  std::size_t const k     = config.k;
  auto const       &pts   = data.points();
  if (targets.size() != data.feature_count())
  {
    throw InvalidInput("one target per sensitive feature required");
  }
  if (k > data.n())
  {
    throw InvalidInput("k=" + std::to_string(k) + " exceeds n=" + std::to_string(data.n()));
  }
  if (config.algorithm == Algorithm::Flow && data.feature_count() != 1)
  {
    throw UnsupportedConfiguration("MS-FlowFC supports exactly one sensitive feature; use mpfc or smpfc");
  }
  if (config.algorithm == Algorithm::Smpfc)
  {
    if (batches == nullptr)
    {
      throw InvalidInput("S-MPFC needs a batch set");
    }
    if (batches->r() < k)
    {
      throw InvalidInput("batch count r=" + std::to_string(batches->r()) + " is smaller than k");
    }
  }

  Rng                rng = make_rng(seed);
  ClusteringSolution sol;
  sol.seed = seed;

  Matrix centers;
  if (config.algorithm == Algorithm::Smpfc)
  {
    std::vector<double> mass(batches->sizes.begin(), batches->sizes.end());
    centers = rows_of(batches->representatives, kmeanspp_indices(batches->representatives, k, rng, mass));
  }
  else
  {
    centers = kmeanspp_init(pts, k, rng);
  }

  std::vector<Label> labels;
  std::vector<Label> rep_labels;
  double             prev = 0.0;
  for (std::size_t t = 1; t <= config.max_iter; ++t)
  {
    try
    {
      switch (config.algorithm)
      {
      case Algorithm::Lloyd:
        labels = nearest_assignment_nonempty(pts, centers);
        break;
      case Algorithm::Mpfc:
      {
        auto const p  = AssignmentProblem::for_objects(data, distance_matrix(pts, centers), k, targets);
        auto       as = solve_assignment(p, config.solver);
        sol.assignments_optimal = sol.assignments_optimal && as.optimal;
        labels                  = std::move(as.row_to_cluster);
        break;
      }
      case Algorithm::Flow:
      {
        auto st = staged_assign(data, centers, targets[0], rng, config.flow);
        sol.epsilon_adjustments = st.epsilon_total();
        labels = std::move(st.labels);
        break;
      }
      case Algorithm::Smpfc:
      {
        auto const p  = batch_problem(*batches, centers, targets);
        auto       as = solve_assignment(p, config.solver);
        sol.assignments_optimal = sol.assignments_optimal && as.optimal;
        rep_labels              = std::move(as.row_to_cluster);
        labels                  = map_back(*batches, rep_labels);
        break;
      }
      }
    }
    catch (InfeasibleTarget const &e)
    {
      throw detail::explain_infeasible(data, k, targets, e.what(),
                                       config.algorithm == Algorithm::Smpfc ? batches->r() : 0);
    }

    if (t == 1)
    {
      // Cost^(0): the first assignment measured against the initial centers.
      prev = clustering_cost(pts, labels, centers);
    }
    centers = config.algorithm == Algorithm::Smpfc
                  ? weighted_update(batches->representatives, batches->sizes, rep_labels, k)
                  : update_centers(pts, labels, k);
    double const cost = clustering_cost(pts, labels, centers);

    sol.labels     = labels;
    sol.centers    = centers;
    sol.cost       = cost;
    sol.iterations = t;

    if (improvement(prev, cost) < config.delta)
    {
      break;
    }
    if (deadline && detail::Clock::now() >= *deadline)
    {
      break;
    }
    prev = cost;
  }

  for (std::size_t s = 0; s < data.feature_count(); ++s)
  {
    sol.balances.push_back(clustering_balance(sol.labels, data, s, k));
    sol.target_met.push_back(sol.balances.back() >= targets[s]);
  }
  sol.elapsed = detail::seconds_since(start);
  return sol;
}

struct RunRecord
{
  std::uint64_t seed{0};
  bool          feasible{false};
  double        cost{0.0};
  std::size_t   iterations{0};
  double        elapsed{0.0};
  std::int64_t  epsilon_adjustments{0};
  std::string   error;
};

struct MultiRunResult
{
  ClusteringSolution       best;
  std::vector<RunRecord>   runs;  // in seed-list order
  std::vector<Rational>    targets;
  std::vector<std::string> warnings;
  double                   batching_seconds{0.0};
  double                   total_seconds{0.0};
  std::size_t              batch_count{0};
};

/// Runs every seed (or until max_time is used up) and keeps the lowest-cost
/// solution; ties go to the earlier seed in the list. Batches for S-MPFC are
/// built once unless supplied.
inline MultiRunResult run_multi(Dataset const &data, RunConfig const &config, FairnessSpec const &spec,
                                BatchSet const *batches = nullptr)
{
  config.validate();
  auto const     start    = detail::Clock::now();
  auto           resolved = resolve_targets(spec, data, config.k);
  MultiRunResult out;
  out.targets  = resolved.targets;
  out.warnings = resolved.warnings;

  std::optional<BatchSet> own;
  if (config.algorithm == Algorithm::Smpfc && batches == nullptr)
  {
    auto const t0 = detail::Clock::now();
    Rng        rng = make_rng(config.batch_seed, 1);
    own            = build_batches(data, config.r, rng, config.batching);
    batches        = &*own;
    out.batching_seconds = detail::seconds_since(t0);
  }
  if (batches != nullptr)
  {
    out.batch_count = batches->r();
  }

  std::optional<detail::Clock::time_point> deadline;
  if (config.max_time)
  {
    deadline = start + std::chrono::duration_cast<detail::Clock::duration>(std::chrono::duration<double>(*config.max_time));
  }

  std::size_t const                              N = config.seeds.size();
  std::vector<std::optional<ClusteringSolution>> sols(N);
  std::vector<RunRecord>                         recs(N);
  std::vector<bool>                              ran(N, false);
  // Configuration problems are not per-seed outcomes; they abort the whole run.
  std::exception_ptr fatal;
  std::mutex         fatal_mutex;

  auto run_index = [&](std::size_t i) {
    recs[i].seed = config.seeds[i];
    try
    {
      sols[i]                     = run_once(data, config, out.targets, config.seeds[i], batches, deadline);
      recs[i].feasible            = true;
      recs[i].cost                = sols[i]->cost;
      recs[i].iterations          = sols[i]->iterations;
      recs[i].elapsed             = sols[i]->elapsed;
      recs[i].epsilon_adjustments = sols[i]->epsilon_adjustments;
    }
    catch (InfeasibleTarget const &e)
    {
      recs[i].error = e.what();
    }
    catch (FirstStageDegenerate const &e)
    {
      recs[i].error = e.what();
    }
    catch (TimeCapNoIncumbent const &e)
    {
      recs[i].error = e.what();
    }
    catch (...)
    {
      std::lock_guard lock(fatal_mutex);
      if (!fatal)
      {
        fatal = std::current_exception();
      }
    }
    ran[i] = true;
  };

  std::size_t const threads = std::max<std::size_t>(1, std::min(config.threads, N));
  if (threads == 1)
  {
    for (std::size_t i = 0; i < N; ++i)
    {
      if (i > 0 && deadline && detail::Clock::now() >= *deadline)
      {
        break;
      }
      run_index(i);
      if (fatal)
      {
        break;
      }
    }
  }
  else
  {
    std::mutex  next_mutex;
    std::size_t next = 0;
    auto        worker = [&]() {
      for (;;)
      {
        std::size_t i = 0;
        {
          std::lock_guard lock(next_mutex);
          if (next >= N || (next > 0 && deadline && detail::Clock::now() >= *deadline))
          {
            return;
          }
          i = next++;
        }
        run_index(i);
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
    {
      pool.emplace_back(worker);
    }
    for (auto &th : pool)
    {
      th.join();
    }
  }
  if (fatal)
  {
    std::rethrow_exception(fatal);
  }

  std::optional<std::size_t> best;
  std::string                first_error;
  for (std::size_t i = 0; i < N; ++i)
  {
    if (!ran[i])
    {
      continue;
    }
    out.runs.push_back(recs[i]);
    if (!sols[i])
    {
      if (first_error.empty())
      {
        first_error = recs[i].error;
      }
      continue;
    }
    if (!best || sols[i]->cost < sols[*best]->cost)
    {
      best = i;
    }
  }
  if (!best)
  {
    throw InfeasibleTarget("all " + std::to_string(out.runs.size()) + " runs failed: " + first_error);
  }
  out.best          = std::move(*sols[*best]);
  out.total_seconds = detail::seconds_since(start);
  return out;
}

}  // namespace fairkm
