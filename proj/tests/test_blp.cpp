#include "fairkm/blp.hpp"
#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace fairkm;
using fairkm::testing::line_dataset;
using fairkm::testing::random_dataset;

namespace {

AssignmentProblem object_problem(Dataset const &data, Matrix const &centers, std::vector<Rational> targets)
{
  return AssignmentProblem::for_objects(data, distance_matrix(data.points(), centers), centers.rows(),
                                        std::move(targets));
}

}  // namespace

TEST(SolveAssignment, AlternatingPairsSplitEvenly)
{
  auto const data    = line_dataset({0, 1, 10, 11}, {0, 1, 0, 1}, 2);
  Matrix     centers = Matrix::from_rows({{0.5}, {10.5}});
  auto const sol     = solve_assignment(object_problem(data, centers, {Rational(1)}));
  EXPECT_TRUE(sol.optimal);
  EXPECT_DOUBLE_EQ(sol.objective, 1.0);
  EXPECT_EQ(sol.row_to_cluster, (std::vector<Label>{0, 0, 1, 1}));
}

TEST(SolveAssignment, UnequalGroupsCannotBePerfectlyBalanced)
{
  auto const data    = line_dataset({0, 1, 2, 3}, {0, 1, 1, 1}, 2);
  Matrix     centers = Matrix::from_rows({{0.0}, {3.0}});
  EXPECT_THROW(solve_assignment(object_problem(data, centers, {Rational(1)})), InfeasibleTarget);
}

TEST(SolveAssignment, ZeroTargetsGiveNearestAssignment)
{
  auto const data    = line_dataset({0, 1, 5, 6, 7}, {0, 1, 0, 1, 0}, 2);
  Matrix     centers = Matrix::from_rows({{0.0}, {6.0}});
  auto const p       = object_problem(data, centers, {Rational(0)});
  auto const sol     = solve_assignment(p);
  EXPECT_EQ(sol.row_to_cluster, (std::vector<Label>{0, 0, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(sol.objective, 0 + 1 + 1 + 0 + 1);
}

TEST(SolveAssignment, ZeroTargetsStillFillEveryCluster)
{
  auto const data    = line_dataset({0, 1, 2}, {0, 1, 0}, 2);
  Matrix     centers = Matrix::from_rows({{0.0}, {100.0}});
  auto const sol     = solve_assignment(object_problem(data, centers, {Rational(0)}));
  // Object 2 is the cheapest to move: (98^2 - 2^2) beats (99^2 - 1^2).
  EXPECT_EQ(sol.row_to_cluster, (std::vector<Label>{0, 0, 1}));
}

TEST(SolveAssignment, MoreClustersThanRowsIsInfeasible)
{
  auto const data    = line_dataset({0, 1}, {0, 1}, 2);
  Matrix     centers = Matrix::from_rows({{0.0}, {1.0}, {2.0}});
  EXPECT_THROW(solve_assignment(object_problem(data, centers, {Rational(0)})), InfeasibleTarget);
}

TEST(LowerBound, EndpointsMatchDefinition)
{
  auto const data    = line_dataset({0, 1, 10, 11}, {0, 1, 0, 1}, 2);
  Matrix     centers = Matrix::from_rows({{0.5}, {10.5}});
  auto const p       = object_problem(data, centers, {Rational(1)});
  EXPECT_DOUBLE_EQ(lower_bound(p, std::vector<Label>(4, -1)), 1.0);
  std::vector<Label> full{1, 0, 0, 1};
  EXPECT_DOUBLE_EQ(lower_bound(p, full), assignment_objective(p, full));
}

TEST(LowerBound, NeverExceedsOracleOptimum)
{
  auto rng = make_rng(11);
  for (int trial = 0; trial < 200; ++trial)
  {
    auto const data    = random_dataset(rng, 8, 2, {2});
    Matrix     centers = kmeanspp_init(data.points(), 2, rng);
    auto const p       = object_problem(data, centers, {fairkm::testing::random_target(rng)});
    OracleAssignment best;
    try
    {
      best = exact_fair_assignment(p);
    }
    catch (InfeasibleTarget const &)
    {
      continue;
    }
    std::vector<Label> partial(8, -1);
    for (std::size_t i = 0; i < 8; ++i)
    {
      if (uniform01(rng) < 0.4)
      {
        partial[i] = best.labels[i];
      }
    }
    EXPECT_LE(lower_bound(p, std::vector<Label>(8, -1)), best.objective + 1e-12);
    EXPECT_LE(lower_bound(p, partial), best.objective + 1e-12);
  }
}

TEST(SolveAssignment, MatchesEnumerationOnObjects)
{
  auto rng = make_rng(2024);
  int  checked = 0;
  for (int trial = 0; trial < 300; ++trial)
  {
    std::size_t const n = 3 + uniform_index(rng, 10);
    std::size_t const k = 1 + uniform_index(rng, std::min<std::size_t>(3, n));
    std::vector<std::size_t> groups{2 + uniform_index(rng, 2)};
    std::vector<Rational>    targets{fairkm::testing::random_target(rng)};
    if (trial % 3 == 0)
    {
      groups.push_back(2);
      targets.push_back(fairkm::testing::random_target(rng));
    }
    if (n < groups[0])
    {
      continue;
    }
    auto const data    = random_dataset(rng, n, 2, groups);
    Matrix     centers = kmeanspp_init(data.points(), k, rng);
    auto const p       = object_problem(data, centers, targets);
    bool       oracle_feasible = true;
    OracleAssignment expect;
    try
    {
      expect = exact_fair_assignment(p);
    }
    catch (InfeasibleTarget const &)
    {
      oracle_feasible = false;
    }
    if (!oracle_feasible)
    {
      EXPECT_THROW(solve_assignment(p), InfeasibleTarget) << "trial " << trial;
      continue;
    }
    auto const sol = solve_assignment(p);
    EXPECT_TRUE(sol.optimal);
    EXPECT_TRUE(assignment_feasible(p, sol.row_to_cluster));
    EXPECT_EQ(sol.objective, expect.objective) << "trial " << trial;
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(SolveAssignment, MatchesEnumerationOnWeightedRows)
{
  auto rng = make_rng(77);
  for (int trial = 0; trial < 200; ++trial)
  {
    std::size_t const rows = 3 + uniform_index(rng, 8);
    std::size_t const k    = 1 + uniform_index(rng, 3);
    std::vector<std::size_t> groups{2 + uniform_index(rng, 2)};
    auto const p = fairkm::testing::random_weighted_problem(rng, rows, k, groups,
                                                            {fairkm::testing::random_target(rng)});
    bool             feasible = true;
    OracleAssignment expect;
    try
    {
      expect = exact_fair_assignment(p);
    }
    catch (InfeasibleTarget const &)
    {
      feasible = false;
    }
    if (!feasible)
    {
      EXPECT_THROW(solve_assignment(p), InfeasibleTarget);
      continue;
    }
    auto const sol = solve_assignment(p);
    EXPECT_EQ(sol.objective, expect.objective) << "trial " << trial;
  }
}

TEST(SolveAssignment, OptimumGrowsWithTarget)
{
  auto rng = make_rng(5);
  for (int trial = 0; trial < 40; ++trial)
  {
    auto const data    = random_dataset(rng, 10, 2, {2});
    Matrix     centers = kmeanspp_init(data.points(), 2, rng);
    double     prev    = -1.0;
    for (auto t : {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)})
    {
      double obj = 0.0;
      try
      {
        obj = solve_assignment(object_problem(data, centers, {t})).objective;
      }
      catch (InfeasibleTarget const &)
      {
        break;
      }
      EXPECT_GE(obj, prev);
      prev = obj;
    }
  }
}

TEST(SolveAssignment, NodeLimitReturnsFlaggedIncumbent)
{
  auto rng     = make_rng(8);
  auto data    = random_dataset(rng, 400, 2, {2});
  Matrix centers = kmeanspp_init(data.points(), 6, rng);
  auto const p = object_problem(data, centers, {feasible_balance(data, 0, 6) * Rational(9, 10)});
  AssignmentOptions opt;
  opt.node_limit = 50;
  auto const sol = solve_assignment(p, opt);
  EXPECT_TRUE(assignment_feasible(p, sol.row_to_cluster));
  EXPECT_LE(sol.nodes_explored, 50U);
}
