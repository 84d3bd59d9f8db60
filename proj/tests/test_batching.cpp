#include "fairkm/batching.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace fairkm;

TEST(Batches, OnePerObjectIsIdentity)
{
  auto       rng  = make_rng(1);
  auto const data = fairkm::testing::random_dataset(rng, 30, 2, {3});
  auto const b    = build_batches(data, 30, rng);
  EXPECT_EQ(b.representatives, data.points());
  EXPECT_EQ(b.sizes, std::vector<std::int64_t>(30, 1));
  EXPECT_EQ(b.scatter, 0.0);
  for (std::size_t i = 0; i < 30; ++i)
  {
    for (std::size_t g = 0; g < 3; ++g)
    {
      EXPECT_EQ(b.weights[0][i * 3 + g], data.feature(0).membership[i] == static_cast<std::int32_t>(g) ? 1 : 0);
    }
  }
}

TEST(Batches, WeightsCountMembers)
{
  auto const data = fairkm::testing::line_dataset({0, 1, 2, 3, 4}, {0, 1, 1, 0, 1}, 2);
  auto const b    = assemble_batches(data, {0, 0, 1, 1, 1}, 2);
  EXPECT_EQ(b.sizes, (std::vector<std::int64_t>{2, 3}));
  EXPECT_EQ(b.weights[0], (std::vector<std::int64_t>{1, 1, 1, 2}));
  EXPECT_DOUBLE_EQ(b.representatives(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(b.representatives(1, 0), 3.0);
  EXPECT_DOUBLE_EQ(b.scatter, 0.25 + 0.25 + 1 + 0 + 1);
  EXPECT_THROW(assemble_batches(data, {0, 0, 0, 0, 0}, 2), InvalidInput);
  EXPECT_THROW(assemble_batches(data, {0, 0, 2, 0, 0}, 2), InvalidInput);
}

TEST(Batches, PartitionInvariants)
{
  auto rng = make_rng(2);
  for (int trial = 0; trial < 10; ++trial)
  {
    auto const        data = fairkm::testing::random_dataset(rng, 300, 3, {2, 3});
    std::size_t const r    = 2 + uniform_index(rng, 40);
    auto const        b    = build_batches(data, r, rng);
    EXPECT_EQ(b.r(), r);
    EXPECT_EQ(std::accumulate(b.sizes.begin(), b.sizes.end(), std::int64_t{0}), 300);
    for (std::size_t s = 0; s < 2; ++s)
    {
      auto const G      = b.group_sizes[s];
      auto const totals = group_counts(data, s);
      for (std::size_t g = 0; g < G; ++g)
      {
        std::int64_t sum = 0;
        for (std::size_t j = 0; j < r; ++j)
        {
          sum += b.weights[s][j * G + g];
        }
        EXPECT_EQ(sum, totals[g]);
      }
      for (std::size_t j = 0; j < r; ++j)
      {
        std::int64_t row = 0;
        for (std::size_t g = 0; g < G; ++g)
        {
          row += b.weights[s][j * G + g];
        }
        EXPECT_EQ(row, b.sizes[j]);
      }
    }
  }
}

TEST(Batches, SubsampledFitStillCoversEveryBatch)
{
  auto         rng  = make_rng(3);
  auto const   data = fairkm::testing::random_dataset(rng, 2000, 2, {2});
  BatchOptions opt;
  opt.subsample_threshold = 1000;
  opt.subsample_size      = 300;
  auto const b            = build_batches(data, 50, rng, opt);
  for (auto s : b.sizes)
  {
    EXPECT_GE(s, 1);
  }
}

TEST(Batches, DeterministicForSeed)
{
  auto       gen  = make_rng(4);
  auto const data = fairkm::testing::random_dataset(gen, 500, 2, {2});
  auto       a    = make_rng(9, 1);
  auto       b    = make_rng(9, 1);
  EXPECT_EQ(build_batches(data, 20, a).membership, build_batches(data, 20, b).membership);
}

TEST(WeightedUpdate, Example)
{
  Matrix                    reps = Matrix::from_rows({{0.0}, {3.0}});
  std::vector<std::int64_t> sizes{2, 1};
  std::vector<Label>        labels{0, 0};
  EXPECT_DOUBLE_EQ(weighted_update(reps, sizes, labels, 1)(0, 0), 1.0);
  EXPECT_THROW(weighted_update(reps, sizes, labels, 2), InvalidInput);
}

TEST(WeightedUpdate, EqualsObjectCentroidsOfMappedLabels)
{
  auto rng = make_rng(5);
  for (int trial = 0; trial < 20; ++trial)
  {
    auto const         data = fairkm::testing::random_dataset(rng, 200, 3, {2});
    auto const         b    = build_batches(data, 12, rng);
    std::vector<Label> rep(12);
    for (std::size_t j = 0; j < 12; ++j)
    {
      rep[j] = static_cast<Label>(j % 3);
    }
    auto const labels = map_back(b, rep);
    auto const w      = weighted_update(b.representatives, b.sizes, rep, 3);
    auto const u      = update_centers(data.points(), labels, 3);
    for (std::size_t i = 0; i < w.data().size(); ++i)
    {
      EXPECT_NEAR(w.data()[i], u.data()[i], 1e-12);
    }
    EXPECT_NEAR(weighted_cost(b, rep, w) + b.scatter, clustering_cost(data.points(), labels, w), 1e-9);
  }
}

TEST(MapBack, BalanceMatchesWeightedCounts)
{
  auto rng = make_rng(6);
  for (int trial = 0; trial < 50; ++trial)
  {
    auto const         data = fairkm::testing::random_dataset(rng, 120, 2, {3});
    auto const         b    = build_batches(data, 10, rng);
    std::vector<Label> rep(10);
    for (std::size_t j = 0; j < 10; ++j)
    {
      rep[j] = static_cast<Label>(j < 2 ? j : uniform_index(rng, 2));
    }
    auto const labels = map_back(b, rep);
    auto const t      = fairkm::testing::random_target(rng);
    auto const p      = batch_problem(b, Matrix(2, 2), {t});
    EXPECT_EQ(assignment_feasible(p, rep), clustering_balance(labels, data, 0, 2) >= t) << "trial " << trial;
  }
  EXPECT_THROW(map_back(build_batches(fairkm::testing::random_dataset(rng, 10, 1, {2}), 3, rng),
                        std::vector<Label>{0, 1}),
               InvalidInput);
}

TEST(BatchProblem, OneBatchPerObjectMatchesObjectProblem)
{
  auto rng = make_rng(7);
  for (int trial = 0; trial < 30; ++trial)
  {
    auto const        data = fairkm::testing::random_dataset(rng, 10, 2, {2});
    std::size_t const k    = 2 + uniform_index(rng, 2);
    auto const        b    = build_batches(data, 10, rng);
    Matrix const      c    = kmeanspp_init(data.points(), k, rng);
    std::vector<Rational> t{fairkm::testing::random_target(rng)};
    auto const objects = AssignmentProblem::for_objects(data, distance_matrix(data.points(), c), k, t);
    if (t[0] > dataset_balance(data, 0))
    {
      EXPECT_THROW(exact_fair_assignment(batch_problem(b, c, t)), InfeasibleTarget);
      EXPECT_THROW(solve_assignment(batch_problem(b, c, t)), InfeasibleTarget);
      continue;
    }
    auto const object = exact_fair_assignment(objects);
    auto const batch  = exact_fair_assignment(batch_problem(b, c, t));
    EXPECT_EQ(object.objective, batch.objective);
    EXPECT_EQ(solve_assignment(batch_problem(b, c, t)).objective, object.objective);
  }
}
