#include "fairkm/kmeans.hpp"
#include "fairkm/metrics.hpp"
#include "fairkm/oracle.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace fairkm;
using fairkm::testing::line_dataset;

namespace {

// 21 objects, three groups of seven, each group a tight cloud around its own
// corner (the separated example used throughout the docs).
Dataset separated_example()
{
  std::vector<double>       xs;
  std::vector<std::int32_t> gs;
  for (int g = 0; g < 3; ++g)
  {
    for (int i = 0; i < 7; ++i)
    {
      xs.push_back(10.0 * g + 0.1 * i);
      gs.push_back(g);
    }
  }
  return line_dataset(xs, gs, 3);
}

}  // namespace

TEST(ClusterBalance, MinimumOrderedRatio)
{
  std::vector<std::int64_t> c1{2, 1};
  std::vector<std::int64_t> c2{3, 0};
  std::vector<std::int64_t> c3{4, 4, 4};
  EXPECT_EQ(cluster_balance(c1), Rational(1, 2));
  EXPECT_EQ(cluster_balance(c2), Rational(0));
  EXPECT_EQ(cluster_balance(c3), Rational(1));
  std::vector<std::int64_t> empty{0, 0};
  EXPECT_THROW(cluster_balance(empty), InvalidInput);
}

TEST(ClusterBalance, BoundsAndPermutationInvariance)
{
  auto rng = make_rng(4);
  for (int trial = 0; trial < 300; ++trial)
  {
    std::vector<std::int64_t> c(2 + uniform_index(rng, 3));
    for (auto &v : c)
    {
      v = static_cast<std::int64_t>(uniform_index(rng, 6));
    }
    if (std::accumulate(c.begin(), c.end(), std::int64_t{0}) == 0)
    {
      c[0] = 1;
    }
    auto const b = cluster_balance(c);
    EXPECT_GE(b, Rational(0));
    EXPECT_LE(b, Rational(1));
    bool const all_equal = std::all_of(c.begin(), c.end(), [&](auto v) { return v == c[0]; });
    EXPECT_EQ(b == Rational(1), all_equal);
    auto shuffled = c;
    std::reverse(shuffled.begin(), shuffled.end());
    EXPECT_EQ(cluster_balance(shuffled), b);
  }
}

TEST(ClusteringBalance, VanillaAndFairSolutionsOfSeparatedExample)
{
  auto const         data = separated_example();
  std::vector<Label> by_group(21);
  std::vector<Label> mixed(21);
  for (std::size_t i = 0; i < 21; ++i)
  {
    by_group[i] = static_cast<Label>(i / 7);
    mixed[i]    = static_cast<Label>((i % 7) < 3 ? 0 : ((i % 7) < 5 ? 1 : 2));
  }
  EXPECT_EQ(clustering_balance(by_group, data, 0, 3), Rational(0));
  EXPECT_EQ(clustering_balance(mixed, data, 0, 3), Rational(1));
}

TEST(ClusteringBalance, SingleClusterEqualsDatasetBalance)
{
  auto rng = make_rng(21);
  for (int trial = 0; trial < 20; ++trial)
  {
    auto const         data = fairkm::testing::random_dataset(rng, 25, 2, {3});
    std::vector<Label> labels(data.n(), 0);
    EXPECT_EQ(clustering_balance(labels, data, 0, 1), dataset_balance(data, 0));
  }
}

TEST(ClusteringBalance, EmptyClusterIsNamed)
{
  auto const data = line_dataset({0, 1, 2}, {0, 1, 0}, 2);
  try
  {
    clustering_balance(std::vector<Label>{0, 0, 0}, data, 0, 2);
    FAIL();
  }
  catch (InvalidInput const &e)
  {
    EXPECT_NE(std::string(e.what()).find("cluster 1"), std::string::npos) << e.what();
  }
}

TEST(DatasetBalance, TableSizes)
{
  auto make = [](std::int64_t a, std::int64_t b) {
    std::vector<std::int32_t> g(static_cast<std::size_t>(a + b), 0);
    std::fill(g.begin() + a, g.end(), 1);
    return line_dataset(std::vector<double>(g.size(), 0.0), g, 2);
  };
  EXPECT_EQ(dataset_balance(separated_example(), 0), Rational(1));
  auto const bank = make(27214, 12790);
  EXPECT_EQ(dataset_balance(bank, 0), Rational(12790, 27214));
  EXPECT_NEAR(dataset_balance(bank, 0).to_double(), 0.46998, 5e-6);
  auto const swat = make(890298, 54584);
  EXPECT_NEAR(dataset_balance(swat, 0).to_double(), 0.0613, 5e-5);
}

TEST(FeasibleBalance, Substitution)
{
  EXPECT_EQ(feasible_balance(separated_example(), 0, 3), Rational(2, 3));
  std::vector<std::int32_t> g(27214 + 12790, 0);
  std::fill(g.begin() + 27214, g.end(), 1);
  auto const bank = line_dataset(std::vector<double>(g.size(), 0.0), g, 2);
  EXPECT_EQ(feasible_balance(bank, 0, 2), Rational(6395, 13607));
  // Smallest group has 7 members; k = 8 floors the numerator to zero.
  EXPECT_EQ(feasible_balance(separated_example(), 0, 8), Rational(0));
}

TEST(FeasibleBalance, NeverAboveDatasetBalance)
{
  auto rng = make_rng(8);
  for (int trial = 0; trial < 100; ++trial)
  {
    auto const data = fairkm::testing::random_dataset(rng, 10 + uniform_index(rng, 60), 1, {2 + uniform_index(rng, 3)});
    for (std::size_t k = 1; k <= 6; ++k)
    {
      EXPECT_LE(feasible_balance(data, 0, k), dataset_balance(data, 0));
    }
  }
}

TEST(ResolveTargets, ToleranceAndExplicit)
{
  auto const data = separated_example();
  EXPECT_TRUE(resolve_targets(FairnessSpec::tolerance(Rational(1)), data, 3).all_zero());
  EXPECT_EQ(resolve_targets(FairnessSpec::tolerance(Rational(0)), data, 3).targets[0], Rational(2, 3));
  EXPECT_EQ(resolve_targets(FairnessSpec::tolerance(Rational(0), FairnessSpec::Reference::DatasetBalance), data, 3)
                .targets[0],
            Rational(1));

  auto const explicit_ok = resolve_targets(FairnessSpec::targets({Rational(1, 2)}), data, 3);
  EXPECT_EQ(explicit_ok.targets[0], Rational(1, 2));
  EXPECT_TRUE(explicit_ok.warnings.empty());
  auto const ambitious = resolve_targets(FairnessSpec::targets({Rational(1)}), data, 3);
  EXPECT_EQ(ambitious.targets[0], Rational(1));
  EXPECT_EQ(ambitious.warnings.size(), 1U);

  EXPECT_THROW(resolve_targets(FairnessSpec::tolerance(Rational(3, 2)), data, 3), InvalidInput);
  EXPECT_THROW(resolve_targets(FairnessSpec::targets({Rational(1), Rational(1)}), data, 3), InvalidInput);
}

TEST(ResolveTargets, BankTargetAtOnePercentTolerance)
{
  std::vector<std::int32_t> g(27214 + 12790, 0);
  std::fill(g.begin() + 27214, g.end(), 1);
  auto const bank   = line_dataset(std::vector<double>(g.size(), 0.0), g, 2);
  auto const target = resolve_targets(FairnessSpec::tolerance(Rational(1, 100)), bank, 2).targets[0];
  EXPECT_EQ(target, Rational(99, 100) * Rational(6395, 13607));
  EXPECT_NEAR(target.to_double(), 0.4653, 5e-5);
}

TEST(ClusteringCost, SmallCases)
{
  Matrix const pts = Matrix::from_rows({{0}, {2}});
  EXPECT_DOUBLE_EQ(clustering_cost(pts, std::vector<Label>{0, 0}, Matrix::from_rows({{1}})), 2.0);
  EXPECT_DOUBLE_EQ(clustering_cost(pts, std::vector<Label>{0, 1}, pts), 0.0);
}

TEST(ClusteringCost, CentroidsBeatPerturbedCenters)
{
  auto rng = make_rng(12);
  for (int trial = 0; trial < 10; ++trial)
  {
    auto const         data = fairkm::testing::random_dataset(rng, 40, 3, {2});
    std::vector<Label> labels(40);
    for (std::size_t i = 0; i < 40; ++i)
    {
      labels[i] = static_cast<Label>(i % 4);
    }
    auto const   centers = update_centers(data.points(), labels, 4);
    double const best    = clustering_cost(data.points(), labels, centers);
    for (int p = 0; p < 100; ++p)
    {
      Matrix moved = centers;
      for (auto &v : moved.data())
      {
        v += 0.05 * standard_normal(rng);
      }
      EXPECT_LE(best, clustering_cost(data.points(), labels, moved) + 1e-12);
    }
  }
}

TEST(ClusteringCost, FairOptimumOfSeparatedFixtureMatchesOracle)
{
  // Twelve objects, two far-apart groups; the best perfectly balanced
  // 2-clustering pairs each object with a partner from the other group.
  std::vector<double>       xs;
  std::vector<std::int32_t> gs;
  for (int i = 0; i < 6; ++i)
  {
    xs.push_back(0.1 * i);
    gs.push_back(0);
    xs.push_back(5.0 + 0.1 * i);
    gs.push_back(1);
  }
  auto const data   = line_dataset(xs, gs, 2);
  auto const oracle = exact_fair_kmeans(data, 2, std::vector<Rational>{Rational(1)});
  auto const centers = update_centers(data.points(), oracle.best_labels, 2);
  EXPECT_NEAR(clustering_cost(data.points(), oracle.best_labels, centers), oracle.best_cost, 1e-12);
  EXPECT_EQ(clustering_balance(oracle.best_labels, data, 0, 2), Rational(1));
}

TEST(SatisfiesTargets, AgreesWithClusteringBalance)
{
  auto rng = make_rng(33);
  for (int trial = 0; trial < 200; ++trial)
  {
    auto const         data = fairkm::testing::random_dataset(rng, 12, 1, {2});
    std::vector<Label> labels(12);
    for (std::size_t i = 0; i < 12; ++i)
    {
      labels[i] = static_cast<Label>(i < 2 ? i : uniform_index(rng, 2));
    }
    auto const t = fairkm::testing::random_target(rng);
    EXPECT_EQ(satisfies_targets(labels, data, 2, std::vector<Rational>{t}),
              clustering_balance(labels, data, 0, 2) >= t);
  }
}
