#include "fairkm/kmeans.hpp"
#include "fairkm/transport.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace fairkm;

namespace {

// Exhaustive bounded transport over k^m assignments.
std::optional<std::int64_t> brute_transport(std::size_t m, std::size_t k, std::vector<std::int64_t> const &cost,
                                            std::vector<std::int64_t> const &lo, std::vector<std::int64_t> const &hi)
{
  std::optional<std::int64_t> best;
  std::uint64_t               total = 1;
  for (std::size_t i = 0; i < m; ++i)
  {
    total *= k;
  }
  for (std::uint64_t code = 0; code < total; ++code)
  {
    std::vector<std::int64_t> cnt(k, 0);
    std::int64_t              c = 0;
    auto                      x = code;
    for (std::size_t i = 0; i < m; ++i)
    {
      auto const j = x % k;
      x /= k;
      ++cnt[j];
      c += cost[i * k + j];
    }
    bool ok = true;
    for (std::size_t j = 0; j < k; ++j)
    {
      ok = ok && cnt[j] >= lo[j] && cnt[j] <= hi[j];
    }
    if (ok && (!best || c < *best))
    {
      best = c;
    }
  }
  return best;
}

}  // namespace

TEST(KmeansPP, ChoosesDistinctObjects)
{
  auto   rng = make_rng(1);
  Matrix pts = Matrix::from_rows({{0, 0}, {1, 0}, {0, 1}, {5, 5}});
  auto   idx = kmeanspp_indices(pts, 4, rng);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 4U);
  auto one = Matrix::from_rows({{3, 4}});
  EXPECT_EQ(kmeanspp_init(one, 1, rng), one);
  EXPECT_THROW(kmeanspp_init(one, 2, rng), InvalidInput);
}

TEST(KmeansPP, SameSeedSameCenters)
{
  auto gen  = make_rng(2);
  auto data = fairkm::testing::random_dataset(gen, 200, 3, {2});
  auto a    = make_rng(77);
  auto b    = make_rng(77);
  EXPECT_EQ(kmeanspp_init(data.points(), 5, a), kmeanspp_init(data.points(), 5, b));
}

TEST(KmeansPP, DuplicatePointsStillGiveDistinctIndices)
{
  auto   rng = make_rng(5);
  Matrix pts(6, 1, 2.0);
  auto   idx = kmeanspp_indices(pts, 6, rng);
  EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), 6U);
}

TEST(UpdateCenters, Means)
{
  Matrix pts = Matrix::from_rows({{0, 0}, {2, 2}, {7, 1}});
  auto   c   = update_centers(pts, std::vector<Label>{0, 0, 1}, 2);
  EXPECT_EQ(c, Matrix::from_rows({{1, 1}, {7, 1}}));
  EXPECT_THROW(update_centers(pts, std::vector<Label>{0, 0, 0}, 2), InvalidInput);
}

TEST(Improvement, Formula)
{
  EXPECT_NEAR(improvement(100, 90), 0.10, 1e-15);
  EXPECT_EQ(improvement(90, 90), 0.0);
  EXPECT_NEAR(improvement(90, 100), -1.0 / 9.0, 1e-15);
  EXPECT_EQ(improvement(0, 0), 0.0);
}

TEST(Transport, MatchesEnumeration)
{
  auto rng = make_rng(44);
  for (int trial = 0; trial < 400; ++trial)
  {
    std::size_t const         m = 1 + uniform_index(rng, 8);
    std::size_t const         k = 1 + uniform_index(rng, 3);
    std::vector<std::int64_t> cost(m * k);
    for (auto &c : cost)
    {
      c = static_cast<std::int64_t>(uniform_index(rng, 20));
    }
    std::vector<std::int64_t> lo(k);
    std::vector<std::int64_t> hi(k);
    for (std::size_t j = 0; j < k; ++j)
    {
      lo[j] = static_cast<std::int64_t>(uniform_index(rng, 3));
      hi[j] = lo[j] + static_cast<std::int64_t>(uniform_index(rng, m + 1));
    }
    auto const expect = brute_transport(m, k, cost, lo, hi);
    auto const got    = solve_transport<std::int64_t>(m, k, cost, lo, hi);
    ASSERT_EQ(expect.has_value(), got.has_value()) << "trial " << trial;
    if (got)
    {
      EXPECT_EQ(got->cost, *expect) << "trial " << trial;
      std::vector<std::int64_t> cnt(k, 0);
      for (auto j : got->assignment)
      {
        ++cnt[static_cast<std::size_t>(j)];
      }
      EXPECT_EQ(cnt, got->counts);
    }
  }
}

TEST(CheapestNonempty, RepairsEmptyClusters)
{
  // Both rows prefer column 0; the cheaper move to column 1 is row 1.
  std::vector<double> cost{0.0, 10.0, 1.0, 2.0};
  EXPECT_EQ(cheapest_nonempty_assignment(cost, 2, 2), (std::vector<Label>{0, 1}));
  EXPECT_THROW(cheapest_nonempty_assignment(cost, 1, 2), InvalidInput);
}

TEST(NearestCenter, TiesGoToLowestIndex)
{
  Matrix centers = Matrix::from_rows({{-1}, {1}});
  std::vector<double> x{0.0};
  EXPECT_EQ(nearest_center(x, centers).first, 0U);
}
