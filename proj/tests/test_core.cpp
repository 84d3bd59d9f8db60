#include "fairkm/core.hpp"
#include "fairkm/rational.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

using namespace fairkm;

TEST(Rational, NormalizesAndCompares)
{
  EXPECT_EQ(Rational(2, 4), Rational(1, 2));
  EXPECT_EQ(Rational(3, -6), Rational(-1, 2));
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_EQ((Rational(1, 2) + Rational(1, 3)).str(), "5/6");
  EXPECT_EQ((Rational(99, 100) * Rational(6395, 13607)).str(), "11511/24740");
  EXPECT_EQ(Rational(4, 2).str(), "2");
  EXPECT_THROW(Rational(1, 0), InvalidInput);
}

TEST(Rational, ParsesDecimalsExactly)
{
  EXPECT_EQ(Rational::parse("0.75"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("3/4"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("75e-2"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("1"), Rational(1));
  EXPECT_EQ(Rational::from_double(0.01), Rational(1, 100));
  EXPECT_THROW(Rational::parse("abc"), InvalidInput);
}

TEST(Rational, FloorAndCeilTimes)
{
  Rational const half(1, 2);
  EXPECT_EQ(half.floor_times(5), 2);
  EXPECT_EQ(half.ceil_times(5), 3);
  EXPECT_EQ(half.ceil_times(4), 2);
  EXPECT_TRUE(half.satisfied_by(1, 2));
  EXPECT_FALSE(half.satisfied_by(1, 3));
}

TEST(ScaleMinmax, AffineEndpoints)
{
  auto const out = scale_minmax(Matrix::from_rows({{2}, {4}, {6}}));
  EXPECT_DOUBLE_EQ(out(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(out(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(out(2, 0), 1.0);
}

TEST(ScaleMinmax, ConstantColumnBecomesZero)
{
  auto const out = scale_minmax(Matrix::from_rows({{5}, {5}, {5}}));
  for (std::size_t i = 0; i < 3; ++i)
  {
    EXPECT_EQ(out(i, 0), 0.0);
  }
}

TEST(ScaleMinmax, ColumnsAreIndependent)
{
  auto const out = scale_minmax(Matrix::from_rows({{0, 10}, {1, 20}}));
  EXPECT_EQ(out, Matrix::from_rows({{0, 0}, {1, 1}}));
}

TEST(ScaleMinmax, RejectsNonFiniteWithLocation)
{
  auto m = Matrix::from_rows({{0, 1}, {2, std::numeric_limits<double>::quiet_NaN()}});
  try
  {
    scale_minmax(m);
    FAIL() << "expected an error";
  }
  catch (InvalidInput const &e)
  {
    std::string const msg = e.what();
    EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("column 1"), std::string::npos) << msg;
  }
}

TEST(ScaleMinmax, IdempotentOnScaledData)
{
  auto rng = make_rng(3);
  Matrix m(50, 4);
  for (auto &v : m.data())
  {
    v = standard_normal(rng) * 7.0 + 3.0;
  }
  auto const once  = scale_minmax(m);
  auto const twice = scale_minmax(once);
  for (std::size_t i = 0; i < once.data().size(); ++i)
  {
    EXPECT_NEAR(once.data()[i], twice.data()[i], 1e-12);
    EXPECT_GE(once.data()[i], 0.0);
    EXPECT_LE(once.data()[i], 1.0);
  }
}

TEST(Dataset, GroupCountsOfEqualGroups)
{
  std::vector<std::int32_t> groups;
  std::vector<double>       xs;
  for (int i = 0; i < 21; ++i)
  {
    groups.push_back(i % 3);
    xs.push_back(i);
  }
  auto const data = fairkm::testing::line_dataset(xs, groups, 3);
  EXPECT_EQ(group_counts(data, 0), (std::vector<std::int64_t>{7, 7, 7}));
}

TEST(Dataset, LargeGroupCounts)
{
  std::vector<std::int32_t> groups(27214 + 12790, 0);
  std::fill(groups.begin() + 27214, groups.end(), 1);
  std::vector<double> xs(groups.size(), 0.0);
  auto const          data = fairkm::testing::line_dataset(xs, groups, 2);
  EXPECT_EQ(group_counts(data, 0), (std::vector<std::int64_t>{27214, 12790}));
}

TEST(Dataset, RejectsSingleGroupAndEmptyGroups)
{
  EXPECT_THROW(fairkm::testing::line_dataset({0, 1, 2, 3}, {0, 0, 0, 0}, 1), InvalidInput);
  EXPECT_THROW(fairkm::testing::line_dataset({0, 1, 2}, {0, 0, 0}, 2), InvalidInput);
  EXPECT_THROW(fairkm::testing::line_dataset({0, 1, 2}, {0, 1, 5}, 2), InvalidInput);
}

TEST(Dataset, GroupCountsSumToN)
{
  auto rng = make_rng(9);
  for (int trial = 0; trial < 20; ++trial)
  {
    auto const data = fairkm::testing::random_dataset(rng, 30 + trial, 2, {2, 3});
    for (std::size_t s = 0; s < 2; ++s)
    {
      auto const c = group_counts(data, s);
      EXPECT_EQ(std::accumulate(c.begin(), c.end(), std::int64_t{0}), static_cast<std::int64_t>(data.n()));
      for (auto v : c)
      {
        EXPECT_GE(v, 1);
      }
    }
  }
}
