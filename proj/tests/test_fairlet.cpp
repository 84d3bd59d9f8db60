#include "fairkm/fairlet.hpp"
#include "fairkm/random.hpp"

#include <gtest/gtest.h>

using namespace fairkm;

TEST(FairletIntegers, TableTargets)
{
  auto const half = get_fairlet_integers(Rational(1, 2));
  EXPECT_EQ(half.p, 1);
  EXPECT_EQ(half.q, 2);
  EXPECT_EQ(half.achieved, Rational(1, 2));
  auto const three = get_fairlet_integers(Rational::parse("0.75"));
  EXPECT_EQ(three.p, 3);
  EXPECT_EQ(three.q, 4);
  auto const nine = get_fairlet_integers(0.90);
  EXPECT_EQ(nine.p, 9);
  EXPECT_EQ(nine.q, 10);
}

TEST(FairletIntegers, UnroundedBankTarget)
{
  auto const r = get_fairlet_integers(Rational(99, 100) * Rational(6395, 13607));
  EXPECT_EQ(r.p, 67);
  EXPECT_EQ(r.q, 144);
}

TEST(FairletIntegers, Endpoints)
{
  EXPECT_EQ(get_fairlet_integers(Rational(0)).p, 0);
  EXPECT_EQ(get_fairlet_integers(Rational(0)).q, 1);
  EXPECT_EQ(get_fairlet_integers(Rational(1)).p, 1);
  EXPECT_EQ(get_fairlet_integers(Rational(1)).q, 1);
  EXPECT_THROW(get_fairlet_integers(Rational(3, 2)), InvalidInput);
  EXPECT_THROW(get_fairlet_integers(-0.1), InvalidInput);
}

TEST(FairletIntegers, BestRatioFromBelow)
{
  auto rng = make_rng(1);
  for (int trial = 0; trial < 200; ++trial)
  {
    Rational const t(static_cast<std::int64_t>(uniform_index(rng, 100000)), 100000);
    auto const     r = get_fairlet_integers(t);
    EXPECT_LE(r.achieved, t);
    EXPECT_GE(r.p, 0);
    EXPECT_LE(r.p, r.q);
    EXPECT_LE(r.q, kFairletMaxDenominator);
    for (std::int64_t q = 1; q <= kFairletMaxDenominator; q += 37)
    {
      EXPECT_LE(Rational(t.floor_times(q), q), r.achieved);
    }
  }
  for (std::int64_t q = 1; q <= 1000; q += 91)
  {
    Rational const t(q / 3, q);
    EXPECT_EQ(get_fairlet_integers(t).achieved, t);
  }
}
