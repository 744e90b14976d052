#include <limits>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oscillode/rational.hpp"

namespace oscillode {
namespace {

TEST(Rational, StoredInLowestTermsWithPositiveDenominator) {
  const Rational q(6, -8);
  EXPECT_EQ(q.numerator(), -3);
  EXPECT_EQ(q.denominator(), 4);
  EXPECT_EQ(Rational(0, -5), Rational(0));
  EXPECT_EQ(Rational(0, -5).denominator(), 1);
}

TEST(Rational, ZeroDenominatorThrows) { EXPECT_THROW(Rational(1, 0), std::domain_error); }

TEST(Rational, FieldOperations) {
  const Rational a(1, 2);
  const Rational b(-2, 3);
  EXPECT_EQ(a + b, Rational(-1, 6));
  EXPECT_EQ(a - b, Rational(7, 6));
  EXPECT_EQ(a * b, Rational(-1, 3));
  EXPECT_EQ(a / b, Rational(-3, 4));
  EXPECT_EQ(-a, Rational(-1, 2));
  EXPECT_THROW(a / Rational(0), std::domain_error);
}

TEST(Rational, OrderingAgreesWithValue) {
  EXPECT_LT(Rational(1, 3), Rational(1, 2));
  EXPECT_GT(Rational(-1, 3), Rational(-1, 2));
  EXPECT_EQ(Rational(2, 4) <=> Rational(1, 2), std::strong_ordering::equal);
}

TEST(Rational, FormatAndParseRoundTrip) {
  for (const Rational q : {Rational(3), Rational(-7), Rational(1, 2), Rational(-3, 4)}) {
    EXPECT_EQ(Rational::parse(q.to_string()), q);
  }
  EXPECT_EQ(Rational(-1, 2).to_string(), "-1/2");
  EXPECT_EQ(Rational(5).to_string(), "5");
  EXPECT_THROW(Rational::parse("1/"), std::invalid_argument);
  EXPECT_THROW(Rational::parse("x"), std::invalid_argument);
}

TEST(Rational, WideIntermediatesReduceBackToSixtyFourBits) {
  const std::int64_t big = std::numeric_limits<std::int64_t>::max() / 3;
  EXPECT_EQ(Rational(big) * Rational(3, big), Rational(3));
}

TEST(Rational, OverflowThrowsInsteadOfWrapping) {
  const Rational huge(std::numeric_limits<std::int64_t>::max() / 2);
  EXPECT_THROW(huge * huge, std::overflow_error);
}

}  // namespace
}  // namespace oscillode
