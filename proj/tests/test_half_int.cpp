#include "brakeidx/half_int.hpp"

#include <gtest/gtest.h>

using brakeidx::HalfInt;
using brakeidx::halves;

TEST(HalfInt, ArithmeticStaysExact) {
    EXPECT_EQ(halves(1) + halves(1), HalfInt::from_int(1));
    EXPECT_EQ(halves(3) - halves(5), HalfInt::from_int(-1));
    EXPECT_EQ(-halves(3), halves(-3));
    EXPECT_EQ(3 * halves(1), halves(3));
    EXPECT_LT(halves(-1), HalfInt::from_int(0));
}

TEST(HalfInt, IntegralityAndParity) {
    EXPECT_TRUE(HalfInt::from_int(4).is_integer());
    EXPECT_FALSE(halves(5).is_integer());
    EXPECT_EQ(HalfInt::from_int(-3).parity(), 1);
    EXPECT_EQ(HalfInt::from_int(6).parity(), 0);
    EXPECT_THROW(halves(1).to_int(), std::domain_error);
    EXPECT_THROW(halves(1).parity(), std::domain_error);
}

TEST(HalfInt, RoundingRejectsNonHalfIntegers) {
    EXPECT_EQ(HalfInt::round(1.5000000001), halves(3));
    EXPECT_EQ(HalfInt::round(-0.5), halves(-1));
    EXPECT_THROW(HalfInt::round(0.3), std::domain_error);
}

TEST(HalfInt, Formatting) {
    EXPECT_EQ(halves(3).str(), "3/2");
    EXPECT_EQ(halves(-1).str(), "-1/2");
    EXPECT_EQ(HalfInt::from_int(-2).str(), "-2");
}
