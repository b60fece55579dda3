#include "mf/dyadic.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mf;

namespace {

Dyadic random_dyadic(std::mt19937_64& rng)
{
    std::uniform_int_distribution<long long> num(-(1LL << 40), 1LL << 40);
    std::uniform_int_distribution<unsigned> exp(0, 70);
    return Dyadic::make(Int(num(rng)), exp(rng));
}

}  // namespace

TEST(Dyadic, CanonicalForm)
{
    Dyadic a = Dyadic::make(12, 4);
    EXPECT_EQ(a.num(), 3);
    EXPECT_EQ(a.exp(), 2u);
    EXPECT_EQ(Dyadic::make(0, 9).exp(), 0u);
    EXPECT_EQ(Dyadic::make(-8, 2), Dyadic(-2));
}

TEST(Dyadic, Pow2BothSigns)
{
    EXPECT_EQ(Dyadic::pow2(5), Dyadic(32));
    EXPECT_EQ(Dyadic::pow2(-3).to_rational(), Rational(1, 8));
    EXPECT_EQ(Dyadic::pow2(0), Dyadic(1));
}

TEST(Dyadic, ArithmeticMatchesRational)
{
    std::mt19937_64 rng(7);
    for (int t = 0; t < 2000; ++t) {
        Dyadic a = random_dyadic(rng), b = random_dyadic(rng);
        Rational ra = a, rb = b;
        EXPECT_EQ((a + b).to_rational(), ra + rb);
        EXPECT_EQ((a - b).to_rational(), ra - rb);
        EXPECT_EQ((a * b).to_rational(), ra * rb);
        EXPECT_EQ(a < b, ra < rb);
        EXPECT_EQ(a == b, ra == rb);
        EXPECT_EQ(cmp(a, rb), ra < rb ? -1 : (ra > rb ? 1 : 0));
    }
}

TEST(Dyadic, FloorScaledMatchesRationalFloor)
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 2000; ++t) {
        Dyadic a = random_dyadic(rng);
        unsigned j = unsigned(rng() % 80);
        EXPECT_EQ(a.floor_scaled(j), rfloor(a.to_rational() * Rational(pow2i(j))));
    }
}

TEST(Dyadic, ShiftedIsMultiplicationByPowerOfTwo)
{
    std::mt19937_64 rng(3);
    for (int t = 0; t < 500; ++t) {
        Dyadic a = random_dyadic(rng);
        long long s = (long long)(rng() % 60) - 30;
        EXPECT_EQ(a.shifted(s), a * Dyadic::pow2(s));
    }
}

TEST(Dyadic, ParseAndPrintRoundTrip)
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 300; ++t) {
        Dyadic a = random_dyadic(rng);
        EXPECT_EQ(Dyadic::parse(a.str()), a);
    }
    EXPECT_EQ(Dyadic::parse("3/8"), Dyadic::make(3, 3));
    EXPECT_EQ(Dyadic::parse("-7"), Dyadic(-7));
    EXPECT_THROW(Dyadic::parse("1/3"), std::invalid_argument);
}

TEST(Dyadic, ToDoubleLargeExponent)
{
    Dyadic a = Dyadic::make(Int(3) << 200, 300);
    EXPECT_DOUBLE_EQ(a.to_double(), 3.0 * std::ldexp(1.0, -100));
    EXPECT_DOUBLE_EQ(log2d(Dyadic::pow2(-77)), -77.0);
}

TEST(Rationals, ParseAndPretty)
{
    EXPECT_EQ(parse_rational("3/10"), Rational(3, 10));
    EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
    EXPECT_EQ(parse_rational("-2"), Rational(-2));
    EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
    EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
    EXPECT_EQ(rpretty(Rational(3, 10)), "0.3");
    EXPECT_EQ(rpretty(Rational(1, 3)), "1/3");
    EXPECT_EQ(rstr(Rational(4, 2)), "2");
}

TEST(Rationals, FloorCeilNegative)
{
    EXPECT_EQ(rfloor(Rational(-7, 2)), -4);
    EXPECT_EQ(rceil(Rational(-7, 2)), -3);
    EXPECT_EQ(rfloor(Rational(7, 2)), 3);
    EXPECT_EQ(rceil(Rational(6, 2)), 3);
}

TEST(Rationals, Log2OfHugeValues)
{
    Rational r(Int(1), pow2i(3000));
    EXPECT_NEAR(log2r(r), -3000.0, 1e-9);
    EXPECT_NEAR(log2r(Rational(pow2i(1000) * 3)), 1000.0 + std::log2(3.0), 1e-9);
}

TEST(Intervals, DyadicIntervalBounds)
{
    auto I = interval(3, 5);
    EXPECT_EQ(I.left(), Dyadic::make(5, 3));
    EXPECT_EQ(I.right(), Dyadic::make(6, 3));
    EXPECT_EQ(I.length(), Dyadic::pow2(-3));
    EXPECT_THROW(interval(3, 8), std::out_of_range);
    EXPECT_THROW(interval(3, -1), std::out_of_range);
}

TEST(Intervals, StretchedSharesRightEndpoint)
{
    auto s = stretched_interval(4, 6, Rational(2, 3));
    EXPECT_EQ(s.m, 6u);
    EXPECT_EQ(s.right(), Dyadic::make(7, 4));
    EXPECT_EQ(s.left(), Dyadic::make(7, 4) - Dyadic::pow2(-6));
    EXPECT_EQ(s.length(), Dyadic::pow2(-6));
}

TEST(Intervals, StretchGenerationRejectsNonInteger)
{
    EXPECT_EQ(stretch_generation(20, Rational(2, 5)), 50u);
    EXPECT_THROW(stretch_generation(20, Rational(3, 7)), std::invalid_argument);
    EXPECT_THROW(stretch_generation(20, Rational(0)), std::invalid_argument);
    EXPECT_THROW(stretch_generation(20, Rational(3, 2)), std::invalid_argument);
}
