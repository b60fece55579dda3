#include "mf/affine.hpp"
#include "mf/locator.hpp"
#include "mf/measure_ops.hpp"

#include <gtest/gtest.h>

using namespace mf;

namespace {

// slope 2^6 on [1/2 - 2^-10, 1/2 + 2^-10], slope 1/16 elsewhere
PiecewiseAffine spike()
{
    PiecewiseAffine f;
    Dyadic e = Dyadic::pow2(-10), c = Dyadic::make(1, 1);
    f.x = {Dyadic(0), c - e, c + e, Dyadic(1)};
    Rational y1 = (c - e).to_rational() / 16;
    Rational y2 = y1 + 128 * e.to_rational();
    f.y = {Rational(0), y1, y2, y2 + (Dyadic(1) - c - e).to_rational() / 16};
    return f;
}

}  // namespace

TEST(Locator, MassComparisonExact)
{
    using detail::mass_at_least;
    // (1/4)^(1/2) = 1/2
    EXPECT_TRUE(mass_at_least(Rational(1, 2), Dyadic::make(1, 2), Rational(1, 2)));
    EXPECT_FALSE(mass_at_least(Rational(1, 2) - Rational(1, Int("1000000000000")), Dyadic::make(1, 2), Rational(1, 2)));
    // (1/4)^(3/4) is about 0.354
    EXPECT_FALSE(mass_at_least(Rational(1, 8), Dyadic::make(1, 2), Rational(3, 4)));
    EXPECT_TRUE(mass_at_least(Rational(1, 2), Dyadic::make(1, 2), Rational(3, 4)));
}

// mu(B(1/2, r)) = 1/8 + (r - 2^-10)/8 above the spike; the root of that against sqrt(r) is the largest
TEST(Locator, LargestRootOnSpike)
{
    auto f = spike();
    Dyadic x = Dyadic::make(1, 1);
    auto r = largest_root(f, x, Dyadic::make(1, 2), Rational(1, 2), 60, 40);
    ASSERT_TRUE(r.has_value());
    using detail::ball_mass;
    using detail::mass_at_least;
    EXPECT_TRUE(mass_at_least(ball_mass(f, x, *r), *r, Rational(1, 2)));
    // sqrt(r) = 1/8 + (r - e)/8 solved in closed form
    double e = std::ldexp(1.0, -10), c = 0.125 - e / 8;
    double s = (8 - std::sqrt(64 - 32 * c)) / 2;  // s^2/8 - s + c = 0
    EXPECT_NEAR(r->to_double(), s * s, 1e-9);
    // already above r^beta at the top radius
    EXPECT_FALSE(largest_root(f, x, Dyadic::pow2(-12), Rational(1, 2), 60, 40).has_value());
}

TEST(Locator, DepthZeroAndErrors)
{
    AffineParams p{Rational(2, 5), Rational(4, 5), Rational(3, 10), Rational(1, 2)};
    auto z = std::make_shared<const AffineFunction>(make_affine(plan_levels(p, 1, Mode::desk, {12})));
    auto mixed = mix_with_lebesgue([z](const Dyadic& x) { return (*z)(x).to_rational() * 2; }, Rational(1, 2));
    LocatorConfig cfg;
    cfg.seed_gen = 14;
    auto r = locate_exponent_point(mixed, Rational(7, 10), 0, cfg);
    EXPECT_TRUE(r.rounds.empty());
    EXPECT_TRUE(r.ordered);
    EXPECT_GT(r.x, Dyadic(0));
    EXPECT_LT(r.x, Dyadic(1));
    EXPECT_THROW(locate_exponent_point(mixed, Rational(1), 1, cfg), std::invalid_argument);
    EXPECT_THROW(locate_exponent_point(mixed, Rational(0), 1, cfg), std::invalid_argument);
}
