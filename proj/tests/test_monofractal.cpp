#include "mf/analysis.hpp"
#include "mf/monofractal.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mf;

namespace {

// trapezoids between integers, where g is linear
Rational trapezoid_integral(const Rational& u)
{
    Rational s = 0;
    Int k = 0;
    for (; Rational(k + 1) <= u; ++k) s += (eval_g(Rational(k)) + eval_g(Rational(k + 1))) / 2;
    Rational a(k);
    s += (u - a) * (eval_g(a) + eval_g(u)) / 2;
    return s;
}

bool admissible(const MonoSequences& s, std::size_t i, const Int& b)
{
    Rational S = 0;
    for (std::size_t j = 0; j < i; ++j) S += s.a[j] * s.b[j];
    unsigned n = unsigned(i + 1);
    return b % 4 == 3 && s.a[i] * b / 100 > S && 4 * b * rpow(s.a[i], n) > 1;
}

}  // namespace

TEST(Mono, GProfile)
{
    EXPECT_EQ(eval_g(Rational(1, 2)), 0);
    EXPECT_EQ(eval_g(Rational(3, 2)), Rational(1, 2));
    EXPECT_EQ(eval_g(Rational(5, 2)), 1);
    EXPECT_EQ(eval_g(Rational(7, 2)), Rational(1, 2));
    EXPECT_EQ(eval_g(Rational(-1, 2)), Rational(1, 2));
    EXPECT_EQ(eval_g(Rational(11, 2)), Rational(1, 2));
}

TEST(Mono, AntiderivativeMatchesTrapezoids)
{
    std::mt19937_64 rng(9);
    for (int t = 0; t < 300; ++t) {
        Rational u(Int(rng() % 40000), Int(1 + rng() % 997));
        EXPECT_EQ(g_antiderivative(u), trapezoid_integral(u)) << rstr(u);
    }
    EXPECT_EQ(g_antiderivative(Rational(4)), 2);
}

TEST(Mono, SequencesAreMinimalAdmissible)
{
    auto s = gen_sequences(3);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.a[1], Rational(1, 301));
    EXPECT_EQ(s.a[2], Rational(1, 90601));
    for (std::size_t i = 1; i < 3; ++i) {
        EXPECT_TRUE(admissible(s, i, s.b[i]));
        EXPECT_FALSE(admissible(s, i, s.b[i] - 4));
    }
    // frozen after the minimality oracle above
    EXPECT_EQ(s.b[1], Int(120403));
    EXPECT_EQ(s.b[2], Int("185925510337951"));
}

TEST(Mono, CheckSequencesExact)
{
    auto s = gen_sequences(4);
    auto c = check_sequences(s);
    EXPECT_TRUE(c.ok) << (c.failures.empty() ? "" : c.failures.front());
    auto broken = s;
    broken.b[1] += 4;
    broken.a[2] = broken.a[1] / 2;
    EXPECT_FALSE(check_sequences(broken).ok);
    EXPECT_THROW(gen_sequences(6, 64), std::overflow_error);
}

TEST(Mono, DerivativeIsG)
{
    Monofractal z(gen_sequences(2));
    std::mt19937_64 rng(4);
    for (int t = 0; t < 50; ++t) {
        Rational x(Int(rng() % 100000), 100000);
        Rational h(1, Int("1000000000000"));
        // Z is C^1 with Z' = G; G is Lipschitz so the difference quotient error is O(h b_n)
        Rational q = (z.Z(x + h) - z.Z(x)) / h;
        EXPECT_LT(std::abs(to_double(q - z.G(x))), 1e-5);
    }
}

TEST(Mono, MonotoneOnGrid)
{
    Monofractal z(gen_sequences(3));
    Rational prev = z(Dyadic(0));
    for (int k = 1; k <= 256; ++k) {
        Rational v = z(Dyadic::make(k, 8));
        EXPECT_GE(v, prev);
        prev = v;
    }
}

TEST(Mono, FlatnessWitnesses)
{
    Monofractal z(gen_sequences(3));
    for (unsigned n1 : {1u, 2u})
        for (int i = 0; i < 8; ++i) {
            auto w = check_flatness_defect(z, Rational(2 * i + 1, 16), n1);
            EXPECT_TRUE(w.found) << "n1=" << n1 << " i=" << i;
            EXPECT_GT(w.margin, 0);
        }
    EXPECT_THROW(check_flatness_defect(z, Rational(1, 2), 4), std::invalid_argument);
}

TEST(Mono, ExponentNearOneBetweenScales)
{
    Monofractal z(gen_sequences(3));
    double sum = 0;
    for (int i = 0; i < 16; ++i) {
        double h = local_exponent(z, Dyadic::make(8 * i + 3, 7), 20, 30);
        EXPECT_GT(h, 0.8);
        sum += h;
    }
    EXPECT_NEAR(sum / 16, 1.0, 0.1);
}
