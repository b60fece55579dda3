#pragma once

#include "mf/dyadic.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

struct MonoSequences {
    std::vector<Rational> a;
    std::vector<Int> b;
    std::size_t size() const { return a.size(); }
};

struct MonoCheck {
    bool ok = true;
    std::vector<std::string> failures;
};

inline MonoCheck check_sequences(const MonoSequences& s)
{
    MonoCheck c;
    auto fail = [&](std::string m) { c.ok = false; c.failures.push_back(std::move(m)); };
    if (s.size() == 0) fail("empty sequences");
    if (s.a[0] != 1 || s.b[0] != 4) fail("a_1 = 1, b_1 = 4 required");
    Rational S = s.a[0] * s.b[0];
    for (std::size_t i = 1; i < s.size(); ++i) {
        unsigned n = unsigned(i + 1);
        std::string tag = "n=" + std::to_string(n) + ": ";
        if (s.b[i] % 4 != 3) fail(tag + "b_n = 3 mod 4 fails");
        if (!(s.a[i - 1] / 300 > s.a[i])) fail(tag + "a_{n-1}/300 > a_n fails");
        // a_n > (4 b_n)^{-1/n}  <=>  4 b_n a_n^n > 1
        if (!(4 * s.b[i] * rpow(s.a[i], n) > 1)) fail(tag + "a_n > (4 b_n)^(-1/n) fails");
        if (!(s.a[i] * s.b[i] / 100 > S)) fail(tag + "a_n b_n / 100 > sum a b fails");
        S += s.a[i] * s.b[i];
    }
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        Rational tail = 0;
        for (std::size_t j = i + 1; j < s.size(); ++j) tail += s.a[j];
        if (!(s.a[i] / 100 > tail)) fail("tail bound fails at n=" + std::to_string(i + 1));
    }
    return c;
}

inline MonoSequences gen_sequences(unsigned N, unsigned max_bits = 4096)
{
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    MonoSequences s;
    s.a.push_back(1);
    s.b.push_back(4);
    Rational S = 4;
    for (unsigned n = 2; n <= N; ++n) {
        Rational an = s.a.back() / 301;
        Rational need1 = 100 * S / an;
        Rational need2 = 1 / (4 * rpow(an, n));
        Rational need = std::max(need1, need2);
        Int b = rfloor(need) + 1;  // strictly above
        while (b % 4 != 3) ++b;
        if (boost::multiprecision::msb(b) > max_bits) throw std::overflow_error("b_n exceeds the integer budget");
        s.a.push_back(an);
        s.b.push_back(b);
        S += an * b;
    }
    return s;
}

inline Rational mod4(const Rational& x, Int* q_out = nullptr)
{
    Int q = floor_div(numerator(x), 4 * denominator(x));
    if (q_out) *q_out = q;
    return x - 4 * Rational(q);
}

inline Rational eval_g(const Rational& x)
{
    Rational r = mod4(x);
    if (r <= 1) return 0;
    if (r <= 2) return r - 1;
    if (r <= 3) return 1;
    return 4 - r;
}

// integral of g over [0,u]
inline Rational g_antiderivative(const Rational& u)
{
    Int q;
    Rational r = mod4(u, &q);
    Rational v;
    if (r <= 1) v = 0;
    else if (r <= 2) v = (r - 1) * (r - 1) / 2;
    else if (r <= 3) v = Rational(1, 2) + (r - 2);
    else v = Rational(3, 2) + (r - 3) - (r - 3) * (r - 3) / 2;
    return 2 * Rational(q) + v;
}

class Monofractal {
public:
    explicit Monofractal(MonoSequences s) : s_(std::move(s)) {}
    const MonoSequences& seq() const { return s_; }

    Rational G(const Rational& x) const
    {
        Rational v = 0;
        for (std::size_t n = 0; n < s_.size(); ++n) v += s_.a[n] * eval_g(Rational(s_.b[n]) * x);
        return v;
    }

    Rational Z(const Rational& x) const
    {
        Rational v = 0;
        for (std::size_t n = 0; n < s_.size(); ++n)
            v += s_.a[n] / Rational(s_.b[n]) * g_antiderivative(Rational(s_.b[n]) * x);
        return v;
    }

    Rational operator()(const Dyadic& x) const
    {
        if (x.sign() <= 0) return 0;
        if (x >= Dyadic(1)) return Z(1);
        return Z(x.to_rational());
    }

private:
    MonoSequences s_;
};

struct FlatnessWitness {
    bool found = false;
    Rational x0, x1;
    Rational defect, bound;
    double margin = 0;  // log2(defect / bound)
};

// lower bound (1/256)|x1-x0|^{1+1/n1} on |Z(x1)-Z(x0)-G(x0)(x1-x0)|, searched on |x1-x0| <= 4/b_{n1}
inline FlatnessWitness check_flatness_defect(const Monofractal& z, const Rational& x0, unsigned n1,
                                             unsigned resolution = 16)
{
    const auto& s = z.seq();
    if (n1 < 1 || n1 > s.size()) throw std::invalid_argument("n1 must lie in 1..N");
    if (x0 < 0 || x0 > 1) throw std::invalid_argument("x0 must lie in [0,1]");
    Rational step = Rational(1) / (Rational(resolution) * Rational(s.b[n1 - 1]));
    Rational g0 = z.G(x0), z0 = z.Z(x0);
    FlatnessWitness best, fallback;
    bool have_fallback = false;
    for (int sgn : {-1, 1})
        for (unsigned t = 1; t <= 4 * resolution; ++t) {
            Rational x1 = x0 + Rational(sgn * int(t)) * step;
            if (x1 < 0 || x1 > 1) continue;
            Rational d = x1 - x0;
            Rational ad = d < 0 ? Rational(-d) : d;
            Rational D = z.Z(x1) - z0 - g0 * d;
            if (D < 0) D = -D;
            // D >= ad^{1+1/n1}/256  <=>  D^{n1} >= ad^{n1+1} / 256^{n1}
            bool ok = rpow(D, n1) >= rpow(ad, n1 + 1) / rpow(Rational(256), n1);
            double bnd_log = (1.0 + 1.0 / n1) * log2r(ad) - 8.0;
            double margin = log2r(D) - bnd_log;
            FlatnessWitness w{ok, x0, x1, D, 0, margin};
            if (ok && (!best.found || D > best.defect)) best = w;
            if (!have_fallback || margin > fallback.margin) {
                fallback = w;
                have_fallback = true;
            }
        }
    FlatnessWitness& w = best.found ? best : fallback;
    // bound as a double-free record: store ad^{1+1/n1}/256 only when rational (n1 = 1)
    Rational ad = w.x1 - w.x0;
    if (ad < 0) ad = -ad;
    w.bound = n1 == 1 ? ad * ad / 256 : Rational(0);
    return w;
}

}  // namespace mf
