#pragma once

#include "mf/dyadic.hpp"
#include "mf/pwa.hpp"

#include <stdexcept>
#include <vector>

namespace mf {

template <class F>
Rational measure_of_interval(const F& f, const Dyadic& a, const Dyadic& b)
{
    if (!(a < b)) return 0;
    return Rational(f(b)) - Rational(f(a));
}

// block p of the output lives on [2^-p, 2^-p+1] with mass 2^-p; [0, 2^-P] stays flat
inline PiecewiseAffine concatenate(const std::vector<const PiecewiseAffine*>& fs)
{
    if (fs.empty()) throw std::invalid_argument("concatenate needs at least one input");
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto& f = *fs[i];
        f.check_shape();
        if (!(f.x.front() == Dyadic(0)) || !(f.x.back() == Dyadic(1)) || f.y.front() != 0 || f.y.back() != 1 ||
            !f.monotone())
            throw std::invalid_argument("input " + std::to_string(i) + " does not map [0,1] onto [0,1] monotonically");
    }
    long long P = (long long)fs.size();
    PiecewiseAffine out;
    Dyadic tailx = Dyadic::pow2(-P);
    out.x = {Dyadic(0), tailx};
    out.y = {Rational(0), Rational(0)};
    for (long long p = P; p >= 1; --p) {
        const auto& f = *fs[std::size_t(p - 1)];
        Dyadic x0 = Dyadic::pow2(-p);
        Rational base = Rational(1, pow2i(unsigned(p))) - Rational(1, pow2i(unsigned(P)));
        Rational scale(1, pow2i(unsigned(p)));
        for (std::size_t i = 1; i < f.x.size(); ++i) {
            out.x.push_back(x0 + x0 * f.x[i]);
            out.y.push_back(base + scale * f.y[i]);
        }
    }
    out.simplify();
    out.provenance = {{"kind", "concatenation"}, {"inputs", fs.size()}};
    return out;
}

inline PiecewiseAffine mix_with_lebesgue(const PiecewiseAffine& f, const Rational& w)
{
    if (!(w > 0 && w < 1)) throw std::invalid_argument("weight must lie in (0,1)");
    auto id = identity_function();
    auto out = linear_combination({&f, &id}, {w, Rational(1) - w});
    out.provenance = {{"kind", "mix"}, {"weight", rstr(w)}, {"base", f.provenance}};
    return out;
}

// callable form for implicit inputs
template <class F>
struct Mixed {
    F f;
    Rational w;
    Rational operator()(const Dyadic& x) const
    {
        Dyadic c = x.sign() < 0 ? Dyadic(0) : (x > Dyadic(1) ? Dyadic(1) : x);
        return w * Rational(f(x)) + (1 - w) * c.to_rational();
    }
};

template <class F>
Mixed<F> mix_with_lebesgue(F f, const Rational& w)
{
    if (!(w > 0 && w < 1)) throw std::invalid_argument("weight must lie in (0,1)");
    return Mixed<F>{std::move(f), w};
}

// inverse function; breakpoint values must be dyadic
inline PiecewiseAffine invert_measure(const PiecewiseAffine& f)
{
    f.check_shape();
    PiecewiseAffine g;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (i > 0 && !(f.y[i] > f.y[i - 1]))
            throw std::invalid_argument("flat segment present: mix with Lebesgue before inverting");
        Dyadic yd;
        if (!Dyadic::from_rational(f.y[i], yd))
            throw std::invalid_argument("breakpoint value " + rstr(f.y[i]) + " is not dyadic");
        g.x.push_back(yd);
        g.y.push_back(f.x[i].to_rational());
    }
    g.provenance = {{"kind", "inverse"}, {"base", f.provenance}};
    return g;
}

}  // namespace mf
