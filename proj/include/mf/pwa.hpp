#pragma once

#include "mf/dyadic.hpp"

#include <json.hpp>

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace mf {

// continuous piecewise-affine function, constant outside [x.front(), x.back()]
struct PiecewiseAffine {
    std::vector<Dyadic> x;
    std::vector<Rational> y;
    nlohmann::json provenance = nlohmann::json::object();

    std::size_t size() const { return x.size(); }

    Rational operator()(const Dyadic& t) const
    {
        if (x.empty()) return 0;
        if (t <= x.front()) return y.front();
        if (t >= x.back()) return y.back();
        auto it = std::upper_bound(x.begin(), x.end(), t);
        std::size_t i = std::size_t(it - x.begin());
        const Dyadic &x0 = x[i - 1], &x1 = x[i];
        if (t == x0) return y[i - 1];
        if (y[i] == y[i - 1]) return y[i - 1];
        return y[i - 1] + (y[i] - y[i - 1]) * ((t - x0).to_rational() / (x1 - x0).to_rational());
    }

    Rational slope(std::size_t seg) const
    {
        return (y[seg + 1] - y[seg]) / (x[seg + 1] - x[seg]).to_rational();
    }

    bool monotone() const
    {
        for (std::size_t i = 1; i < y.size(); ++i)
            if (y[i] < y[i - 1]) return false;
        return true;
    }

    void check_shape() const
    {
        if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("function needs >= 2 breakpoints");
        for (std::size_t i = 1; i < x.size(); ++i)
            if (!(x[i - 1] < x[i])) throw std::invalid_argument("breakpoints not strictly increasing");
    }

    // drop breakpoints interior to a single affine piece
    void simplify()
    {
        if (x.size() < 3) return;
        std::vector<Dyadic> nx{x[0]};
        std::vector<Rational> ny{y[0]};
        for (std::size_t i = 1; i + 1 < x.size(); ++i) {
            Rational s0 = (y[i] - ny.back()) / (x[i] - nx.back()).to_rational();
            Rational s1 = (y[i + 1] - y[i]) / (x[i + 1] - x[i]).to_rational();
            if (s0 != s1) {
                nx.push_back(x[i]);
                ny.push_back(y[i]);
            }
        }
        nx.push_back(x.back());
        ny.push_back(y.back());
        x = std::move(nx);
        y = std::move(ny);
    }
};

inline PiecewiseAffine identity_function()
{
    PiecewiseAffine f;
    f.x = {Dyadic(0), Dyadic(1)};
    f.y = {Rational(0), Rational(1)};
    f.provenance = {{"kind", "identity"}};
    return f;
}

inline std::vector<Dyadic> merged_breakpoints(const std::vector<const PiecewiseAffine*>& fs)
{
    std::vector<Dyadic> all;
    for (auto* f : fs) all.insert(all.end(), f->x.begin(), f->x.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    return all;
}

// sum_i w_i f_i, exact
inline PiecewiseAffine linear_combination(const std::vector<const PiecewiseAffine*>& fs,
                                          const std::vector<Rational>& w)
{
    PiecewiseAffine out;
    out.x = merged_breakpoints(fs);
    out.y.reserve(out.x.size());
    for (const auto& t : out.x) {
        Rational v = 0;
        for (std::size_t i = 0; i < fs.size(); ++i) v += w[i] * (*fs[i])(t);
        out.y.push_back(v);
    }
    out.simplify();
    return out;
}

inline PiecewiseAffine operator+(const PiecewiseAffine& a, const PiecewiseAffine& b)
{
    return linear_combination({&a, &b}, {Rational(1), Rational(1)});
}

// samples of any callable on the grid of generation g over [0,1]
template <class F>
PiecewiseAffine chord_approximation(const F& f, unsigned g)
{
    PiecewiseAffine out;
    Int n = pow2i(g);
    for (Int k = 0; k <= n; ++k) {
        Dyadic t = Dyadic::make(k, g);
        out.x.push_back(t);
        out.y.push_back(Rational(f(t)));
    }
    return out;
}

}  // namespace mf
