#pragma once

#include "mf/analysis.hpp"
#include "mf/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

struct LocatorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LocatorConfig {
    unsigned seed_gen = 18;      // round-0 heaviest-cell scan
    unsigned center_extra = 3;   // centre grid: generation(r_n) + center_extra
    unsigned cand_extra = 5;     // candidate cells: generation(r_n) + cand_extra
    unsigned descent = 64;       // heavier-child steps below a candidate cell
    unsigned span = 12;          // minimal scale count of the exponent witness
    std::size_t window = 4;
    unsigned bisect_bits = 32;
    unsigned max_gen = 400;      // radii never go below 2^-max_gen
    std::size_t max_centers = 64;
};

struct LocatorRound {
    Dyadic x, r;     // x_n, r_n = 2^-g
    unsigned g = 0;
    Dyadic xt, rt;   // x~_n, r~_n
    double h_witness = 0;
    bool p2 = false;         // mu(B(x_n,r_n)) <= r_n^{beta'}
    double p2_margin = 0;    // log2 r_n^{beta'} - log2 mu(B(x_n,r_n))
    double root_residual = 0;  // log2 mu(B(x~,r~)) - beta log2 r~, >= 0
    double p3_ratio = 0;       // sampled max mu(B(x,r)) / r^beta, bound 300
};

struct LocatorResult {
    Dyadic x, r;
    unsigned g = 0;
    bool p2 = false;
    double p2_margin = 0;
    std::vector<LocatorRound> rounds;
    bool ordered = true;  // r_0 > r~_0 > r_1 > ...
};

namespace detail {

template <class F>
Rational ball_mass(const F& f, const Dyadic& x, const Dyadic& r)
{
    return Rational(f(x + r)) - Rational(f(x - r));
}

// m^q >= r^p  <=>  m >= r^{p/q}
inline bool mass_at_least(const Rational& m, const Dyadic& r, const Rational& e)
{
    unsigned p = numerator(e).convert_to<unsigned>(), q = denominator(e).convert_to<unsigned>();
    return rpow(m, q) >= rpow(r.to_rational(), p);
}

inline double log_ratio(const Rational& m, const Dyadic& r, const Rational& e)
{
    return log2r(m) - to_double(e) * log2d(r);
}

// heaviest generation-(g0+descent) cell below the heaviest generation-g0 cell inside [lo, hi]
template <class F>
std::optional<Dyadic> heavy_point(const F& f, const Dyadic& lo, const Dyadic& hi, unsigned g0, unsigned descent)
{
    Int k0 = lo.floor_scaled(g0);
    if (Dyadic::make(k0, g0) < lo) ++k0;
    Int k1 = hi.floor_scaled(g0);
    if (k1 <= k0) return std::nullopt;
    Rational best = -1;
    Int kb = k0;
    Rational prev = Rational(f(Dyadic::make(k0, g0)));
    for (Int k = k0; k < k1; ++k) {
        Rational next = Rational(f(Dyadic::make(k + 1, g0)));
        if (next - prev > best) {
            best = next - prev;
            kb = k;
        }
        prev = next;
    }
    Int k = kb;
    unsigned g = g0;
    for (unsigned s = 0; s < descent; ++s) {
        Rational a = Rational(f(Dyadic::make(2 * k, g + 1)));
        Rational m = Rational(f(Dyadic::make(2 * k + 1, g + 1)));
        Rational b = Rational(f(Dyadic::make(2 * k + 2, g + 1)));
        k = b - m > m - a ? 2 * k + 1 : 2 * k;
        ++g;
    }
    return Dyadic::make(2 * k + 1, g + 1);
}

}  // namespace detail

// largest r < r_top with mu(B(x,r)) >= r^beta, found by halving from r_top and exact bisection;
// nullopt when mu(B(x,r_top)) >= r_top^beta already or no crossing above 2^-max_gen
template <class F>
std::optional<Dyadic> largest_root(const F& f, const Dyadic& x, const Dyadic& r_top, const Rational& beta,
                                   unsigned max_gen, unsigned bisect_bits)
{
    using detail::ball_mass;
    using detail::mass_at_least;
    if (mass_at_least(ball_mass(f, x, r_top), r_top, beta)) return std::nullopt;
    Dyadic hi = r_top, lo = r_top;
    for (;;) {
        lo = lo.shifted(-1);
        if (lo.exp() > max_gen) return std::nullopt;
        if (mass_at_least(ball_mass(f, x, lo), lo, beta)) break;
        hi = lo;
    }
    // mu(B(x,lo)) >= lo^beta, mu(B(x,hi)) < hi^beta
    for (unsigned s = 0; s < bisect_bits; ++s) {
        Dyadic mid = (lo + hi).shifted(-1);
        if (mass_at_least(ball_mass(f, x, mid), mid, beta)) lo = mid;
        else hi = mid;
    }
    return lo;
}

// nested-ball search for a point whose local dimension is beta; F strictly increasing on [0,1]
template <class F>
LocatorResult locate_exponent_point(const F& f, const Rational& beta, unsigned depth, const LocatorConfig& cfg = {})
{
    using detail::ball_mass;
    if (!(beta > 0 && beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
    const Rational bp = (1 + beta) / 2;
    const Dyadic one(1), zero(0);

    // r_0: (r_0)^{beta'-beta} < 10^{-beta}  <=>  10^{2p} r^{q-p} < 1 with beta = p/q
    unsigned p = numerator(beta).convert_to<unsigned>(), q = denominator(beta).convert_to<unsigned>();
    unsigned g0 = 1;
    while (!(ipow(10, 2 * p) < pow2i(g0 * (q - p)))) ++g0;

    struct Centre {
        Dyadic x;
        Rational mass;
    };
    // grid centres of generation g + center_extra with closed ball inside (lo, hi) and |x - s| < r/6
    auto centres = [&](const Dyadic& lo, const Dyadic& hi, unsigned g, const Dyadic& s) {
        unsigned cg = g + cfg.center_extra;
        Dyadic r = Dyadic::pow2(-(long long)g);
        std::vector<Centre> out;
        Int ka = (s - r).floor_scaled(cg), kb = (s + r).floor_scaled(cg) + 1;
        for (Int k = ka; k <= kb; ++k) {
            Dyadic x = Dyadic::make(k, cg);
            Dyadic d = x > s ? x - s : s - x;
            if (!(d * Dyadic(6) < r)) continue;
            if (!(x - r > lo && x + r < hi)) continue;
            out.push_back({x, ball_mass(f, x, r)});
        }
        std::stable_sort(out.begin(), out.end(), [](const Centre& a, const Centre& b) { return a.mass < b.mass; });
        if (out.size() > cfg.max_centers) out.resize(cfg.max_centers);
        return out;
    };

    struct Pick {
        Dyadic xt, rt;
        double h = 0;
    };
    // x~ in B(x, r/6) with witnessed exponent < beta and a root below r/16
    auto pick_candidate = [&](const Dyadic& x, unsigned g) -> std::optional<Pick> {
        Dyadic r = Dyadic::pow2(-(long long)g);
        unsigned cg = g + cfg.cand_extra;
        Int ka = x.floor_scaled(cg) - (Int(1) << cfg.cand_extra) / 6 - 1;
        Int kb = x.floor_scaled(cg) + (Int(1) << cfg.cand_extra) / 6 + 1;
        std::optional<Pick> best;
        Dyadic rtop = r.shifted(-4);
        for (Int k = ka; k <= kb; ++k) {
            Dyadic lo = Dyadic::make(k, cg), hi = Dyadic::make(k + 1, cg);
            auto pt = detail::heavy_point(f, lo, hi, cg, cfg.descent);
            if (!pt) continue;
            Dyadic xt = *pt;
            Dyadic d = xt > x ? xt - x : x - xt;
            if (!(d * Dyadic(6) < r)) continue;
            if (xt.sign() <= 0 || !(xt < one)) continue;
            auto rt = largest_root(f, xt, rtop, beta, cfg.max_gen, cfg.bisect_bits);
            if (!rt) continue;
            // witness window runs from r/16 down past the root scale
            unsigned gr = rt->exp() > g + 4 ? unsigned(std::ceil(-log2d(*rt))) : g + 4;
            unsigned jmax = std::max(gr + 4, g + 4 + cfg.span);
            double h = local_exponent(f, xt, g + 4, jmax, cfg.window);
            if (!(h < to_double(beta))) continue;
            if (best && !(h < best->h)) continue;
            best = Pick{xt, *rt, h};
        }
        return best;
    };

    auto round_record = [&](const Dyadic& x, unsigned g) {
        LocatorRound rd;
        rd.x = x;
        rd.g = g;
        rd.r = Dyadic::pow2(-(long long)g);
        Rational m = ball_mass(f, x, rd.r);
        rd.p2 = rpow(m, denominator(bp).convert_to<unsigned>()) <=
                rpow(rd.r.to_rational(), numerator(bp).convert_to<unsigned>());
        rd.p2_margin = -detail::log_ratio(m, rd.r, bp);
        return rd;
    };

    // round 0: centre near the heaviest fine cell
    unsigned fine = g0 + cfg.cand_extra + cfg.descent;
    auto seed = detail::heavy_point(f, zero, one, cfg.seed_gen, fine > cfg.seed_gen ? fine - cfg.seed_gen : 0);
    if (!seed) throw LocatorError("no grid point with exponent < beta found");
    std::vector<Centre> cs = centres(zero, one, g0, *seed);
    if (cs.empty()) throw LocatorError("no admissible initial centre");

    LocatorResult res;
    unsigned g = g0;
    Dyadic x;
    std::optional<Pick> pk;
    auto choose = [&](const std::vector<Centre>& list, unsigned gg) {
        for (const auto& c : list) {
            if (depth == 0) return std::make_pair(c.x, std::optional<Pick>{});
            auto got = pick_candidate(c.x, gg);
            if (got) return std::make_pair(c.x, got);
        }
        return std::make_pair(Dyadic(), std::optional<Pick>{});
    };
    {
        auto [cx, got] = choose(cs, g);
        if (depth == 0) {
            x = cs.front().x;
        } else {
            if (!got) throw LocatorError("no grid point with exponent < beta found");
            x = cx;
            pk = got;
        }
    }

    for (unsigned n = 0;; ++n) {
        LocatorRound rd = round_record(x, g);
        if (n == depth) {
            res.x = x;
            res.r = rd.r;
            res.g = g;
            res.p2 = rd.p2;
            res.p2_margin = rd.p2_margin;
            break;
        }
        if (!pk) pk = pick_candidate(x, g);
        if (!pk) throw LocatorError("no grid point with exponent < beta found");
        rd.xt = pk->xt;
        rd.rt = pk->rt;
        rd.h_witness = pk->h;
        rd.root_residual = detail::log_ratio(ball_mass(f, pk->xt, pk->rt), pk->rt, beta);

        // r_{n+1}: largest power of two below r~/100
        unsigned gn = g + 1;
        while (!(Dyadic::pow2(-(long long)gn) * Dyadic(100) < pk->rt)) ++gn;
        if (gn > cfg.max_gen) throw LocatorError("bisection root absent at current scale");
        const Dyadic& reach = pk->rt;
        // closed ball inside B(x~, r~/3):  |x - x~| + r_{n+1} < r~/3
        Dyadic rn1 = Dyadic::pow2(-(long long)gn);
        std::vector<Centre> next;
        {
            std::vector<Centre> all;
            unsigned cg = gn + cfg.center_extra;
            Int span = (Int(1) << cfg.center_extra) * 40;
            Int kc = pk->xt.floor_scaled(cg);
            for (Int k = kc - span; k <= kc + span; ++k) {
                Dyadic c = Dyadic::make(k, cg);
                Dyadic d = c > pk->xt ? c - pk->xt : pk->xt - c;
                if (!((d + rn1) * Dyadic(3) < reach)) continue;
                if (!(c - rn1 > zero && c + rn1 < one)) continue;
                all.push_back({c, ball_mass(f, c, rn1)});
            }
            std::stable_sort(all.begin(), all.end(), [](const Centre& a, const Centre& b) { return a.mass < b.mass; });
            next = std::move(all);
        }
        if (next.empty()) throw LocatorError("no admissible centre inside the shrunken ball");

        res.rounds.push_back(rd);
        std::optional<Pick> npk;
        Dyadic nx;
        if (n + 1 == depth) {
            nx = next.front().x;
        } else {
            std::size_t tried = 0;
            for (const auto& c : next) {
                if (tried++ >= cfg.max_centers) break;
                auto got = pick_candidate(c.x, gn);
                if (got) {
                    nx = c.x;
                    npk = got;
                    break;
                }
            }
            if (!npk) throw LocatorError("no grid point with exponent < beta found");
        }
        // (P3) sampled at x_{n+1} and x_{n+1} -+ r_{n+1}/4 over radii 2^-e, e = g..g_{n+1}
        auto& last = res.rounds.back();
        double worst = 0;
        for (int t = -1; t <= 1; ++t) {
            Dyadic xs = nx + Dyadic(t) * Dyadic::pow2(-(long long)gn - 2);
            for (unsigned e = g; e <= gn; ++e) {
                Dyadic rr = Dyadic::pow2(-(long long)e);
                Dyadic lo = xs - rr, hi = xs + rr;
                bool inside_next = lo >= nx - rn1 && hi <= nx + rn1;
                bool inside_cur = lo >= x - rd.r && hi <= x + rd.r;
                if (inside_next || !inside_cur) continue;
                double lr = detail::log_ratio(ball_mass(f, xs, rr), rr, beta);
                worst = std::max(worst, std::exp2(lr));
            }
        }
        last.p3_ratio = worst;

        x = nx;
        g = gn;
        pk = npk;
    }

    // (P1): r_0 > r~_0 > r_1 > r~_1 > ...
    Dyadic prev = Dyadic::pow2(-(long long)g0) + Dyadic(1);
    for (std::size_t i = 0; i < res.rounds.size(); ++i) {
        if (!(res.rounds[i].r < prev)) res.ordered = false;
        if (!(res.rounds[i].rt < res.rounds[i].r)) res.ordered = false;
        prev = res.rounds[i].rt;
    }
    if (!res.rounds.empty() && !(res.r < prev)) res.ordered = false;
    return res;
}

}  // namespace mf
