#pragma once

#include "mf/affine.hpp"
#include "mf/dyadic.hpp"
#include "mf/spectra.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

// van der Corput: 1/2, 1/4, 3/4, 1/8, ...
inline Dyadic van_der_corput(unsigned i)
{
    Int num = 0;
    unsigned bits = 0;
    for (unsigned v = i; v; v >>= 1) ++bits;
    for (unsigned b = 0; b < bits; ++b)
        if (i >> b & 1u) num += pow2i(bits - 1 - b);
    return Dyadic::make(num, bits);
}

struct LadderInterval {
    Dyadic a, b;
};

// I_1 = (0,1), I_n = [v(n-1), v(n-1) + 2^-n]
inline std::vector<LadderInterval> init_ladder(unsigned count)
{
    if (count < 1) throw std::invalid_argument("ladder needs count >= 1");
    std::vector<LadderInterval> out{{Dyadic(0), Dyadic(1)}};
    for (unsigned n = 2; n <= count; ++n) {
        Dyadic a = van_der_corput(n - 1);
        out.push_back({a, a + Dyadic::pow2(-(long long)n)});
    }
    return out;
}

// nondecreasing staircase on [0,1], rising linearly on finitely many disjoint segments
struct Staircase {
    std::vector<Rational> a, b;  // rise r on [a_r, b_r]
    std::vector<Rational> cum;   // value at a_r
    std::vector<Rational> mass;  // increment over rise r

    std::size_t size() const { return a.size(); }

    // first rise with b_r > u
    std::size_t first_after(const Rational& u) const
    {
        return std::size_t(std::upper_bound(b.begin(), b.end(), u) - b.begin());
    }

    Rational operator()(const Rational& u) const
    {
        if (u <= 0) return 0;
        if (u >= 1) return 1;
        std::size_t r = first_after(u);
        if (r == size()) return 1;
        if (u <= a[r]) return cum[r];
        return cum[r] + mass[r] * (u - a[r]) / (b[r] - a[r]);
    }

    // u itself when rising at u, else start of the next rise
    std::optional<Rational> next_increase(const Rational& u) const
    {
        std::size_t r = first_after(u);
        if (r == size()) return std::nullopt;
        return u >= a[r] ? u : a[r];
    }

    // end of the rise containing u (a_r <= u < b_r)
    Rational rise_end(const Rational& u) const { return b[first_after(u)]; }

    // longest flat stretch, counting the tail-plus-head wrap between consecutive copies
    Rational max_flat_cyclic() const
    {
        Rational g = a.front() + (1 - b.back());
        for (std::size_t r = 1; r < size(); ++r) g = std::max(g, a[r] - b[r - 1]);
        return g;
    }
};

struct MicroInfo {
    Rational alpha0, beta0;
    unsigned J = 0, spacing = 0;
    std::size_t marks = 0;
};

struct TemplateConfig {
    unsigned blocks = 6;       // micro staircases
    unsigned micro_j = 6;      // desk generation of each micro instance
    unsigned weight_ratio = 4; // block q carries mass ~ ratio^-q
};

struct CantorTemplate {
    Staircase stair;
    std::vector<MicroInfo> micro;
    std::vector<std::string> skipped;
};

// micro parameters (a/q, b/q), d = alpha0/2, eta = 1, in order of q then a then b
inline std::vector<AffineParams> micro_parameters(std::size_t count)
{
    std::vector<AffineParams> out;
    std::vector<std::pair<Rational, Rational>> seen;
    for (unsigned q = 2; out.size() < count && q < 64; ++q)
        for (unsigned a = 1; a < q && out.size() < count; ++a)
            for (unsigned b = a + 1; b <= q && out.size() < count; ++b) {
                Rational al(a, q), be(b, q);
                if (std::find(seen.begin(), seen.end(), std::make_pair(al, be)) != seen.end()) continue;
                seen.emplace_back(al, be);
                out.push_back({al, be, al / 2, Rational(1)});
            }
    return out;
}

// equal steps across the level-1 marks of a depth-1 desk instance
inline std::vector<std::pair<Rational, Rational>> micro_rises(const AffineFunction& z)
{
    std::vector<std::pair<Rational, Rational>> r;
    for (std::size_t i = 0; i < z.sets().marks[0].size(); ++i) {
        auto s = z.stretched(1, i);
        r.emplace_back(s.left().to_rational(), s.right().to_rational());
    }
    return r;
}

// block q on [2^-q, 2^-q+1] with mass proportional to ratio^-q; [0, 2^-P] flat
inline CantorTemplate make_template(const TemplateConfig& cfg)
{
    if (cfg.blocks < 1) throw std::invalid_argument("template needs at least one block");
    if (cfg.weight_ratio < 2) throw std::invalid_argument("weight ratio must be >= 2");
    CantorTemplate t;
    std::vector<std::vector<std::pair<Rational, Rational>>> per_block;
    std::size_t want = 8 * cfg.blocks + 16;
    for (const auto& pr : micro_parameters(want)) {
        if (per_block.size() == cfg.blocks) break;
        try {
            auto plan = plan_levels(pr, 1, Mode::desk, {cfg.micro_j});
            auto z = make_affine(plan);
            if (z.sets().marks[0].empty()) {
                t.skipped.push_back(rstr(pr.alpha0) + "," + rstr(pr.beta0) + ": no marks");
                continue;
            }
            per_block.push_back(micro_rises(z));
            const auto& L = plan.level(1);
            t.micro.push_back({pr.alpha0, pr.beta0, cfg.micro_j, L.spacing[L.used.front()], z.sets().marks[0].size()});
        } catch (const std::exception& e) {
            t.skipped.push_back(rstr(pr.alpha0) + "," + rstr(pr.beta0) + ": " + e.what());
        }
    }
    if (per_block.size() < cfg.blocks) throw std::runtime_error("not enough admissible micro parameters");
    unsigned P = cfg.blocks;
    Rational total = 0;
    std::vector<Rational> w(P + 1);
    for (unsigned q = 1; q <= P; ++q) total += (w[q] = Rational(1) / rpow(Rational(cfg.weight_ratio), q));
    Rational acc = 0;
    for (unsigned q = P; q >= 1; --q) {
        Rational lo(1, pow2i(q));
        Rational m = w[q] / total / Rational(per_block[q - 1].size());
        for (auto& [a, b] : per_block[q - 1]) {
            t.stair.a.push_back(lo + lo * a);
            t.stair.b.push_back(lo + lo * b);
            t.stair.cum.push_back(acc);
            t.stair.mass.push_back(m);
            acc += m;
        }
    }
    if (acc != 1) throw std::logic_error("template mass does not sum to 1");
    return t;
}

struct GapComponent {
    bool hole = false;     // H_p component [s - delta, s + delta]
    Dyadic lo, hi;
    Dyadic s;              // hole only
    unsigned kappa_exp = 0;  // contiguous only: kappa = 2^kappa_exp
    Dyadic len;              // (hi - lo) / kappa
    Int kappa_faithful = 0;  // least integer allowed by the subdivision rule
    Rational base;           // F_p(lo)
};

struct GapLevel {
    unsigned p = 0;
    Dyadic delta;
    Dyadic s;                     // s_p
    LadderInterval itilde_next;   // Ĩ_{p+1}
    std::vector<Dyadic> points;   // S_p
    std::vector<GapComponent> comps;
    Rational rate;                // delta^2 / 2^p
    Rational total;               // F_p(1)
};

struct GapConfig {
    unsigned levels = 3;
    TemplateConfig tmpl;
    unsigned kappa_cap_exp = 0;       // 0: uncapped
    std::size_t scan_budget = 200000; // window probes per delta
    unsigned delta_tries = 512;
};

class GapMeasure {
public:
    CantorTemplate tmpl;
    std::vector<LadderInterval> ladder;
    LadderInterval itilde1;
    std::vector<GapLevel> levels;
    std::vector<nlohmann::json> log;

    std::size_t comp_index(const GapLevel& L, const Rational& x) const
    {
        std::size_t lo = 0, hi = L.comps.size();
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (L.comps[mid].lo.to_rational() <= x) lo = mid;
            else hi = mid;
        }
        return lo;
    }

    Rational level_value(unsigned p, const Rational& x) const
    {
        const auto& L = levels.at(p - 1);
        if (x <= 0) return 0;
        if (x >= 1) return L.total;
        const auto& c = L.comps[comp_index(L, x)];
        Rational lo = c.lo.to_rational();
        if (c.hole) {
            Dyadic half = c.hi - c.s;
            half = half.shifted(-1);
            Rational start = (c.s + half).to_rational();
            if (x <= start) return c.base;
            Rational d2 = (L.delta * L.delta).to_rational();
            return c.base + d2 * tmpl.stair((x - start) / half.to_rational());
        }
        Rational len = c.len.to_rational();
        Rational u = (x - lo) / len;
        Int l = rfloor(u);
        Int kmax = pow2i(c.kappa_exp) - 1;
        if (l > kmax) l = kmax;
        Rational piece = L.rate * len;
        return c.base + piece * (Rational(l) + tmpl.stair(u - Rational(l)));
    }

    Rational operator()(const Dyadic& x) const { return value(x.to_rational()); }

    Rational value(const Rational& x) const
    {
        Rational v = 0;
        for (unsigned p = 1; p <= levels.size(); ++p) v += level_value(p, x);
        return v;
    }

    Rational total() const { return value(Rational(1)); }

    // smallest y >= x where F_p is rising (x itself if rising at x)
    std::optional<Rational> next_increase(unsigned p, const Rational& x) const
    {
        const auto& L = levels.at(p - 1);
        for (std::size_t i = comp_index(L, x); i < L.comps.size(); ++i) {
            const auto& c = L.comps[i];
            Rational lo = c.lo.to_rational();
            Rational xx = std::max(x, lo);
            if (c.hole) {
                Dyadic half = (c.hi - c.s).shifted(-1);
                Rational start = (c.s + half).to_rational(), h = half.to_rational();
                Rational u = xx <= start ? Rational(0) : (xx - start) / h;
                auto r = tmpl.stair.next_increase(u);
                if (r) return start + *r * h;
                continue;
            }
            Rational len = c.len.to_rational();
            Rational u = (xx - lo) / len;
            Int l = rfloor(u);
            Int kmax = pow2i(c.kappa_exp) - 1;
            if (l > kmax) l = kmax;
            auto r = tmpl.stair.next_increase(u - Rational(l));
            if (r) return lo + (Rational(l) + *r) * len;
            if (l < kmax) return lo + (Rational(l + 1) + tmpl.stair.a.front()) * len;
        }
        return std::nullopt;
    }

    // end of the rise of F_p containing y
    Rational rise_end(unsigned p, const Rational& y) const
    {
        const auto& L = levels.at(p - 1);
        const auto& c = L.comps[comp_index(L, y)];
        Rational lo = c.lo.to_rational();
        if (c.hole) {
            Dyadic half = (c.hi - c.s).shifted(-1);
            Rational start = (c.s + half).to_rational(), h = half.to_rational();
            return start + tmpl.stair.rise_end((y - start) / h) * h;
        }
        Rational len = c.len.to_rational();
        Rational u = (y - lo) / len;
        Int l = rfloor(u);
        Int kmax = pow2i(c.kappa_exp) - 1;
        if (l > kmax) l = kmax;
        return lo + (Rational(l) + tmpl.stair.rise_end(u - Rational(l))) * len;
    }

    // F_p constant on [x, y]
    bool flat(unsigned p, const Rational& x, const Rational& y) const
    {
        auto n = next_increase(p, x);
        return !n || *n >= y;
    }
};

namespace detail {

// open components of [a,b] minus closed holes
inline std::vector<std::pair<Dyadic, Dyadic>> minus_holes(const Dyadic& a, const Dyadic& b,
                                                          std::vector<std::pair<Dyadic, Dyadic>> holes)
{
    std::sort(holes.begin(), holes.end());
    std::vector<std::pair<Dyadic, Dyadic>> out;
    Dyadic cur = a;
    for (auto& [l, r] : holes) {
        if (r < cur || l > b) continue;
        if (l > cur) out.emplace_back(cur, std::min(l, b));
        cur = std::max(cur, r);
    }
    if (cur < b) out.emplace_back(cur, b);
    return out;
}

inline std::vector<std::pair<Dyadic, Dyadic>> holes_of(const std::vector<Dyadic>& pts, const Dyadic& d)
{
    std::vector<std::pair<Dyadic, Dyadic>> h;
    for (auto& s : pts) h.emplace_back(s - d, s + d);
    return h;
}

inline Dyadic longest(const std::vector<std::pair<Dyadic, Dyadic>>& comps)
{
    Dyadic g(0);
    for (auto& [l, r] : comps) g = std::max(g, r - l);
    return g;
}

// (2^-p + p) d^2 < d_prev^2 / 2
inline bool eq_delta_decay(unsigned p, const Dyadic& d, const Dyadic& dprev)
{
    Dyadic lhs = (Dyadic::pow2(-(long long)p) + Dyadic(Int(p))) * d * d;
    return lhs < (dprev * dprev).shifted(-1);
}

// delta-discrete: interval gaps > 2 delta, distance to 0 and 1 > 2 delta
inline bool discrete(const std::vector<Dyadic>& pts, const Dyadic& d)
{
    std::vector<Dyadic> s = pts;
    std::sort(s.begin(), s.end());
    Dyadic three = d + d + d, four = three + d;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!(s[i] > three) || !(Dyadic(1) - s[i] > three)) return false;
        if (i && !(s[i] - s[i - 1] > four)) return false;
    }
    return true;
}

inline Rational grid_ceil(const Rational& x, unsigned g)
{
    return Rational(rceil(x * Rational(pow2i(g))), pow2i(g));
}

}  // namespace detail

struct GapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// one induction step: s_{n+1}, delta_{n+1}, Ĩ_{n+2}, F_{n+1}
inline void extend(GapMeasure& G, const GapConfig& cfg)
{
    using namespace detail;
    unsigned n = unsigned(G.levels.size());
    unsigned p = n + 1;
    Dyadic dprev = n ? G.levels.back().delta : Dyadic(1);
    std::vector<Dyadic> pts = n ? G.levels.back().points : std::vector<Dyadic>{};
    LadderInterval itil = n ? G.levels.back().itilde_next : G.itilde1;
    if (G.ladder.size() < p + 2) throw std::invalid_argument("ladder too short");
    const auto& Inext2 = G.ladder[p];      // I_{n+2}
    const auto& Inext3 = G.ladder[p + 1];  // I_{n+3}
    auto Hn = holes_of(pts, dprev);

    // Ĩ_{n+2}: centred in the longest piece of I_{n+2} minus H_n, length 2 delta_n when it fits
    LadderInterval itil2{Inext2.a, Inext2.b};
    if (n) {
        auto comps = minus_holes(Inext2.a, Inext2.b, Hn);
        std::size_t best = 0;
        for (std::size_t i = 1; i < comps.size(); ++i)
            if (comps[i].second - comps[i].first > comps[best].second - comps[best].first) best = i;
        if (comps.empty() || !(comps[best].second - comps[best].first > dprev + dprev))
            throw GapError("no room for the next ladder interval at level " + std::to_string(p));
        Dyadic mid = (comps[best].first + comps[best].second).shifted(-1);
        itil2 = {mid - dprev, mid + dprev};
    }

    // allowed region for the new window: interior of Ĩ_{n+1} minus H_n
    auto region = minus_holes(itil.a, itil.b, Hn);

    // delta upper bound: the widest flat stretch F_n offers outside H_n
    Rational cap = 1;
    if (n) {
        Dyadic lmax(0);
        for (auto& c : G.levels.back().comps)
            if (!c.hole) lmax = std::max(lmax, c.len);
        cap = G.tmpl.stair.max_flat_cyclic() * lmax.to_rational() / 2;
    }

    long long e = 1;
    while (!(Dyadic::pow2(-e) < dprev.shifted(-1)) || !eq_delta_decay(p, Dyadic::pow2(-e), dprev) ||
           Dyadic::pow2(-e).to_rational() > cap)
        ++e;

    for (unsigned tries = 0; tries < cfg.delta_tries; ++tries, ++e) {
        Dyadic d = Dyadic::pow2(-e);
        Rational dr = d.to_rational();
        unsigned g = unsigned(e + 1);
        Rational step(1, pow2i(g));
        std::optional<Rational> found;
        std::size_t probes = 0;
        for (auto& [ca, cb] : region) {
            Rational a = ca.to_rational(), b = cb.to_rational();
            Rational cur = a;
            while (probes++ < cfg.scan_budget) {
                Rational s = grid_ceil(cur + dr, g);
                if (s - dr <= a) s += step;
                // discreteness against 0, 1 and earlier points
                if (s <= 3 * dr) { cur = grid_ceil(3 * dr, g) - dr + step; continue; }
                bool moved = false;
                for (auto& q : pts) {
                    Rational qr = q.to_rational();
                    if (s > qr - 4 * dr && s < qr + 4 * dr) { cur = qr + 4 * dr - dr + step; moved = true; break; }
                }
                if (moved) continue;
                if (s >= 1 - 3 * dr || s + dr >= b) break;
                // F_1..F_n constant on the window
                bool ok = true;
                for (unsigned q = 1; q <= n && ok; ++q) {
                    auto y = G.next_increase(q, s - dr);
                    if (y && *y < s + dr) {
                        cur = std::max(G.rise_end(q, *y), s - dr + step);
                        ok = false;
                    }
                }
                if (!ok) continue;
                // room left in Ĩ_{n+2} and I_{n+3} after H_{n+1}
                Dyadic sd;
                Dyadic::from_rational(s, sd);
                auto pts2 = pts;
                pts2.push_back(sd);
                auto H1 = holes_of(pts2, d);
                Dyadic two = d + d;
                if (!(longest(minus_holes(itil2.a, itil2.b, H1)) > two) ||
                    !(longest(minus_holes(Inext3.a, Inext3.b, H1)) > two)) {
                    cur = s - dr + step;
                    continue;
                }
                found = s;
                break;
            }
            if (found || probes >= cfg.scan_budget) break;
        }
        if (!found) continue;

        // build level p
        GapLevel L;
        L.p = p;
        L.delta = d;
        Dyadic::from_rational(*found, L.s);
        L.points = pts;
        L.points.push_back(L.s);
        std::sort(L.points.begin(), L.points.end());
        L.itilde_next = itil2;
        L.rate = (d * d).to_rational() / Rational(pow2i(p));
        // kappa: least power of two with (beta - alpha)/kappa <= d^{2p} / 2^{p^2}
        Dyadic bound = Dyadic::pow2(-(long long)p * p);
        for (unsigned i = 0; i < 2 * p; ++i) bound *= d;
        Rational acc = 0;
        Dyadic cur(0);
        nlohmann::json kap = nlohmann::json::array();
        auto add_contig = [&](const Dyadic& lo, const Dyadic& hi) {
            GapComponent c;
            c.lo = lo;
            c.hi = hi;
            Dyadic w = hi - lo;
            // faithful least kappa
            Rational ratio = w.to_rational() / bound.to_rational();
            c.kappa_faithful = rceil(ratio);
            unsigned ke = 0;
            while (Dyadic::pow2(-(long long)ke) * w > bound) ++ke;
            if (cfg.kappa_cap_exp && ke > cfg.kappa_cap_exp)
                throw GapError("kappa cap 2^" + std::to_string(cfg.kappa_cap_exp) + " reached at level " +
                               std::to_string(p) + " (needs 2^" + std::to_string(ke) + ")");
            c.kappa_exp = ke;
            c.len = Dyadic::make(w.num(), w.exp() + ke);
            c.base = acc;
            acc += L.rate * w.to_rational();
            kap.push_back({{"gap", {lo.str(), hi.str()}},
                           {"kappa", "2^" + std::to_string(ke)},
                           {"kappa_faithful", c.kappa_faithful.str()}});
            L.comps.push_back(c);
        };
        for (auto& s : L.points) {
            add_contig(cur, s - d);
            GapComponent h;
            h.hole = true;
            h.lo = s - d;
            h.hi = s + d;
            h.s = s;
            h.base = acc;
            acc += (d * d).to_rational();
            L.comps.push_back(h);
            cur = s + d;
        }
        add_contig(cur, Dyadic(1));
        L.total = acc;
        G.log.push_back({{"level", p},
                         {"delta", d.str()},
                         {"s", L.s.str()},
                         {"itilde_next", {itil2.a.str(), itil2.b.str()}},
                         {"kappa", kap}});
        G.levels.push_back(std::move(L));
        return;
    }
    throw GapError("no admissible s_" + std::to_string(p) + " found within the scan budget");
}

inline GapMeasure assemble_gap_function(const GapConfig& cfg)
{
    if (cfg.levels < 1) throw std::invalid_argument("levels must be >= 1");
    GapMeasure G;
    G.tmpl = make_template(cfg.tmpl);
    G.ladder = init_ladder(cfg.levels + 2);
    G.itilde1 = G.ladder[0];
    for (unsigned n = 0; n < cfg.levels; ++n) extend(G, cfg);
    return G;
}

struct GapChecks {
    bool discrete = true;        // S_p delta_p-discrete
    bool delta_decay = true;     // (2^-p + p) d_p^2 < d_{p-1}^2 / 2
    bool room = true;            // Ĩ_{p+1}, I_{p+2} minus H_p keep > 2 d_p
    bool piece_increments = true;  // sampled pieces
    bool mass_bound = true;      // F_p(1) <= p d^2 + d^2 / 2^p
    bool hole_shape = true;      // flat then +d^2 on each H_p component
    bool later_holes_flat = true;  // F_p constant on H_q, q > p
    std::vector<std::string> failures;
    bool all() const
    {
        return discrete && delta_decay && room && piece_increments && mass_bound && hole_shape && later_holes_flat;
    }
};

inline GapChecks check_invariants(const GapMeasure& G)
{
    using namespace detail;
    GapChecks c;
    auto fail = [&](bool& flag, std::string m) { flag = false; c.failures.push_back(std::move(m)); };
    Dyadic dprev(1);
    for (const auto& L : G.levels) {
        std::string tag = "level " + std::to_string(L.p) + ": ";
        if (!discrete(L.points, L.delta)) fail(c.discrete, tag + "points not delta-discrete");
        if (!eq_delta_decay(L.p, L.delta, dprev)) fail(c.delta_decay, tag + "delta decay inequality fails");
        auto H = holes_of(L.points, L.delta);
        Dyadic two = L.delta + L.delta;
        if (!(longest(minus_holes(L.itilde_next.a, L.itilde_next.b, H)) > two) ||
            !(longest(minus_holes(G.ladder[L.p + 1].a, G.ladder[L.p + 1].b, H)) > two))
            fail(c.room, tag + "no interval longer than 2 delta left");
        Rational d2 = (L.delta * L.delta).to_rational();
        for (const auto& comp : L.comps) {
            if (comp.hole) {
                Rational a = G.level_value(L.p, comp.lo.to_rational());
                Rational m = G.level_value(L.p, (comp.s + L.delta.shifted(-1)).to_rational());
                Rational b = G.level_value(L.p, comp.hi.to_rational());
                if (a != m || b - m != d2) fail(c.hole_shape, tag + "hole at " + comp.s.str() + " has wrong shape");
                continue;
            }
            Int kappa = pow2i(comp.kappa_exp);
            std::vector<Int> ls{Int(0), kappa / 2, kappa - 1};
            for (const auto& l : ls) {
                Rational al = comp.lo.to_rational() + Rational(l) * comp.len.to_rational();
                Rational be = al + comp.len.to_rational();
                Rational inc = G.level_value(L.p, be) - G.level_value(L.p, al);
                if (inc != comp.len.to_rational() * L.rate)
                    fail(c.piece_increments, tag + "piece " + l.str() + " increment mismatch");
            }
        }
        Rational bound = Rational(Int(L.p)) * d2 + d2 / Rational(pow2i(L.p));
        if (!(G.level_value(L.p, 1) - G.level_value(L.p, 0) <= bound)) fail(c.mass_bound, tag + "mass bound fails");
        dprev = L.delta;
    }
    for (const auto& Lp : G.levels)
        for (const auto& Lq : G.levels) {
            if (Lq.p <= Lp.p) continue;
            for (auto& s : Lq.points)
                if (!G.flat(Lp.p, (s - Lq.delta).to_rational(), (s + Lq.delta).to_rational()))
                    fail(c.later_holes_flat, "F_" + std::to_string(Lp.p) + " moves on a level-" +
                                                 std::to_string(Lq.p) + " hole at " + s.str());
        }
    return c;
}

struct WitnessReport {
    std::size_t tested = 0, found = 0;
    bool ok() const { return tested == found; }
};

// for grid points outside H_p: the subdivision piece J_l around x has
// F_p increment >= |J_l|^{1+1/p} and |J_l| < delta_p
inline WitnessReport witness_search(const GapMeasure& G, unsigned g)
{
    WitnessReport r;
    for (const auto& L : G.levels) {
        for (Int k = 0; k <= pow2i(g); ++k) {
            Rational x(k, pow2i(g));
            bool in_hole = false;
            for (auto& s : L.points)
                if (x >= (s - L.delta).to_rational() && x <= (s + L.delta).to_rational()) in_hole = true;
            if (in_hole) continue;
            ++r.tested;
            const auto& c = L.comps[G.comp_index(L, x)];
            if (c.hole) continue;
            Rational len = c.len.to_rational(), lo = c.lo.to_rational();
            Int l = rfloor((x - lo) / len);
            if (l > pow2i(c.kappa_exp) - 1) l = pow2i(c.kappa_exp) - 1;
            Rational a = lo + Rational(l) * len, b = a + len;
            Rational inc = G.level_value(L.p, b) - G.level_value(L.p, a);
            // inc >= len^{1+1/p}  <=>  inc^p >= len^{p+1}
            if (len < L.delta.to_rational() && rpow(inc, L.p) >= rpow(len, L.p + 1)) ++r.found;
        }
    }
    return r;
}

struct QuadraticReport {
    std::size_t tested = 0;
    bool ok = true;
    double worst = 0;  // max |F(y)-F(s)| / |y-s|^2
};

// |F(y) - F(s_i)| <= 4 |y - s_i|^2 on [s-d_n, s+d_n] minus (s-d_{n+1}, s+d_{n+1}), n >= i
inline QuadraticReport quadratic_flatness(const GapMeasure& G, std::size_t samples = 16)
{
    QuadraticReport r;
    for (std::size_t i = 0; i < G.levels.size(); ++i) {
        Dyadic s = G.levels[i].s;
        Rational Fs = G.value(s.to_rational());
        for (std::size_t n = i; n + 1 < G.levels.size(); ++n) {
            Rational dn = G.levels[n].delta.to_rational(), dn1 = G.levels[n + 1].delta.to_rational();
            std::vector<Rational> offs;
            for (Rational t = dn1; t <= dn; t *= 2) offs.push_back(t);
            for (std::size_t k = 0; k <= samples; ++k) offs.push_back(dn1 + (dn - dn1) * Rational(Int(k), Int(samples)));
            for (const auto& t : offs)
                for (int sg : {-1, 1}) {
                    Rational y = s.to_rational() + Rational(sg) * t;
                    Rational diff = G.value(y) - Fs;
                    if (diff < 0) diff = -diff;
                    ++r.tested;
                    if (diff > 4 * t * t) r.ok = false;
                    r.worst = std::max(r.worst, to_double(diff / (t * t)));
                }
        }
    }
    return r;
}

// F / F(1)
struct NormalizedGap {
    const GapMeasure* g;
    Rational inv;
    explicit NormalizedGap(const GapMeasure& G) : g(&G), inv(1 / G.total()) {}
    Rational operator()(const Dyadic& x) const { return (*g)(x) * inv; }
};

}  // namespace mf
