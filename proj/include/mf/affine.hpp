#pragma once

#include "mf/dyadic.hpp"
#include "mf/pwa.hpp"
#include "mf/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mf {

using u128 = unsigned __int128;

inline Int to_int(u128 v)
{
    Int r = Int(std::uint64_t(v >> 64)) << 64;
    return r | Int(std::uint64_t(v));
}

inline u128 to_u128(const Int& v)
{
    Int hi = v >> 64;
    Int lo = v & Int(std::numeric_limits<std::uint64_t>::max());
    return (u128(hi.convert_to<std::uint64_t>()) << 64) | u128(lo.convert_to<std::uint64_t>());
}

enum class Mode { desk, faithful };

struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// sign of 2^e - v for v > 0
inline int cmp_pow2(const Rational& e, const Rational& v)
{
    double le = to_double(e), lv = log2r(v);
    double gap = le - lv;
    if (std::abs(gap) > 1e-6 * std::max(1.0, std::abs(le))) return gap > 0 ? 1 : -1;
    // close call: 2^(P/Q) vs v  <=>  2^P vs v^Q
    Int P = numerator(e), Q = denominator(e);
    unsigned q = Q.convert_to<unsigned>();
    Rational lhs = P >= 0 ? Rational(pow2i(P.convert_to<unsigned>())) : Rational(1, pow2i((-P).convert_to<unsigned>()));
    Rational rhs = rpow(v, q);
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline unsigned odd_prime(unsigned i)
{
    unsigned found = 0;
    for (unsigned c = 3;; c += 2) {
        bool prime = true;
        for (unsigned d = 3; d * d <= c; d += 2)
            if (c % d == 0) { prime = false; break; }
        if (prime && ++found == i) return c;
    }
}

struct LevelParams {
    unsigned n = 0;
    unsigned J = 0;
    std::vector<Rational> alpha_nominal;  // i = 0..n+1
    std::vector<Rational> alpha;          // snapped where used
    std::vector<Rational> gamma;          // from snapped alpha
    std::vector<Rational> gamma_nominal;
    std::vector<unsigned> m;        // J/alpha, used indices only
    std::vector<unsigned> spacing;  // floor(J(1 - gamma/alpha))
    std::vector<unsigned> used;     // indices i carrying marks
};

struct LevelPlan {
    AffineParams params;
    unsigned depth = 0;
    Mode mode = Mode::desk;
    Rational eps0;
    bool degenerate = false;
    Rational alpha0_prime;
    std::vector<LevelParams> levels;  // levels[n-1]
    std::vector<std::string> violations;
    std::vector<std::string> substitutions;

    const LevelParams& level(unsigned n) const { return levels.at(n - 1); }
};

namespace detail {

inline Rational snap_alpha(unsigned J, const Rational& a, unsigned& m_out)
{
    Rational t = Rational(J) / a;
    Int lo = rfloor(t), hi = rceil(t);
    if (lo < J) lo = J;
    if (hi < J) hi = J;
    auto err = [&](const Int& m) {
        Rational d = Rational(J, m) - a;
        return d < 0 ? Rational(-d) : d;
    };
    Int m = err(lo) <= err(hi) ? lo : hi;
    m_out = m.convert_to<unsigned>();
    return Rational(J, m);
}

inline std::vector<Rational> alpha_grid(const LevelPlan& p, unsigned n)
{
    std::vector<Rational> g;
    const auto& a0 = p.params.alpha0;
    Rational top = p.degenerate ? p.alpha0_prime : p.params.beta0;
    for (unsigned i = 0; i <= n + 1; ++i) g.push_back(a0 + Rational(i) * (top - a0) / (n + 1));
    if (p.degenerate) g.back() = p.params.beta0;
    return g;
}

inline Rational gamma_of(const AffineParams& pr, const Rational& a, unsigned n)
{
    return pr.d * (1 + pr.eta * a) * (1 - Rational(1, ipow(10, n)));
}

inline LevelParams make_level(const LevelPlan& p, unsigned n, unsigned J)
{
    LevelParams L;
    L.n = n;
    L.J = J;
    L.alpha_nominal = alpha_grid(p, n);
    L.alpha = L.alpha_nominal;
    L.gamma.resize(n + 2);
    L.gamma_nominal.resize(n + 2);
    L.m.assign(n + 2, 0);
    L.spacing.assign(n + 2, 0);
    if (p.degenerate) L.used = {1};
    else
        for (unsigned i = 1; i <= n; ++i) L.used.push_back(i);
    for (unsigned i = 0; i <= n + 1; ++i) L.gamma_nominal[i] = gamma_of(p.params, L.alpha_nominal[i], n);
    L.gamma = L.gamma_nominal;
    for (unsigned i : L.used) {
        unsigned m;
        L.alpha[i] = snap_alpha(J, L.alpha_nominal[i], m);
        L.m[i] = m;
        L.gamma[i] = gamma_of(p.params, L.alpha[i], n);
        if (!(L.gamma[i] < L.alpha[i]))
            throw InfeasibleError("gamma < alpha fails after snapping at level " + std::to_string(n));
        L.spacing[i] = rfloor(Rational(J) * (1 - L.gamma[i] / L.alpha[i])).convert_to<unsigned>();
    }
    return L;
}

inline std::string fmt_alpha(const Rational& a) { return rpretty(a); }

// level-1 requirements; returns the failing ones
inline std::vector<std::string> level1_failures(const LevelPlan& p, const LevelParams& L)
{
    std::vector<std::string> f;
    unsigned J = L.J;
    const auto& pr = p.params;
    Rational ga = L.gamma[1] / L.alpha[1];
    Int e = rfloor(Rational(J) * ga) + 1;
    if (!(e > 100)) f.push_back("level 1: 2^100 < 2^([J_1 gamma/alpha]+1) fails ([J_1 gamma/alpha]+1 = " + e.str() + ")");
    if (!(Int(10) * pow2i(e.convert_to<unsigned>()) < pow2i(J)))
        f.push_back("level 1: 2^([J_1 gamma/alpha]+1) < 2^J_1/10 fails");
    if (cmp_pow2(p.eps0 * J, Rational(J)) < 0) f.push_back("level 1: J_1 <= 2^(eps0 J_1) fails");
    // 2^{-J/beta0} < 2^{-J}/100  <=>  100 < 2^{J(1/beta0 - 1)}
    if (!(cmp_pow2(Rational(J) * (1 / pr.beta0 - 1), Rational(100)) > 0))
        f.push_back("level 1: 2^(-J_1/beta0) < 2^(-J_1)/100 fails");
    Rational spread = p.degenerate ? Rational(p.alpha0_prime - pr.alpha0) : Rational(pr.beta0 - pr.alpha0);
    if (!(Rational(J) * spread / 2 > 1)) f.push_back("level 1: 2^-1 2^(J_1 (beta0-alpha0)/2) > 1 fails");
    return f;
}

inline std::vector<std::string> leveln_failures(const LevelPlan& p, const LevelParams& L, unsigned Jprev)
{
    std::vector<std::string> f;
    unsigned n = L.n, J = L.J;
    const auto& pr = p.params;
    std::string tag = "level " + std::to_string(n) + ": ";
    // 4n 10^n 2^{J_{n-1} 10^{2n}/alpha0} <= J_n gamma_{n,0}
    Rational lhs_exp = Rational(Jprev) * Rational(ipow(10, 2 * n)) / pr.alpha0;
    Rational rhs = Rational(J) * L.gamma_nominal[0] / Rational(4 * n * ipow(10, n));
    if (!(rhs > 0 && cmp_pow2(lhs_exp, rhs) <= 0))
        f.push_back(tag + "4n 10^n 2^(J_{n-1} 10^(2n)/alpha0) <= J_n gamma_{n,0} fails");
    // 2n <= 2^{J_n 10^-n - J_{n-1}/alpha0}
    Rational e2 = Rational(J) / Rational(ipow(10, n)) - Rational(Jprev) / pr.alpha0;
    if (cmp_pow2(e2, Rational(2 * n)) < 0) f.push_back(tag + "2n 2^(J_n(1-10^-n)) <= 2^(J_n - J_{n-1}/alpha0) fails");
    if (cmp_pow2(p.eps0 * J, Rational(4 * n * J)) < 0) f.push_back(tag + "4n J_n <= 2^(eps0 J_n) fails");
    if (!(pr.beta0 < 1)) f.push_back(tag + "2^(J_n(1/beta0 - 1)) > 1 fails");
    Rational spread = p.degenerate ? Rational(p.alpha0_prime - pr.alpha0) : Rational(pr.beta0 - pr.alpha0);
    if (!(Rational(J) * spread / (n + 1) > n)) f.push_back(tag + "2^-n 2^(J_n (beta0-alpha0)/(n+1)) > 1 fails");
    return f;
}

}  // namespace detail

inline LevelPlan plan_levels(const AffineParams& params, unsigned depth, Mode mode,
                             const std::vector<unsigned>& j_overrides = {})
{
    auto v = validate_affine(params);
    if (!v.ok) throw std::invalid_argument("invalid affine parameters: " + v.errors.front());
    if (depth < 1) throw std::invalid_argument("depth must be >= 1");
    LevelPlan p;
    p.params = params;
    p.depth = depth;
    p.mode = mode;
    p.eps0 = std::min(params.alpha0, Rational(1 - params.beta0)) / 2;
    p.degenerate = params.alpha0 == params.beta0;
    if (p.degenerate) {
        const auto& a0 = params.alpha0;
        Rational cap1 = a0 * (1 - a0) / 2;           // keeps (1-a)a'/((1-a0)a0) > 1-a0
        Rational cap2 = (1 - p.eps0 - a0) / 2;       // keeps 1 - eps0 > alpha_{n,2}
        p.alpha0_prime = a0 + std::min(cap1, cap2);
    }
    if (mode == Mode::desk) {
        if (j_overrides.size() != depth)
            throw std::invalid_argument("desk mode needs exactly " + std::to_string(depth) + " generations");
        for (std::size_t i = 1; i < j_overrides.size(); ++i)
            if (j_overrides[i] <= j_overrides[i - 1]) throw std::invalid_argument("generations must increase");
        for (unsigned n = 1; n <= depth; ++n) {
            unsigned J = j_overrides[n - 1];
            if (J > 120) throw std::invalid_argument("desk generations above 120 are not supported");
            auto L = detail::make_level(p, n, J);
            for (unsigned i : L.used)
                if (L.alpha[i] != L.alpha_nominal[i])
                    p.substitutions.push_back("alpha_{" + std::to_string(n) + "," + std::to_string(i) + "} " +
                                              detail::fmt_alpha(L.alpha_nominal[i]) + " -> " + rstr(L.alpha[i]) +
                                              " (J/alpha = " + std::to_string(L.m[i]) + ")");
            auto fails = n == 1 ? detail::level1_failures(p, L) : detail::leveln_failures(p, L, j_overrides[n - 2]);
            p.violations.insert(p.violations.end(), fails.begin(), fails.end());
            p.levels.push_back(std::move(L));
        }
        return p;
    }
    // faithful: smallest J_1 meeting every level-1 requirement
    std::optional<LevelParams> L1;
    for (unsigned J = 2; J <= 4096 && !L1; ++J) {
        try {
            auto L = detail::make_level(p, 1, J);
            if (L.spacing[1] <= 2) continue;
            if (detail::level1_failures(p, L).empty()) L1 = L;
        } catch (const InfeasibleError&) {
        }
    }
    if (!L1) throw InfeasibleError("faithful mode: no J_1 <= 4096 satisfies the level-1 requirements");
    p.levels.push_back(*L1);
    if (depth >= 2) {
        unsigned J1 = L1->J;
        Rational gamma20 = detail::gamma_of(params, params.alpha0, 2);
        // J_2 gamma_{2,0} >= 8*100*2^{J_1 10^4/alpha0}
        double log2_bound = to_double(Rational(J1) * 10000 / params.alpha0) + std::log2(800.0) - log2r(gamma20);
        double weak = to_double(Rational(J1) / params.alpha0);
        std::ostringstream os;
        os << "faithful mode infeasible at level 2: J_2 >= 2^{J_1/" << rpretty(params.alpha0) << "} with J_1 = " << J1
           << " (weak form log2 J_2 >= " << weak << "; full requirement log2 J_2 >= " << log2_bound << ")";
        throw InfeasibleError(os.str());
    }
    return p;
}

// T_{n,i} as sorted vectors of k
struct IndexSets {
    // sets[n-1][i] for i in used(n); unused i stay empty
    std::vector<std::vector<std::vector<u128>>> sets;
    // merged per level: sorted k with the stretch generation m
    std::vector<std::vector<u128>> marks;
    std::vector<std::vector<std::uint16_t>> mark_m;

    std::size_t count(unsigned n, unsigned i) const { return sets.at(n - 1).at(i).size(); }
};

inline std::size_t default_mark_budget() { return 30'000'000; }

inline void build_index_sets(const LevelPlan& plan, unsigned n, IndexSets& out,
                             std::size_t budget = default_mark_budget())
{
    if (out.sets.size() != n - 1) throw std::logic_error("index sets must be built level by level");
    const auto& L = plan.level(n);
    std::vector<std::vector<u128>> lvl(L.n + 2);
    for (unsigned i : L.used)
        if (L.spacing[i] <= n + 1)
            throw InfeasibleError("spacing exponent " + std::to_string(L.spacing[i]) + " <= n+1 at level " +
                                  std::to_string(n) + " (J_n too small)");
    if (L.J > 120) throw BudgetError("J_" + std::to_string(n) + " = " + std::to_string(L.J) + " exceeds the index width");
    u128 top = (u128(1) << L.J) - 1;
    if (n == 1) {
        unsigned s = L.spacing[1];
        u128 cnt = top >> s;
        if (cnt > budget) throw BudgetError("level 1 would hold " + to_int(cnt).str() + " marks");
        auto& v = lvl[1];
        v.reserve(std::size_t(cnt));
        for (u128 t = 1; t <= cnt; ++t) v.push_back(t << s);
    } else {
        const auto& P = plan.level(n - 1);
        unsigned shift = L.J - P.J;
        const auto& parents = out.marks[n - 2];
        const auto& pm = out.mark_m[n - 2];
        for (unsigned i : L.used) {
            unsigned s = L.spacing[i];
            u128 mod = u128(1) << s;
            u128 p = odd_prime(i);
            // count first
            u128 total = 0;
            auto range = [&](std::size_t idx, u128& lo, u128& hi) {
                hi = (parents[idx] + 1) << shift;
                unsigned mp = pm[idx];
                u128 len = L.J >= mp ? (u128(1) << (L.J - mp)) : 0;
                lo = hi - len;
                if (hi > top) hi = top;
                if (lo < 1) lo = 1;
            };
            for (std::size_t idx = 0; idx < parents.size(); ++idx) {
                u128 lo, hi;
                range(idx, lo, hi);
                if (lo > hi) continue;
                u128 first = lo + ((p + mod - (lo & (mod - 1))) & (mod - 1));
                if (first <= hi) total += (hi - first) / mod + 1;
            }
            if (total > budget) throw BudgetError("T_{" + std::to_string(n) + "," + std::to_string(i) + "} would hold " +
                                                  to_int(total).str() + " marks");
            auto& v = lvl[i];
            v.reserve(std::size_t(total));
            for (std::size_t idx = 0; idx < parents.size(); ++idx) {
                u128 lo, hi;
                range(idx, lo, hi);
                if (lo > hi) continue;
                u128 first = lo + ((p + mod - (lo & (mod - 1))) & (mod - 1));
                for (u128 k = first; k <= hi; k += mod) v.push_back(k);
            }
        }
    }
    // merge
    std::vector<std::pair<u128, std::uint16_t>> all;
    for (unsigned i : L.used)
        for (u128 k : lvl[i]) all.emplace_back(k, std::uint16_t(L.m[i]));
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<u128> ks;
    std::vector<std::uint16_t> ms;
    ks.reserve(all.size());
    ms.reserve(all.size());
    for (auto& [k, m] : all) {
        ks.push_back(k);
        ms.push_back(m);
    }
    out.sets.push_back(std::move(lvl));
    out.marks.push_back(std::move(ks));
    out.mark_m.push_back(std::move(ms));
}

inline IndexSets build_all_index_sets(const LevelPlan& plan, std::size_t budget = default_mark_budget())
{
    IndexSets s;
    for (unsigned n = 1; n <= plan.depth; ++n) build_index_sets(plan, n, s, budget);
    return s;
}

// exact implicit Z = sum_{n<=N} Z_n
class AffineFunction {
public:
    AffineFunction(std::shared_ptr<const LevelPlan> plan, std::shared_ptr<const IndexSets> sets)
        : plan_(std::move(plan)), sets_(std::move(sets))
    {
    }

    const LevelPlan& plan() const { return *plan_; }
    const IndexSets& sets() const { return *sets_; }
    unsigned depth() const { return plan_->depth; }

    // index of mark k at level n, or -1
    long long find_mark(unsigned n, u128 k) const
    {
        const auto& v = sets_->marks[n - 1];
        auto it = std::lower_bound(v.begin(), v.end(), k);
        if (it == v.end() || *it != k) return -1;
        return it - v.begin();
    }

    Dyadic level_value(unsigned n, const Dyadic& x) const
    {
        Dyadic scale = Dyadic::pow2(-(long long)n);
        if (x.sign() <= 0) return Dyadic(0);
        if (x >= Dyadic(1)) return scale;
        unsigned J = plan_->level(n).J;
        Int kk = x.floor_scaled(J);
        long long idx = find_mark(n, to_u128(kk));
        if (idx < 0) return scale * x;
        unsigned m = sets_->mark_m[n - 1][std::size_t(idx)];
        Dyadic R = Dyadic::make(kk + 1, J);
        Dyadic a = R - Dyadic::pow2(-(long long)m);
        if (x < a) return scale * Dyadic::make(kk, J);
        return scale * (R + Dyadic::pow2((long long)m - (long long)J) * (x - R));
    }

    Dyadic operator()(const Dyadic& x) const
    {
        Dyadic s(0);
        for (unsigned n = 1; n <= depth(); ++n) s += level_value(n, x);
        return s;
    }

    Dyadic total() const { return Dyadic(1) - Dyadic::pow2(-(long long)depth()); }

    StretchedInterval stretched(unsigned n, std::size_t idx) const
    {
        const auto& L = plan_->level(n);
        StretchedInterval s;
        s.parent = {L.J, to_int(sets_->marks[n - 1][idx])};
        s.m = sets_->mark_m[n - 1][idx];
        s.alpha = Rational(L.J, s.m);
        return s;
    }

    std::size_t breakpoint_count() const
    {
        std::size_t c = 2;
        for (const auto& v : sets_->marks) c += 3 * v.size();
        return c;
    }

private:
    std::shared_ptr<const LevelPlan> plan_;
    std::shared_ptr<const IndexSets> sets_;
};

// Z / Z(1), mapping [0,1] onto [0,1]
struct NormalizedAffine {
    std::shared_ptr<const AffineFunction> z;
    Rational inv_total;
    explicit NormalizedAffine(std::shared_ptr<const AffineFunction> f)
        : z(std::move(f)), inv_total(1 / z->total().to_rational())
    {
    }
    Rational operator()(const Dyadic& x) const { return (*z)(x).to_rational() * inv_total; }
};

inline AffineFunction make_affine(const LevelPlan& plan, std::size_t budget = default_mark_budget())
{
    auto p = std::make_shared<LevelPlan>(plan);
    auto s = std::make_shared<IndexSets>(build_all_index_sets(plan, budget));
    return AffineFunction(p, s);
}

inline std::vector<Dyadic> level_breakpoints(const AffineFunction& Z, unsigned n)
{
    std::vector<Dyadic> out{Dyadic(0)};
    unsigned J = Z.plan().level(n).J;
    const auto& ks = Z.sets().marks[n - 1];
    for (std::size_t i = 0; i < ks.size(); ++i) {
        Int k = to_int(ks[i]);
        Dyadic L = Dyadic::make(k, J), R = Dyadic::make(k + 1, J);
        Dyadic a = R - Dyadic::pow2(-(long long)Z.sets().mark_m[n - 1][i]);
        if (!(L == out.back())) out.push_back(L);
        if (a > L) out.push_back(a);
        out.push_back(R);
    }
    if (!(out.back() == Dyadic(1))) out.push_back(Dyadic(1));
    return out;
}

inline std::size_t default_breakpoint_budget() { return 10'000'000; }

inline PiecewiseAffine build_level_function(const AffineFunction& Z, unsigned n)
{
    PiecewiseAffine f;
    f.x = level_breakpoints(Z, n);
    for (const auto& t : f.x) f.y.push_back(Z.level_value(n, t).to_rational());
    f.provenance = {{"kind", "affine-level"}, {"n", n}};
    return f;
}

inline PiecewiseAffine assemble(const AffineFunction& Z, std::size_t budget = default_breakpoint_budget())
{
    if (Z.breakpoint_count() > budget)
        throw BudgetError("assembled function needs about " + std::to_string(Z.breakpoint_count()) +
                          " breakpoints, budget is " + std::to_string(budget));
    std::vector<Dyadic> xs;
    for (unsigned n = 1; n <= Z.depth(); ++n) {
        auto b = level_breakpoints(Z, n);
        std::vector<Dyadic> merged;
        merged.reserve(xs.size() + b.size());
        std::merge(xs.begin(), xs.end(), b.begin(), b.end(), std::back_inserter(merged));
        merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
        xs = std::move(merged);
    }
    PiecewiseAffine f;
    f.x = std::move(xs);
    f.y.reserve(f.x.size());
    for (const auto& t : f.x) f.y.push_back(Z(t).to_rational());
    return f;
}

// generation-n cover: marked stretched intervals, sorted
inline std::vector<std::pair<Dyadic, Dyadic>> cantor_set_cover(const AffineFunction& Z, unsigned n)
{
    std::vector<std::pair<Dyadic, Dyadic>> out;
    const auto& ks = Z.sets().marks[n - 1];
    out.reserve(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i) {
        auto s = Z.stretched(n, i);
        out.emplace_back(s.left(), s.right());
    }
    return out;
}

// longest complementary gap of a sorted disjoint cover inside [0,1]
inline Dyadic max_gap(const std::vector<std::pair<Dyadic, Dyadic>>& cover)
{
    if (cover.empty()) return Dyadic(1);
    Dyadic best = cover.front().first;
    for (std::size_t i = 1; i < cover.size(); ++i) best = std::max(best, cover[i].first - cover[i - 1].second);
    best = std::max(best, Dyadic(1) - cover.back().second);
    return best;
}

}  // namespace mf

namespace mf {

struct CardinalityRow {
    unsigned n = 0, i = 0;
    std::size_t count = 0;
    Dyadic expected;     // 2^{J_n - s} times parent stretched length (1 at level 1)
    bool sandwich = false;  // E/2 < #T < 2E
    double eps = 0;      // #T = 2^{J gamma/alpha (1 - eps)}
};

struct AffineIdentityReport {
    std::size_t oscillations = 0, oscillation_failures = 0;
    std::size_t pairs_brute = 0;  // pairs compared directly
    bool disjoint = true;
    bool sets_disjoint = true;    // T_{n,i} against T_{n,j}
    bool nested = true;
    bool monotone = true;
    std::vector<CardinalityRow> cardinality;
    std::vector<std::string> failures;
    bool ok() const
    {
        bool sw = true;
        for (const auto& c : cardinality) sw = sw && c.sandwich;
        return oscillation_failures == 0 && disjoint && sets_disjoint && nested && monotone && sw;
    }
};

// exact checks on every marked stretched interval; pairs are compared directly while
// the level holds at most brute_limit intervals, by a sorted sweep above that
inline AffineIdentityReport check_affine_identities(const AffineFunction& Z, std::size_t brute_limit = 8192)
{
    AffineIdentityReport r;
    auto fail = [&](std::string m) {
        if (r.failures.size() < 32) r.failures.push_back(std::move(m));
    };
    const auto& plan = Z.plan();
    for (unsigned n = 1; n <= Z.depth(); ++n) {
        const auto& L = plan.level(n);
        Dyadic osc = Dyadic::pow2(-(long long)n - (long long)L.J);
        auto cover = cantor_set_cover(Z, n);
        for (std::size_t i = 0; i < cover.size(); ++i) {
            ++r.oscillations;
            Dyadic w = Z.level_value(n, cover[i].second) - Z.level_value(n, cover[i].first);
            if (!(w == osc)) {
                ++r.oscillation_failures;
                fail("level " + std::to_string(n) + ": oscillation " + w.str() + " on mark " + std::to_string(i));
            }
        }
        if (cover.size() <= brute_limit) {
            for (std::size_t i = 0; i < cover.size(); ++i)
                for (std::size_t k = i + 1; k < cover.size(); ++k) {
                    ++r.pairs_brute;
                    if (cover[i].first < cover[k].second && cover[k].first < cover[i].second) {
                        r.disjoint = false;
                        fail("level " + std::to_string(n) + ": marks " + std::to_string(i) + ", " + std::to_string(k) +
                             " overlap");
                    }
                }
        } else {
            for (std::size_t i = 1; i < cover.size(); ++i)
                if (!(cover[i - 1].second < cover[i].first)) {
                    r.disjoint = false;
                    fail("level " + std::to_string(n) + ": marks " + std::to_string(i - 1) + ", " + std::to_string(i) +
                         " overlap");
                }
        }
        // T_{n,i} pairwise disjoint: merged marks strictly increasing
        const auto& ks = Z.sets().marks[n - 1];
        for (std::size_t i = 1; i < ks.size(); ++i)
            if (!(ks[i - 1] < ks[i])) {
                r.sets_disjoint = false;
                fail("level " + std::to_string(n) + ": index " + to_int(ks[i]).str() + " repeated");
            }
        // nesting: each level-n interval inside a level-(n-1) one
        if (n >= 2) {
            auto parent = cantor_set_cover(Z, n - 1);
            for (const auto& [a, b] : cover) {
                auto it = std::upper_bound(parent.begin(), parent.end(), a,
                                           [](const Dyadic& v, const auto& iv) { return v < iv.first; });
                bool in = it != parent.begin() && std::prev(it)->first <= a && b <= std::prev(it)->second;
                if (!in) {
                    r.nested = false;
                    fail("level " + std::to_string(n) + ": interval at " + a.str() + " not nested");
                }
            }
        }
        // cardinality sandwich
        Dyadic parent_len(1);
        if (n >= 2) {
            parent_len = Dyadic(0);
            for (std::size_t i = 0; i < Z.sets().marks[n - 2].size(); ++i)
                parent_len += Dyadic::pow2(-(long long)Z.sets().mark_m[n - 2][i]);
        }
        for (unsigned i : L.used) {
            CardinalityRow c;
            c.n = n;
            c.i = i;
            c.count = Z.sets().count(n, i);
            c.expected = parent_len * Dyadic::pow2((long long)L.J - (long long)L.spacing[i]);
            Dyadic cnt(Int(c.count));
            c.sandwich = c.expected < cnt.shifted(1) && cnt < c.expected.shifted(1);
            double e = to_double(Rational(L.J) * L.gamma[i] / L.alpha[i]);
            c.eps = c.count ? 1.0 - std::log2(double(c.count)) / e : 1.0;
            if (!c.sandwich)
                fail("level " + std::to_string(n) + ", i=" + std::to_string(i) + ": #T = " + std::to_string(c.count) +
                     " outside (E/2, 2E), E = " + std::to_string(c.expected.to_double()));
            r.cardinality.push_back(c);
        }
    }
    // Z nondecreasing along its breakpoints, level by level
    for (unsigned n = 1; n <= Z.depth(); ++n) {
        auto xs = level_breakpoints(Z, n);
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (Z.level_value(n, xs[i]) < Z.level_value(n, xs[i - 1])) {
                r.monotone = false;
                fail("level " + std::to_string(n) + ": decreasing at " + xs[i].str());
                break;
            }
    }
    return r;
}

}  // namespace mf
