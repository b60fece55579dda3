#pragma once

#include "mf/affine.hpp"
#include "mf/monofractal.hpp"
#include "mf/pwa.hpp"
#include "mf/spectra.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

struct ScheduleEntry {
    unsigned step = 0;   // p
    Int cell = 0;        // k of I_{p,k}
    unsigned piece = 0;  // 1-based index of Z_q
};

// Step p: Z_1 into every I_{p,k}, then Z_2, ..., then Z_min(p, pieces)
inline std::vector<ScheduleEntry> make_schedule(unsigned piece_count, std::size_t max_insertions)
{
    if (piece_count < 1) throw std::invalid_argument("piece_count must be >= 1");
    if (max_insertions < 2) throw std::invalid_argument("max_insertions too small for Step 1 (needs 2)");
    std::vector<ScheduleEntry> s;
    for (unsigned p = 1;; ++p) {
        for (unsigned q = 1; q <= std::min(p, piece_count); ++q)
            for (Int k = 0; k < pow2i(p); ++k) {
                if (s.size() == max_insertions) return s;
                s.push_back({p, k, q});
            }
    }
}

// insertions needed to finish Step 1..steps
inline std::size_t insertions_through_step(unsigned piece_count, unsigned steps)
{
    std::size_t n = 0;
    for (unsigned p = 1; p <= steps; ++p) n += std::size_t(std::min(p, piece_count)) << p;
    return n;
}

using Cover = std::vector<std::pair<Dyadic, Dyadic>>;

struct GapTracker {
    Cover cover;  // sorted, disjoint closed intervals

    // open gaps of [lo, hi] minus the cover
    std::vector<std::pair<Dyadic, Dyadic>> gaps(const Dyadic& lo, const Dyadic& hi) const
    {
        std::vector<std::pair<Dyadic, Dyadic>> g;
        Dyadic cur = lo;
        for (const auto& [a, b] : cover) {
            if (b <= lo || a >= hi) continue;
            if (a > cur) g.emplace_back(cur, a);
            if (b > cur) cur = b;
        }
        if (cur < hi) g.emplace_back(cur, hi);
        return g;
    }

    Dyadic max_gap() const
    {
        Dyadic best(0);
        for (auto& [a, b] : gaps(Dyadic(0), Dyadic(1))) best = std::max(best, b - a);
        return best;
    }

    void add(const Cover& extra)
    {
        Cover merged;
        merged.reserve(cover.size() + extra.size());
        std::merge(cover.begin(), cover.end(), extra.begin(), extra.end(), std::back_inserter(merged));
        cover = std::move(merged);
    }
};

struct Insertion {
    std::size_t n = 0;  // insertion number, Y_{n+1} = Y_n + ...
    ScheduleEntry at;
    Dyadic gap_lo, gap_hi;
    Dyadic lo;              // left end of L'
    unsigned len_exp = 0;   // |L'| = 2^-len_exp
    unsigned amp_exp = 0;   // amplitude 2^-amp_exp
    std::vector<std::string> deviations;
};

struct HmConfig {
    unsigned affine_j = 10;        // desk generation of every piece (depth 1)
    unsigned pieces = 2;           // affine pieces per step
    unsigned steps = 2;            // complete Steps
    unsigned mono_depth = 2;       // Z_0
    unsigned amp_c = 2;            // desk amplitude 2^{-c n^2} |L'|
    bool exact_amplitude = false;  // 2^{-ceil(n^2/|gap|)} instead
};

class HmFunction {
public:
    Monofractal z0{gen_sequences(1)};
    std::vector<std::shared_ptr<const AffineFunction>> pieces;
    std::vector<Rational> inv_total;
    std::vector<Insertion> insertions;

    Rational piece_value(unsigned q, const Dyadic& u) const
    {
        return (*pieces[q - 1])(u).to_rational() * inv_total[q - 1];
    }

    Rational operator()(const Dyadic& x) const
    {
        Rational v = z0(x) + piece_value(1, x);
        for (const auto& in : insertions) {
            Dyadic u = (x - in.lo).shifted((long long)in.len_exp);
            if (u.sign() <= 0) continue;
            Rational amp(1, pow2i(in.amp_exp));
            v += amp * (u >= Dyadic(1) ? Rational(1) : piece_value(in.at.piece, u));
        }
        return v;
    }
};

struct HmBuild {
    HmFunction f;
    GapTracker tracker;
    std::vector<nlohmann::json> log;
    std::vector<Dyadic> max_gaps;
    std::vector<std::string> deviations;
    unsigned completed_steps = 0;
};

inline Cover piece_cover(const AffineFunction& z)
{
    return cantor_set_cover(z, z.depth());
}

inline HmBuild build_hm(const FamilySpectrum& fam, const HmConfig& cfg)
{
    auto v = validate_family(fam);
    if (!v.ok) throw std::invalid_argument(v.errors.front());
    if (cfg.pieces < 1) throw std::invalid_argument("need at least one affine piece per step");
    HmBuild out;
    out.f.z0 = Monofractal(gen_sequences(cfg.mono_depth));
    // the pieces of the first family member feed the schedule
    auto params = decompose_to_affine(fam.pieces.front(), int(cfg.pieces));
    for (const auto& pr : params) {
        auto plan = plan_levels(pr, 1, Mode::desk, {cfg.affine_j});
        auto z = std::make_shared<AffineFunction>(make_affine(plan));
        out.f.inv_total.push_back(1 / z->total().to_rational());
        out.f.pieces.push_back(z);
    }
    if (fam.pieces.size() > 1)
        out.deviations.push_back("only the first family member is scheduled; " +
                                 std::to_string(fam.pieces.size() - 1) + " further members ignored");
    out.tracker.cover = piece_cover(*out.f.pieces[0]);
    out.max_gaps.push_back(out.tracker.max_gap());

    auto sched = make_schedule(cfg.pieces, insertions_through_step(cfg.pieces, cfg.steps));
    std::size_t n = 0;
    for (const auto& e : sched) {
        ++n;
        Insertion in;
        in.n = n;
        in.at = e;
        Dyadic cl = Dyadic::make(e.cell, e.step), cr = Dyadic::make(e.cell + 1, e.step);
        auto gaps = out.tracker.gaps(cl, cr);
        if (gaps.empty()) throw std::runtime_error("no gap available in I_{" + std::to_string(e.step) + "," + e.cell.str() + "}");
        std::size_t best = 0;
        for (std::size_t i = 1; i < gaps.size(); ++i)
            if (gaps[i].second - gaps[i].first > gaps[best].second - gaps[best].first) best = i;
        in.gap_lo = gaps[best].first;
        in.gap_hi = gaps[best].second;
        Dyadic glen = in.gap_hi - in.gap_lo;
        // |L'| = largest power of 1/2 not above 2^{-n^2}|gap|
        unsigned e2 = unsigned(n * n);
        long long lg = (long long)boost::multiprecision::msb(glen.num()) - (long long)glen.exp();
        in.len_exp = unsigned((long long)e2 - lg);
        if (Dyadic::pow2(-(long long)in.len_exp) > Dyadic::pow2(-(long long)e2) * glen) ++in.len_exp;
        Dyadic len = Dyadic::pow2(-(long long)in.len_exp);
        // centre, then move to the len/2 lattice, staying inside the gap
        Dyadic mid = (in.gap_lo + in.gap_hi).shifted(-1);
        Dyadic lo = mid - len.shifted(-1);
        unsigned lat = in.len_exp + 1;
        lo = Dyadic::make(lo.floor_scaled(lat), lat);
        if (lo <= in.gap_lo) lo = lo + len.shifted(-1);
        if (!(lo > in.gap_lo && lo + len < in.gap_hi)) throw std::runtime_error("copy does not fit in its gap");
        in.lo = lo;
        if (cfg.exact_amplitude) {
            Rational ae = Rational(Int(n * n)) / glen.to_rational();
            in.amp_exp = rceil(ae).convert_to<unsigned>();
            if (Rational(Int(in.amp_exp)) != ae)
                in.deviations.push_back("amplitude exponent " + rpretty(ae) + " rounded up to " +
                                        std::to_string(in.amp_exp));
        } else {
            in.amp_exp = unsigned(cfg.amp_c * n * n) + in.len_exp;
            in.deviations.push_back("amplitude 2^-(n^2/|gap|) replaced by 2^-" + std::to_string(in.amp_exp));
        }
        if (!(Dyadic::pow2(-(long long)in.len_exp) == Dyadic::pow2(-(long long)e2) * glen))
            in.deviations.push_back("|L'| rounded down to 2^-" + std::to_string(in.len_exp));
        // tracker update with the copy's cover
        Cover add;
        for (auto& [a, b] : piece_cover(*out.f.pieces[e.piece - 1]))
            add.emplace_back(lo + a.shifted(-(long long)in.len_exp), lo + b.shifted(-(long long)in.len_exp));
        // copies never cross earlier covers
        for (const auto& [a, b] : out.tracker.cover)
            if (b >= add.front().first && a <= add.back().second)
                throw std::logic_error("inserted cover crosses the previous cover");
        out.tracker.add(add);
        out.max_gaps.push_back(out.tracker.max_gap());
        nlohmann::json rec = {{"n", n},
                              {"step", e.step},
                              {"cell", e.cell.str()},
                              {"piece", e.piece},
                              {"gap", {in.gap_lo.str(), in.gap_hi.str()}},
                              {"copy", {lo.str(), (lo + len).str()}},
                              {"amplitude_exponent", in.amp_exp},
                              {"deviations", in.deviations}};
        out.log.push_back(rec);
        out.f.insertions.push_back(std::move(in));
    }
    out.completed_steps = cfg.steps;
    return out;
}

// every piece q <= min(p, pieces) has a copy inside every I_{p,k} of the finest completed step
inline bool homogeneity_diagnostic(const HmBuild& b, unsigned pieces)
{
    unsigned p = b.completed_steps;
    if (p == 0) return true;
    for (Int k = 0; k < pow2i(p); ++k)
        for (unsigned q = 1; q <= std::min(p, pieces); ++q) {
            bool found = false;
            Dyadic cl = Dyadic::make(k, p), cr = Dyadic::make(k + 1, p);
            for (const auto& in : b.f.insertions)
                if (in.at.piece == q && in.lo >= cl && in.lo + Dyadic::pow2(-(long long)in.len_exp) <= cr) found = true;
            if (!found) return false;
        }
    return true;
}

// sum_{m>n} amp_m < 2^{-n^2} for every n, exact; 2^{-n^2} bounds 2^{-n^2/|gap|}
inline bool amplitudes_summable(const HmBuild& b)
{
    const auto& ins = b.f.insertions;
    Dyadic tail(0);
    for (std::size_t i = ins.size(); i-- > 0;) {
        long long n = (long long)ins[i].n;
        if (!(tail < Dyadic::pow2(-n * n))) return false;
        tail += Dyadic::pow2(-(long long)ins[i].amp_exp);
    }
    return true;
}

// bound on the amplitudes of every later insertion: sum_{m>N} 2^{-m^2} < 2^{1-(N+1)^2}
inline Dyadic tail_bound(const HmBuild& b)
{
    long long N = (long long)b.f.insertions.size() + 1;
    return Dyadic::pow2(1 - N * N);
}

// the maximal gap has at least halved somewhere along the run
inline bool max_gap_halves(const HmBuild& b)
{
    for (std::size_t i = 0; i < b.max_gaps.size(); ++i)
        for (std::size_t k = i + 1; k < b.max_gaps.size(); ++k)
            if (b.max_gaps[k].shifted(1) <= b.max_gaps[i]) return true;
    return false;
}

// explicit breakpoints with Z_0 sampled at generation g (approximation)
inline PiecewiseAffine materialize_hm(const HmFunction& f, unsigned mono_generation)
{
    std::vector<Dyadic> xs;
    for (Int k = 0; k <= pow2i(mono_generation); ++k) xs.push_back(Dyadic::make(k, mono_generation));
    auto add_piece = [&](unsigned q, const Dyadic& lo, unsigned e) {
        for (unsigned n = 1; n <= f.pieces[q - 1]->depth(); ++n)
            for (auto& t : level_breakpoints(*f.pieces[q - 1], n)) xs.push_back(lo + t.shifted(-(long long)e));
    };
    add_piece(1, Dyadic(0), 0);
    for (const auto& in : f.insertions) add_piece(in.at.piece, in.lo, in.len_exp);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    PiecewiseAffine out;
    out.x = xs;
    // Z_0 linearly interpolated between its samples
    PiecewiseAffine z0 = chord_approximation(f.z0, mono_generation);
    for (const auto& t : xs) {
        Rational v = z0(t) + f.piece_value(1, t);
        for (const auto& in : f.insertions) {
            Dyadic u = (t - in.lo).shifted((long long)in.len_exp);
            if (u.sign() <= 0) continue;
            v += Rational(1, pow2i(in.amp_exp)) * (u >= Dyadic(1) ? Rational(1) : f.piece_value(in.at.piece, u));
        }
        out.y.push_back(v);
    }
    out.simplify();
    out.provenance = {{"kind", "hm"}, {"approximation", "Z_0 chords at generation " + std::to_string(mono_generation)}};
    return out;
}

}  // namespace mf
