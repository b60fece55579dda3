#pragma once

#include "mf/dyadic.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mf {

struct StepPiece {
    Rational lo, hi;  // support [lo, hi], lo == hi allowed
    Rational value;
};

struct FamilySpectrum {
    std::vector<StepPiece> pieces;
};

struct AffineParams {
    Rational alpha0, beta0, d, eta;
};

struct Validation {
    bool ok = true;
    std::vector<std::string> errors;
    Rational alpha0 = 0;
    void fail(std::string m) { ok = false; errors.push_back(std::move(m)); }
};

inline Validation validate_family(const FamilySpectrum& f)
{
    Validation v;
    if (f.pieces.empty()) {
        v.fail("family has no pieces");
        return v;
    }
    bool first = true;
    for (std::size_t n = 0; n < f.pieces.size(); ++n) {
        const auto& p = f.pieces[n];
        std::string tag = "piece " + std::to_string(n) + ": ";
        if (p.lo > p.hi) v.fail(tag + "support [" + rpretty(p.lo) + "," + rpretty(p.hi) + "] is empty");
        if (p.lo <= 0) v.fail(tag + "min(I_n) > 0 violated");
        if (p.hi > 1) v.fail(tag + "support exceeds (0,1]");
        if (p.value < 0 || p.value > 1) v.fail(tag + "value outside [0,1]");
        if (p.value > p.lo)
            v.fail(tag + "f_n(x) <= x violated at x in [" + rpretty(p.lo) + "," +
                   rpretty(p.value < p.hi ? p.value : p.hi) + ")");
        if (first || p.lo < v.alpha0) v.alpha0 = p.lo;
        first = false;
    }
    return v;
}

// nullopt stands for -infinity
inline std::optional<Rational> eval_spectrum(const FamilySpectrum& f, const Rational& h)
{
    std::optional<Rational> best;
    for (const auto& p : f.pieces)
        if (p.lo <= h && h <= p.hi && (!best || p.value > *best)) best = p.value;
    return best;
}

// [h*, 1]
inline std::pair<Rational, Rational> support_star(const FamilySpectrum& f)
{
    if (f.pieces.empty()) throw std::invalid_argument("empty family");
    Rational h = f.pieces.front().lo;
    for (const auto& p : f.pieces) h = std::min(h, p.lo);
    return {h, Rational(1)};
}

inline Validation validate_affine(const AffineParams& p)
{
    Validation v;
    v.alpha0 = p.alpha0;
    if (!(p.alpha0 > 0 && p.alpha0 <= p.beta0 && p.beta0 < 1)) v.fail("need 0 < alpha0 <= beta0 < 1");
    if (!(p.d > 0 && p.d < p.alpha0)) v.fail("need 0 < d < alpha0");
    if (!(p.eta > 0)) v.fail("need eta > 0");
    if (p.d * (1 + p.eta * p.beta0) > p.beta0) v.fail("d(1+eta*beta0) <= beta0 violated");
    if (p.d * (1 + p.eta * p.alpha0) > p.alpha0) v.fail("d(1+eta*alpha0) <= alpha0 violated");
    return v;
}

inline Rational affine_value(const AffineParams& p, const Rational& h) { return p.d * (1 + p.eta * h); }

// eta_p = 1/p, d_p = c/(1 + eta_p b)
inline std::vector<AffineParams> decompose_to_affine(const StepPiece& piece, int count)
{
    FamilySpectrum one{{piece}};
    auto v = validate_family(one);
    if (!v.ok) throw std::invalid_argument(v.errors.front());
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    std::vector<AffineParams> out;
    for (int p = 1; p <= count; ++p) {
        Rational eta(1, p);
        Rational d = piece.value / (1 + eta * piece.hi);
        out.push_back({piece.lo, piece.hi, d, eta});
    }
    return out;
}

}  // namespace mf
