#pragma once

#include "mf/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y, std::size_t b, std::size_t e)
{
    double n = double(e - b), sx = 0, sy = 0;
    for (std::size_t i = b; i < e; ++i) { sx += x[i]; sy += y[i]; }
    double mx = sx / n, my = sy / n, sxx = 0, sxy = 0;
    for (std::size_t i = b; i < e; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxy / sxx;
}

struct LineFit {
    double slope = 0, intercept = 0;
};

inline LineFit ls_fit(const std::vector<double>& x, const std::vector<double>& y)
{
    if (x.size() < 2) return {};
    double s = ls_slope(x, y, 0, x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= double(x.size());
    my /= double(x.size());
    return {s, my - s * mx};
}

// min over windows of consecutive scales of the slope; +inf when flat at the finest scale
inline double window_min_slope(const std::vector<double>& lx, const std::vector<double>& ly, std::size_t window)
{
    if (ly.empty() || std::isinf(ly.back())) return kInf;
    std::size_t w = std::min(window, ly.size());
    double best = kInf;
    for (std::size_t b = 0; b + w <= ly.size(); ++b) best = std::min(best, ls_slope(lx, ly, b, b + w));
    return best;
}

// log2 of |F(x+2^-j) - F(x-2^-j)| for j = jmin..jmax
template <class F>
std::vector<double> oscillation_profile(const F& f, const Dyadic& x, unsigned jmin, unsigned jmax)
{
    std::vector<double> out;
    for (unsigned j = jmin; j <= jmax; ++j) {
        Dyadic r = Dyadic::pow2(-(long long)j);
        Rational w = Rational(f(x + r)) - Rational(f(x - r));
        if (w < 0) w = -w;
        out.push_back(w == 0 ? -kInf : log2r(w));
    }
    return out;
}

template <class F>
double local_exponent(const F& f, const Dyadic& x, unsigned jmin, unsigned jmax, std::size_t window = 4)
{
    if (x.sign() < 0 || x > Dyadic(1)) throw std::invalid_argument("x outside [0,1]");
    if (jmin >= jmax) throw std::invalid_argument("need jmin < jmax");
    auto ly = oscillation_profile(f, x, jmin, jmax);
    if (std::isinf(ly.back())) return kInf;
    std::vector<double> lx;
    for (unsigned j = jmin; j <= jmax; ++j) lx.push_back(1.0 - double(j));
    // non-monotone inputs can vanish at a coarse scale only
    std::size_t first = 0;
    while (first < ly.size() && std::isinf(ly[first])) ++first;
    std::vector<double> fx(lx.begin() + first, lx.end()), fy(ly.begin() + first, ly.end());
    return window_min_slope(fx, fy, window);
}

// log2 max over the 3 neighbouring generation-j cells of mu, regressed against -j
template <class F>
double measure_leader_exponent(const F& f, const Dyadic& x, unsigned jmin, unsigned jmax, std::size_t window = 4)
{
    if (x.sign() < 0 || x > Dyadic(1)) throw std::invalid_argument("x outside [0,1]");
    if (jmin >= jmax) throw std::invalid_argument("need jmin < jmax");
    std::vector<double> lx, ly;
    for (unsigned j = jmin; j <= jmax; ++j) {
        Int n = pow2i(j), k = x.floor_scaled(j);
        if (k >= n) k = n - 1;
        Rational best = 0;
        for (Int t = k - 1; t <= k + 1; ++t) {
            if (t < 0 || t >= n) continue;
            Rational m = Rational(f(Dyadic::make(t + 1, j))) - Rational(f(Dyadic::make(t, j)));
            if (m < 0) m = -m;
            best = std::max(best, m);
        }
        lx.push_back(-double(j));
        ly.push_back(best == 0 ? -kInf : log2r(best));
    }
    return window_min_slope(lx, ly, window);
}

struct SpectrumEstimate {
    unsigned j = 0;
    std::size_t bins = 0;
    double h_max = 2.0;
    std::vector<std::size_t> counts;
    std::size_t flat = 0;   // omega = 0, the +inf sentinel
    std::size_t above = 0;  // h >= h_max
    std::size_t cells = 0;

    double width() const { return h_max / double(bins); }
    double lower(std::size_t b) const { return width() * double(b); }
    double upper(std::size_t b) const { return width() * double(b + 1); }
    double center(std::size_t b) const { return width() * (double(b) + 0.5); }
    double estimate(std::size_t b) const
    {
        return counts[b] ? std::log2(double(counts[b])) / double(j) : 0.0;
    }
    // bins whose lower edge is <= 1
    std::size_t unit_bins() const
    {
        std::size_t n = 0;
        while (n < bins && lower(n) <= 1.0 + 1e-12) ++n;
        return n;
    }
    // bins inside [0,1); symmetric increments do not resolve h >= 1
    std::size_t resolved_bins() const
    {
        std::size_t n = 0;
        while (n < bins && upper(n) <= 1.0 + 1e-12) ++n;
        return n;
    }
};

// worker cap for grid evaluation; 0 means hardware concurrency
inline unsigned& worker_limit()
{
    static unsigned w = 0;
    return w;
}

inline unsigned worker_count()
{
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    return worker_limit() ? std::min(worker_limit(), hw) : hw;
}

// values of f on the generation-j grid over [lo, hi]; chunks are filled in index order
template <class F>
std::vector<Rational> grid_values(const F& f, unsigned j, const Int& klo, const Int& khi)
{
    if (khi < klo) return {};
    std::size_t n = (khi - klo + 1).template convert_to<std::size_t>();
    std::vector<Rational> v(n);
    unsigned w = n < 4096 ? 1u : worker_count();
    auto fill = [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) v[i] = Rational(f(Dyadic::make(klo + Int(i), j)));
    };
    if (w <= 1) {
        fill(0, n);
        return v;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (n + w - 1) / w;
    for (unsigned t = 0; t < w; ++t) {
        std::size_t b = t * chunk, e = std::min(n, b + chunk);
        if (b < e) pool.emplace_back(fill, b, e);
    }
    for (auto& th : pool) th.join();
    return v;
}

inline SpectrumEstimate spectrum_from_values(const std::vector<Rational>& vals, unsigned j, std::size_t bins,
                                             double h_max = 2.0)
{
    SpectrumEstimate s;
    s.j = j;
    s.bins = bins;
    s.h_max = h_max;
    s.counts.assign(bins, 0);
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        Rational w = vals[i + 1] - vals[i];
        if (w < 0) w = -w;
        ++s.cells;
        if (w == 0) { ++s.flat; continue; }
        double h = log2r(w) / -double(j);
        if (h < 0) h = 0;
        if (h >= h_max) { ++s.above; continue; }
        std::size_t b = std::size_t(std::floor(h / s.width()));
        if (b >= bins) b = bins - 1;
        ++s.counts[b];
    }
    return s;
}

// cells of generation j inside [lo, hi]
template <class F>
SpectrumEstimate coarse_spectrum(const F& f, unsigned j, std::size_t bins, double h_max = 2.0,
                                 const Dyadic& lo = Dyadic(0), const Dyadic& hi = Dyadic(1))
{
    if (j < 4) throw std::invalid_argument("generation must be >= 4");
    Int klo = lo.floor_scaled(j), khi = hi.floor_scaled(j);
    return spectrum_from_values(grid_values(f, j, klo, khi), j, bins, h_max);
}

// sup over resolved bins of |est_a - est_b|; empty bins count as 0
inline double spectrum_distance(const SpectrumEstimate& a, const SpectrumEstimate& b)
{
    if (a.bins != b.bins || a.j != b.j) throw std::invalid_argument("spectra must share bins and generation");
    double d = 0;
    for (std::size_t i = 0; i < a.resolved_bins(); ++i)
        if (a.counts[i] || b.counts[i]) d = std::max(d, std::abs(a.estimate(i) - b.estimate(i)));
    return d;
}

struct DarbouxReport {
    bool pass = true;
    long lowest = -1;
    std::size_t longest_empty_run = 0;
};

// resolved bins from the lowest occupied one up to h = 1 may only have short empty runs
inline DarbouxReport darboux_gap_check(const SpectrumEstimate& s, std::size_t slack = 1)
{
    DarbouxReport r;
    std::size_t top = s.resolved_bins();
    for (std::size_t b = 0; b < top; ++b)
        if (s.counts[b]) { r.lowest = long(b); break; }
    if (r.lowest < 0) return r;
    std::size_t run = 0;
    for (std::size_t b = std::size_t(r.lowest); b < top; ++b) {
        run = s.counts[b] ? 0 : run + 1;
        r.longest_empty_run = std::max(r.longest_empty_run, run);
    }
    r.pass = r.longest_empty_run <= slack;
    return r;
}

// every occupied bin with lower edge <= 1 has estimate <= lower + 2/j + width
inline bool upper_bound_holds(const SpectrumEstimate& s, double* worst = nullptr)
{
    bool ok = true;
    double w = -kInf;
    for (std::size_t b = 0; b < s.unit_bins(); ++b) {
        if (!s.counts[b]) continue;
        double slack = s.lower(b) + 2.0 / s.j + s.width() - s.estimate(b);
        w = std::max(w, -slack);
        if (slack < 0) ok = false;
    }
    if (worst) *worst = w;
    return ok;
}

struct TrendResult {
    double slope = 0;
    std::vector<double> log_radius, log_max_osc;
};

// regression of log2 max_k omega(B(k 2^-j, 2^-j)) against log2(2r)
template <class F>
TrendResult oscillation_trend(const F& f, unsigned jmin, unsigned jmax)
{
    TrendResult t;
    auto vals = grid_values(f, jmax, Int(0), pow2i(jmax));
    for (unsigned j = jmin; j <= jmax; ++j) {
        std::size_t step = std::size_t(1) << (jmax - j);
        Rational best = 0;
        for (std::size_t c = 0; c < vals.size(); c += step) {
            std::size_t lo = c >= step ? c - step : 0;
            std::size_t hi = std::min(vals.size() - 1, c + step);
            Rational w = vals[hi] - vals[lo];
            if (w > best) best = w;
        }
        t.log_radius.push_back(1.0 - double(j));
        t.log_max_osc.push_back(log2r(best));
    }
    t.slope = ls_fit(t.log_radius, t.log_max_osc).slope;
    return t;
}

struct MaximalProfile {
    std::vector<Dyadic> x;
    std::vector<double> log2_mstar;  // log2 M*(x)
    std::vector<double> thresholds;
    std::vector<double> lambda;  // grid measure of {M* > t}
    std::vector<double> ratio;   // lambda t / (mu(I)|I|^{1-beta})
};

// M*(x) = sup over dyadic radii r = 2^-m with B(x,r) inside I of mu(B(x,r)) / (2r)^beta
template <class F>
MaximalProfile maximal_function(const F& f, const Dyadic& lo, const Dyadic& hi, const Rational& beta, unsigned g,
                                const std::vector<Rational>& thresholds)
{
    if (!(beta > 0 && beta <= 1)) throw std::invalid_argument("beta must lie in (0,1]");
    if (!(lo < hi)) throw std::invalid_argument("empty interval");
    Int klo = lo.floor_scaled(g), khi = hi.floor_scaled(g);
    if (Dyadic::make(klo, g) < lo) ++klo;
    auto vals = grid_values(f, g, klo, khi);
    std::size_t n = vals.size();
    unsigned p = numerator(beta).convert_to<unsigned>(), q = denominator(beta).convert_to<unsigned>();
    MaximalProfile out;
    std::vector<Rational> tq;
    for (const auto& t : thresholds) {
        out.thresholds.push_back(to_double(t));
        tq.push_back(rpow(t, q));
    }
    std::vector<std::size_t> exceed(thresholds.size(), 0);
    for (std::size_t i = 1; i + 1 < n; ++i) {  // open interval: skip endpoints
        Dyadic x = Dyadic::make(klo + Int(i), g);
        double best_log = -kInf;
        std::vector<bool> over(thresholds.size(), false);
        for (unsigned m = 1; m <= g; ++m) {
            std::size_t s = std::size_t(1) << (g - m);
            if (s > i || i + s > n - 1) continue;
            Rational mu = vals[i + s] - vals[i - s];
            if (mu <= 0) continue;
            // (2r)^beta = 2^{(1-m) beta}
            double lg = log2r(mu) - double(1.0 - double(m)) * to_double(beta);
            best_log = std::max(best_log, lg);
            for (std::size_t t = 0; t < thresholds.size(); ++t) {
                if (over[t]) continue;
                double lt = log2r(thresholds[t]);
                if (lg > lt + 1e-9) over[t] = true;
                else if (lg > lt - 1e-9) {
                    // exact: mu^q > t^q 2^{(1-m) p}
                    long long e = (long long)(1 - (long long)m) * (long long)p;
                    Rational rhs = tq[t] * (e >= 0 ? Rational(pow2i(unsigned(e))) : Rational(1, pow2i(unsigned(-e))));
                    if (rpow(mu, q) > rhs) over[t] = true;
                }
            }
        }
        out.x.push_back(x);
        out.log2_mstar.push_back(best_log);
        for (std::size_t t = 0; t < thresholds.size(); ++t)
            if (over[t]) ++exceed[t];
    }
    Rational muI = Rational(f(hi)) - Rational(f(lo));
    double len = (hi - lo).to_double();
    double denom = to_double(muI) * std::pow(len, 1.0 - to_double(beta));
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
        double lam = double(exceed[t]) * std::ldexp(1.0, -int(g));
        out.lambda.push_back(lam);
        out.ratio.push_back(denom > 0 ? lam * out.thresholds[t] / denom : 0.0);
    }
    return out;
}

}  // namespace mf
