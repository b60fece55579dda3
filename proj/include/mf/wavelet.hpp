#pragma once

#include "mf/analysis.hpp"
#include "mf/dyadic.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace mf {

struct WaveletFilter {
    std::string name;
    std::vector<double> h;  // orthonormal low-pass, sum = sqrt 2
    double cap;             // rough Holder regularity of the mother wavelet; estimates above it saturate
};

inline const std::map<std::string, WaveletFilter>& wavelet_registry()
{
    static const std::map<std::string, WaveletFilter> reg = [] {
        std::map<std::string, WaveletFilter> r;
        const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
        r["haar"] = {"haar", {1 / s2, 1 / s2}, 0.0};
        r["db2"] = {"db2", {(1 + s3) / (4 * s2), (3 + s3) / (4 * s2), (3 - s3) / (4 * s2), (1 - s3) / (4 * s2)}, 0.55};
        r["db3"] = {"db3",
                    {0.3326705529500825, 0.8068915093110924, 0.4598775021184914, -0.1350110200102546,
                     -0.0854412738820267, 0.0352262918857095},
                    1.08};
        r["db4"] = {"db4",
                    {0.2303778133088964, 0.7148465705529154, 0.6308807679298587, -0.0279837694168599,
                     -0.1870348117190931, 0.0308413818355607, 0.0328830116668852, -0.0105974017850690},
                    1.62};
        return r;
    }();
    return reg;
}

inline const WaveletFilter& wavelet(const std::string& id)
{
    auto it = wavelet_registry().find(id);
    if (it == wavelet_registry().end()) throw std::invalid_argument("unknown wavelet basis '" + id + "'");
    return it->second;
}

// g[n] = (-1)^n h[L-1-n]
inline std::vector<double> highpass(const std::vector<double>& h)
{
    std::vector<double> g(h.size());
    for (std::size_t n = 0; n < h.size(); ++n) g[n] = (n % 2 ? -1.0 : 1.0) * h[h.size() - 1 - n];
    return g;
}

struct CoefficientArray {
    Rational alpha, beta;
    unsigned jmax = 0;
    std::vector<std::vector<double>> d;       // d[j][k], j = 0..jmax; level 0 unused
    std::vector<std::vector<Rational>> mu;    // exact mu(I_{j,k})
};

// d_{j,k} = 2^{-j alpha} mu(I_{j,k})^{beta - alpha}
template <class F>
CoefficientArray measure_to_coeffs(const F& f, const Rational& alpha, const Rational& beta, unsigned jmax)
{
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta > alpha)) throw std::invalid_argument("beta must exceed alpha");
    CoefficientArray c;
    c.alpha = alpha;
    c.beta = beta;
    c.jmax = jmax;
    auto vals = grid_values(f, jmax, Int(0), pow2i(jmax));
    if (vals.back() - vals.front() > 1) throw std::invalid_argument("total mass exceeds 1");
    double a = to_double(alpha), e = to_double(beta - alpha);
    c.d.assign(jmax + 1, {});
    c.mu.assign(jmax + 1, {});
    for (unsigned j = 1; j <= jmax; ++j) {
        std::size_t n = std::size_t(1) << j, step = std::size_t(1) << (jmax - j);
        c.d[j].resize(n);
        c.mu[j].resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            Rational m = vals[(k + 1) * step] - vals[k * step];
            if (m < 0) throw std::invalid_argument("input is not monotone");
            c.mu[j][k] = m;
            c.d[j][k] = m == 0 ? 0.0 : std::exp2(-double(j) * a + e * log2r(m));
        }
    }
    return c;
}

// inverse periodic DWT; d_{j,k} multiplies psi(2^j x - k), scaling part zero.
// levels j >= G do not fit on 2^G samples and are dropped
inline std::vector<double> synthesize(const CoefficientArray& c, const std::string& basis, unsigned G)
{
    const auto& w = wavelet(basis);
    if (G < c.jmax) throw std::invalid_argument("grid generation must be >= jmax");
    auto g = highpass(w.h);
    std::vector<double> a(1, 0.0);
    for (unsigned j = 0; j < G; ++j) {
        std::size_t n = a.size(), N = 2 * n;
        std::vector<double> out(N, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            double dj = 0;
            if (j >= 1 && j <= c.jmax) dj = c.d[j][k] * std::exp2(0.5 * (double(G) - double(j)));
            for (std::size_t t = 0; t < w.h.size(); ++t) {
                std::size_t idx = (2 * k + t) % N;
                out[idx] += w.h[t] * a[k] + g[t] * dj;
            }
        }
        a = std::move(out);
    }
    return a;
}

// forward periodic DWT, returning L-infinity normalized details d[j][k], j = 0..G-1
inline std::vector<std::vector<double>> analyze_signal(const std::vector<double>& s, const std::string& basis)
{
    const auto& w = wavelet(basis);
    auto g = highpass(w.h);
    std::size_t N = s.size();
    unsigned G = 0;
    while ((std::size_t(1) << G) < N) ++G;
    if ((std::size_t(1) << G) != N) throw std::invalid_argument("signal length must be a power of two");
    std::vector<std::vector<double>> d(G);
    std::vector<double> a = s;
    for (unsigned j = G; j-- > 0;) {
        std::size_t M = a.size(), n = M / 2;
        std::vector<double> lo(n, 0.0), hi(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t t = 0; t < w.h.size(); ++t) {
                double v = a[(2 * k + t) % M];
                lo[k] += w.h[t] * v;
                hi[k] += g[t] * v;
            }
        for (auto& v : hi) v *= std::exp2(0.5 * (double(j) - double(G)));
        d[j] = std::move(hi);
        a = std::move(lo);
    }
    return d;
}

// leader of the interval at generation j holding x: max |d| over 3 neighbours and their descendants
inline std::vector<double> leader_profile(const std::vector<std::vector<double>>& d, const Dyadic& x, unsigned jmin,
                                          unsigned jmax)
{
    std::vector<std::vector<double>> sup(jmax + 1);
    sup[jmax].resize(d[jmax].size());
    for (std::size_t k = 0; k < d[jmax].size(); ++k) sup[jmax][k] = std::abs(d[jmax][k]);
    for (unsigned j = jmax; j-- > jmin;) {
        sup[j].resize(d[j].size());
        for (std::size_t k = 0; k < d[j].size(); ++k)
            sup[j][k] = std::max({std::abs(d[j][k]), sup[j + 1][2 * k], sup[j + 1][2 * k + 1]});
    }
    std::vector<double> out;
    for (unsigned j = jmin; j <= jmax; ++j) {
        Int kk = x.floor_scaled(j);
        long long n = (long long)d[j].size();
        long long k = std::min(kk.convert_to<long long>(), n - 1);
        double L = 0;
        for (long long t = k - 1; t <= k + 1; ++t)
            if (t >= 0 && t < n) L = std::max(L, sup[j][std::size_t(t)]);
        out.push_back(L > 0 ? std::log2(L) : -kInf);
    }
    return out;
}

inline double leader_exponent(const std::vector<std::vector<double>>& d, const Dyadic& x, unsigned jmin,
                              unsigned jmax, std::size_t window = 4)
{
    auto ly = leader_profile(d, x, jmin, jmax);
    if (std::isinf(ly.back())) return kInf;
    std::vector<double> lx;
    for (unsigned j = jmin; j <= jmax; ++j) lx.push_back(-double(j));
    return window_min_slope(lx, ly, window);
}

struct TransferRow {
    Dyadic x;
    double h_in = 0, h_out = 0;
};

struct TransferResult {
    std::vector<TransferRow> rows;
    LineFit fit;
    std::vector<double> signal;
};

template <class F>
TransferResult transfer_check(const F& f, const Rational& alpha, const Rational& beta, const std::vector<Dyadic>& pts,
                              const std::string& basis = "haar", unsigned jmax = 12, unsigned jmin = 4,
                              std::size_t window = 4)
{
    TransferResult r;
    if (pts.empty()) return r;
    auto c = measure_to_coeffs(f, alpha, beta, jmax);
    r.signal = synthesize(c, basis, jmax + 1);
    auto d = analyze_signal(r.signal, basis);
    std::vector<double> xs, ys;
    for (const auto& x : pts) {
        TransferRow row{x, measure_leader_exponent(f, x, jmin, jmax, window), leader_exponent(d, x, jmin, jmax, window)};
        r.rows.push_back(row);
        if (std::isfinite(row.h_in) && std::isfinite(row.h_out)) {
            xs.push_back(row.h_in);
            ys.push_back(row.h_out);
        }
    }
    r.fit = ls_fit(xs, ys);
    return r;
}

}  // namespace mf
