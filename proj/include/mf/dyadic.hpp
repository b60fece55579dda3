#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace mf {

using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::rational_adaptor<boost::multiprecision::cpp_int_backend<>>, boost::multiprecision::et_off>;

inline Int pow2i(unsigned e) { return Int(1) << e; }

inline Int ipow(Int b, unsigned e)
{
    Int r = 1;
    while (e) {
        if (e & 1u) r *= b;
        b *= b;
        e >>= 1;
    }
    return r;
}

inline Rational rpow(const Rational& b, unsigned e)
{
    return Rational(ipow(numerator(b), e), ipow(denominator(b), e));
}

inline Int floor_div(const Int& a, const Int& b)
{
    Int q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

inline Int rfloor(const Rational& r) { return floor_div(numerator(r), denominator(r)); }
inline Int rceil(const Rational& r) { return -floor_div(-numerator(r), denominator(r)); }

// log2 of a positive integer without overflow
inline double log2i(const Int& v)
{
    if (v <= 0) return -std::numeric_limits<double>::infinity();
    unsigned m = boost::multiprecision::msb(v);
    if (m < 60) return std::log2(v.convert_to<double>());
    Int top = v >> (m - 60);
    return std::log2(top.convert_to<double>()) + double(m - 60);
}

inline double log2r(const Rational& r)
{
    if (r <= 0) return -std::numeric_limits<double>::infinity();
    return log2i(numerator(r)) - log2i(denominator(r));
}

inline double to_double(const Rational& r)
{
    if (r == 0) return 0.0;
    double s = r < 0 ? -1.0 : 1.0;
    Rational a = r < 0 ? Rational(-r) : r;
    return s * std::exp2(log2r(a));
}

inline std::string rstr(const Rational& r)
{
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline Int parse_int(const std::string& s)
{
    std::size_t b = !s.empty() && (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (b == s.size()) throw std::invalid_argument("bad integer '" + s + "'");
    for (std::size_t i = b; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("bad integer '" + s + "'");
    return Int(s[0] == '+' ? s.substr(1) : s);
}

// accepts "p/q", "p", or a terminating decimal "0.35"
inline Rational parse_rational(const std::string& s)
{
    if (s.empty()) throw std::invalid_argument("empty rational");
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Int p = parse_int(s.substr(0, slash)), q = parse_int(s.substr(slash + 1));
        if (q == 0) throw std::invalid_argument("zero denominator in " + s);
        return Rational(p, q);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(parse_int(s));
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (neg) ip = ip.substr(1);
    if (ip.empty()) ip = "0";
    for (char c : ip + fp)
        if (c < '0' || c > '9') throw std::invalid_argument("bad rational " + s);
    Int den = ipow(10, unsigned(fp.size()));
    Rational r(Int(ip) * den + (fp.empty() ? Int(0) : Int(fp)), den);
    return neg ? Rational(-r) : r;
}

// decimal when terminating with few digits, else p/q
inline std::string rpretty(const Rational& r)
{
    Int d = denominator(r);
    unsigned twos = 0, fives = 0;
    while (d % 2 == 0) { d /= 2; ++twos; }
    while (d % 5 == 0) { d /= 5; ++fives; }
    unsigned digits = std::max(twos, fives);
    if (d != 1 || digits > 8) return rstr(r);
    if (digits == 0) return numerator(r).str();
    Int scaled = numerator(r * Rational(ipow(10, digits)));
    bool neg = scaled < 0;
    if (neg) scaled = -scaled;
    std::string t = scaled.str();
    while (t.size() <= digits) t = "0" + t;
    std::string out = t.substr(0, t.size() - digits) + "." + t.substr(t.size() - digits);
    while (out.back() == '0') out.pop_back();
    return (neg ? "-" : "") + out;
}

// num / 2^exp in canonical form
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(long long v) : num_(v) {}
    Dyadic(const Int& v) : num_(v) {}

    static Dyadic make(Int num, unsigned exp)
    {
        Dyadic d;
        d.num_ = std::move(num);
        d.exp_ = exp;
        d.normalize();
        return d;
    }
    // 2^e for any sign of e
    static Dyadic pow2(long long e)
    {
        if (e >= 0) return Dyadic(pow2i(unsigned(e)));
        return make(1, unsigned(-e));
    }

    const Int& num() const { return num_; }
    unsigned exp() const { return exp_; }
    bool is_zero() const { return num_ == 0; }
    int sign() const { return num_.sign(); }

    Dyadic shifted(long long s) const
    {
        if (s >= 0) {
            if (unsigned(s) <= exp_) return make(num_, exp_ - unsigned(s));
            return make(num_ << unsigned(s - exp_), 0);
        }
        return make(num_, exp_ + unsigned(-s));
    }

    // floor(x * 2^j)
    Int floor_scaled(unsigned j) const
    {
        if (j >= exp_) return num_ << (j - exp_);
        unsigned sh = exp_ - j;
        if (num_ >= 0) return num_ >> sh;
        Int a = -num_;
        Int q = a >> sh;
        if ((q << sh) != a) ++q;
        return -q;
    }

    Rational to_rational() const { return Rational(num_, pow2i(exp_)); }
    operator Rational() const { return to_rational(); }

    double to_double() const
    {
        if (num_ == 0) return 0.0;
        Int a = num_ < 0 ? Int(-num_) : num_;
        unsigned m = boost::multiprecision::msb(a);
        long long sh = 0;
        if (m > 60) { sh = m - 60; a >>= unsigned(sh); }
        double v = std::ldexp(a.convert_to<double>(), int(sh - (long long)exp_));
        return num_ < 0 ? -v : v;
    }

    std::string str() const { return num_.str() + "/2^" + std::to_string(exp_); }

    static Dyadic parse(const std::string& s)
    {
        auto p = s.find("/2^");
        if (p == std::string::npos) {
            if (s.find('/') != std::string::npos) {
                Rational r = parse_rational(s);
                Dyadic d;
                if (!from_rational(r, d)) throw std::invalid_argument("not dyadic: " + s);
                return d;
            }
            return Dyadic(parse_int(s));
        }
        Int e = parse_int(s.substr(p + 3));
        if (e < 0 || e > 1000000) throw std::invalid_argument("bad exponent in " + s);
        return make(parse_int(s.substr(0, p)), e.convert_to<unsigned>());
    }

    static bool from_rational(const Rational& r, Dyadic& out)
    {
        Int den = denominator(r);
        if (den <= 0) return false;
        unsigned m = boost::multiprecision::msb(den);
        if (den != pow2i(m)) return false;
        out = make(numerator(r), m);
        return true;
    }

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b)
    {
        if (a.exp_ == b.exp_) return make(a.num_ + b.num_, a.exp_);
        if (a.exp_ > b.exp_) return make(a.num_ + (b.num_ << (a.exp_ - b.exp_)), a.exp_);
        return make((a.num_ << (b.exp_ - a.exp_)) + b.num_, b.exp_);
    }
    friend Dyadic operator-(const Dyadic& a) { return make(-a.num_, a.exp_); }
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b) { return make(a.num_ * b.num_, a.exp_ + b.exp_); }
    Dyadic& operator+=(const Dyadic& o) { return *this = *this + o; }
    Dyadic& operator-=(const Dyadic& o) { return *this = *this - o; }
    Dyadic& operator*=(const Dyadic& o) { return *this = *this * o; }

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.exp_ == b.exp_ && a.num_ == b.num_; }
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b)
    {
        int c;
        if (a.exp_ == b.exp_) c = a.num_.compare(b.num_);
        else if (a.exp_ > b.exp_) c = a.num_.compare(Int(b.num_ << (a.exp_ - b.exp_)));
        else c = Int(a.num_ << (b.exp_ - a.exp_)).compare(b.num_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

private:
    void normalize()
    {
        if (num_ == 0) { exp_ = 0; return; }
        if (exp_ == 0) return;
        Int a = num_ < 0 ? Int(-num_) : num_;
        unsigned tz = boost::multiprecision::lsb(a);
        unsigned s = std::min(tz, exp_);
        if (s) { num_ >>= s; exp_ -= s; }
    }

    Int num_ = 0;
    unsigned exp_ = 0;
};

inline Rational operator*(const Rational& r, const Dyadic& d) { return r * d.to_rational(); }

inline int cmp(const Dyadic& a, const Rational& b)
{
    // a.num * den(b) vs num(b) * 2^exp
    Int l = a.num() * denominator(b);
    Int r = numerator(b) << a.exp();
    return l < r ? -1 : (l > r ? 1 : 0);
}

inline double log2d(const Dyadic& d)
{
    if (d.sign() <= 0) return -std::numeric_limits<double>::infinity();
    return log2i(d.num()) - double(d.exp());
}

// [k 2^-j, (k+1) 2^-j)
struct DyadicInterval {
    unsigned j = 0;
    Int k = 0;
    Dyadic left() const { return Dyadic::make(k, j); }
    Dyadic right() const { return Dyadic::make(k + 1, j); }
    Dyadic length() const { return Dyadic::pow2(-(long long)j); }
};

inline DyadicInterval interval(unsigned j, const Int& k)
{
    if (k < 0 || k >= pow2i(j))
        throw std::out_of_range("dyadic index k=" + k.str() + " out of range for j=" + std::to_string(j));
    return {j, k};
}

// j/alpha as an integer, or throw
inline unsigned stretch_generation(unsigned j, const Rational& alpha)
{
    if (alpha <= 0 || alpha > 1) throw std::invalid_argument("alpha must lie in (0,1], got " + rstr(alpha));
    Rational m = Rational(j) / alpha;
    if (denominator(m) != 1)
        throw std::invalid_argument("j/alpha = " + rstr(m) + " is not an integer (j=" + std::to_string(j) +
                                    ", alpha=" + rstr(alpha) + ")");
    return numerator(m).convert_to<unsigned>();
}

// [ (k+1)2^-j - 2^-(j/alpha), (k+1)2^-j ]
struct StretchedInterval {
    DyadicInterval parent;
    Rational alpha;
    unsigned m = 0;  // j/alpha
    Dyadic left() const { return parent.right() - Dyadic::pow2(-(long long)m); }
    Dyadic right() const { return parent.right(); }
    Dyadic length() const { return Dyadic::pow2(-(long long)m); }
};

inline StretchedInterval stretched_interval(unsigned j, const Int& k, const Rational& alpha)
{
    StretchedInterval s;
    s.parent = interval(j, k);
    s.alpha = alpha;
    s.m = stretch_generation(j, alpha);
    return s;
}

}  // namespace mf
