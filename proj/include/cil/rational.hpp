#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cil {

// Exact rational scalar, always in lowest terms with positive denominator.
class Rational {
public:
    Rational() : v_(0) {}
    Rational(long n) : v_(n) {}  // NOLINT(google-explicit-constructor)
    Rational(int n) : v_(n) {}   // NOLINT(google-explicit-constructor)
    Rational(long n, long d);
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }

    // Accepts "p/q", "-p/q", "p". No decimals.
    static Rational parse(std::string_view text);
    static std::optional<Rational> try_parse(std::string_view text);
    static Rational pow2(int e);  // 2^e, e may be negative

    std::string str() const;
    const mpq_class& raw() const { return v_; }
    std::string num_str() const { return v_.get_num().get_str(); }
    std::string den_str() const { return v_.get_den().get_str(); }

    int sign() const { return sgn(v_); }
    bool is_zero() const { return sgn(v_) == 0; }
    bool is_integer() const { return v_.get_den() == 1; }
    double to_double() const { return v_.get_d(); }

    Rational operator-() const { return Rational(mpq_class(-v_)); }
    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

    std::size_t hash() const;

private:
    mpq_class v_;
};

inline Rational abs(const Rational& a) { return a.sign() < 0 ? -a : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }
inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
// a ∸ b
inline Rational monus(const Rational& a, const Rational& b) { return a > b ? a - b : Rational(0); }

std::ostream& operator<<(std::ostream& os, const Rational& r);

// Nonnegative extended value: a rational or +inf, absorbing under + and max.
class ExtRational {
public:
    ExtRational() = default;
    ExtRational(Rational v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)
    static ExtRational infinity() { ExtRational e; e.inf_ = true; return e; }

    bool is_infinite() const { return inf_; }
    const Rational& value() const;
    std::string str() const { return inf_ ? "inf" : v_.str(); }

    friend ExtRational operator+(const ExtRational& a, const ExtRational& b);
    friend ExtRational max(const ExtRational& a, const ExtRational& b);
    friend ExtRational min(const ExtRational& a, const ExtRational& b);
    friend bool operator==(const ExtRational& a, const ExtRational& b);
    friend bool operator<(const ExtRational& a, const ExtRational& b);
    friend bool operator<=(const ExtRational& a, const ExtRational& b) { return !(b < a); }

private:
    Rational v_;
    bool inf_ = false;
};

struct Interval {
    Rational lo, hi;

    Interval() = default;
    Interval(Rational l, Rational h);
    static Interval point(const Rational& v) { return {v, v}; }

    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
    bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
    Interval hull(const Interval& o) const { return {min(lo, o.lo), max(hi, o.hi)}; }
    Interval scaled(const Rational& q) const;
    Rational clamp(const Rational& v) const { return v < lo ? lo : (hi < v ? hi : v); }
    std::string str() const { return "[" + lo.str() + "," + hi.str() + "]"; }

    friend Interval operator+(const Interval& a, const Interval& b) { return {a.lo + b.lo, a.hi + b.hi}; }
    friend bool operator==(const Interval& a, const Interval& b) { return a.lo == b.lo && a.hi == b.hi; }
    friend bool operator!=(const Interval& a, const Interval& b) { return !(a == b); }
};

Interval max(const Interval& a, const Interval& b);
Interval min(const Interval& a, const Interval& b);

}  // namespace cil

template <>
struct std::hash<cil::Rational> {
    std::size_t operator()(const cil::Rational& r) const { return r.hash(); }
};
