#include "cil/rational.hpp"

#include <cctype>

namespace cil {

namespace {

bool valid_integer_text(std::string_view s) {
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Rational::Rational(long n, long d) {
    if (d == 0) throw std::domain_error("rational with zero denominator");
    v_ = mpq_class(n, d);
    v_.canonicalize();
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.is_zero()) throw std::domain_error("division by zero");
    v_ /= o.v_;
    return *this;
}

std::optional<Rational> Rational::try_parse(std::string_view text) {
    text = trim(text);
    auto slash = text.find('/');
    std::string_view num = text.substr(0, slash);
    std::string_view den = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);
    if (!valid_integer_text(num) || !valid_integer_text(den)) return std::nullopt;
    if (den.front() == '-' || den.front() == '+') return std::nullopt;
    std::string ns(num.front() == '+' ? num.substr(1) : num);
    mpz_class n(ns, 10), d(std::string(den), 10);
    if (d == 0) return std::nullopt;
    return Rational(mpq_class(n, d));
}

Rational Rational::parse(std::string_view text) {
    auto r = try_parse(text);
    if (!r) throw std::invalid_argument("bad rational literal '" + std::string(text) + "'");
    return *r;
}

Rational Rational::pow2(int e) {
    mpz_class p = 1;
    p <<= static_cast<unsigned>(e < 0 ? -e : e);
    return e < 0 ? Rational(mpq_class(mpz_class(1), p)) : Rational(mpq_class(p));
}

std::string Rational::str() const {
    if (v_.get_den() == 1) return v_.get_num().get_str();
    return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::size_t Rational::hash() const {
    std::size_t h = 0;
    const mpz_class& n = v_.get_num();
    const mpz_class& d = v_.get_den();
    for (int i = 0; i < static_cast<int>(mpz_size(n.get_mpz_t())); ++i)
        h = h * 1000003u ^ mpz_getlimbn(n.get_mpz_t(), i);
    h ^= static_cast<std::size_t>(sgn(n)) * 0x9e3779b97f4a7c15ULL;
    for (int i = 0; i < static_cast<int>(mpz_size(d.get_mpz_t())); ++i)
        h = h * 998244353u ^ mpz_getlimbn(d.get_mpz_t(), i);
    return h;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

const Rational& ExtRational::value() const {
    if (inf_) throw std::domain_error("value of infinite extended rational");
    return v_;
}

ExtRational operator+(const ExtRational& a, const ExtRational& b) {
    if (a.inf_ || b.inf_) return ExtRational::infinity();
    return ExtRational(a.v_ + b.v_);
}

ExtRational max(const ExtRational& a, const ExtRational& b) {
    if (a.inf_ || b.inf_) return ExtRational::infinity();
    return ExtRational(max(a.v_, b.v_));
}

ExtRational min(const ExtRational& a, const ExtRational& b) {
    if (a.inf_) return b;
    if (b.inf_) return a;
    return ExtRational(min(a.v_, b.v_));
}

bool operator==(const ExtRational& a, const ExtRational& b) {
    if (a.inf_ || b.inf_) return a.inf_ == b.inf_;
    return a.v_ == b.v_;
}

bool operator<(const ExtRational& a, const ExtRational& b) {
    if (a.inf_) return false;
    if (b.inf_) return true;
    return a.v_ < b.v_;
}

Interval::Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
    if (hi < lo) throw std::invalid_argument("interval with lo > hi: [" + lo.str() + "," + hi.str() + "]");
}

Interval Interval::scaled(const Rational& q) const {
    if (q.sign() >= 0) return {lo * q, hi * q};
    return {hi * q, lo * q};
}

Interval max(const Interval& a, const Interval& b) { return {max(a.lo, b.lo), max(a.hi, b.hi)}; }
Interval min(const Interval& a, const Interval& b) { return {min(a.lo, b.lo), min(a.hi, b.hi)}; }

}  // namespace cil
