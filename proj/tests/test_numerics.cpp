#include "doctest.h"

#include "cil/modulus.hpp"

using namespace cil;

namespace {
Rational q(const char* s) { return Rational::parse(s); }
}

TEST_CASE("rational parsing and printing") {
    CHECK(q("2/4") == Rational(1, 2));
    CHECK(q("-3").str() == "-3");
    CHECK(q("6/4").str() == "3/2");
    CHECK_FALSE(Rational::try_parse("0.5").has_value());
    CHECK_FALSE(Rational::try_parse("1/0").has_value());
    CHECK(Rational::pow2(-3) == Rational(1, 8));
    CHECK(monus(Rational(1), Rational(3)) == Rational(0));
}

TEST_CASE("interval rules") {
    Interval a(Rational(0), Rational(1)), b(Rational(-1), Rational(2));
    CHECK((a + b).lo == Rational(-1));
    CHECK((a + b).hi == Rational(3));
    CHECK(a.scaled(Rational(-2)).lo == Rational(-2));
    CHECK(a.hull(b).hi == Rational(2));
    CHECK_THROWS(Interval(Rational(1), Rational(0)));
}

TEST_CASE("modulus evaluation oracles") {
    Modulus dd = Modulus::parse("r0+r1", 2);
    CHECK(dd.eval({q("1/2"), q("1/3")}) == q("5/6"));
    Modulus m = Modulus::parse("max(r0,2*r1)", 2);
    CHECK(m.eval({Rational(3), Rational(1)}) == Rational(3));
    CHECK(m.eval({Rational(0), Rational(0)}) == Rational(0));
    CHECK_THROWS(m.eval({Rational(-1), Rational(0)}));
    CHECK_THROWS(Modulus::parse("r2", 2));
}

TEST_CASE("modulus composition and index surgery") {
    Modulus m = Modulus::parse("r0+2*r1", 2);
    CHECK(m.substitute_zero(1).eval({Rational(1), Rational(5)}) == Rational(1));
    Modulus c = Modulus::compose(Modulus::parse("3*r0", 1), {Modulus::parse("r0+r1", 2)});
    CHECK(c.eval({Rational(1), Rational(2)}) == Rational(9));
    CHECK(Modulus::parse(m.str(), 2) == m);
}

TEST_CASE("universal weak modulus") {
    WeakModulus w = WeakModulus::universal({Modulus::parse("r0+r1", 2), Modulus::parse("r0", 1)});
    CHECK(w.truncation(1).eval({q("1/3")}) == q("1/3"));
    for (int n = 1; n <= 4; ++n) CHECK(w.truncation(n).eval(std::vector<Rational>(static_cast<std::size_t>(n))) == 0);
    // clause (iv) on a small grid
    std::vector<Rational> grid{Rational(0), q("1/4"), q("1/2"), Rational(1)};
    for (const auto& r : grid)
        for (const auto& s : grid)
            CHECK(w.truncation(1).eval({r}) + w.truncation(1).eval({s}) <= w.truncation(2).eval({r, s}));
    CHECK(coherence_violations(w, 8, grid, 2000).empty());
    CHECK_THROWS(WeakModulus::universal({}));
}
