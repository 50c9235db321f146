#include "doctest.h"

#include "cil/eval.hpp"
#include "cil/formula.hpp"

using namespace cil;

namespace {

Signature sig_p(const char* hi = "1") {
    Signature sig;
    sig.add_predicate({"P", 1, Modulus::parse("r0", 1), Interval(Rational(0), Rational::parse(hi))});
    return sig;
}

Formula parse(const std::string& text, const Signature& sig) {
    ParseContext ctx{&sig, universal_modulus(sig)};
    return parse_formula(text, ctx);
}

}  // namespace

TEST_CASE("atomic distance") {
    Signature sig = sig_p();
    Formula f = parse("d(x0,x1)", sig);
    CHECK(f->kind == FKind::Atomic);
    CHECK(f->bound.str() == "[0,1]");
    CHECK(f->modulus == Modulus::parse("r0+r1", 2));
}

TEST_CASE("family bounds") {
    Signature sig = sig_p();
    CHECK_NOTHROW(parse("supN[ d(x0,x1) ; min(d(x0,x1),1) ]", sig));
    Signature wide = sig_p("2");
    CHECK_THROWS_WITH(parse("supN[ P(x0) ; d(x0,x1) ]", wide), doctest::Contains("incompatible bounds"));
}

TEST_CASE("bound and modulus inference") {
    Signature sig = sig_p();
    CHECK(parse("d(x0,x1) + P(x0)", sig)->bound.str() == "[0,2]");
    Formula s = parse("sup x1. d(x0,x1)", sig);
    CHECK(s->modulus.eval({Rational(1, 3)}) == Rational(1, 3));
    CHECK(parse("-1*P(x0)", sig)->bound.str() == "[-1,0]");
}

TEST_CASE("parse/print round trip") {
    Signature sig = sig_p();
    ParseContext ctx{&sig, universal_modulus(sig)};
    for (const char* t : {"d(x0,x1)", "sup x1. (d(x0,x1) + P(x0))", "inf x0. sup x1. max(P(x0), 1/2*d(x0,x1))",
                          "supN<0,1>[ P(x0) ; 1/2*P(x0) ]", "tminus(P(x0), 1/3*1)", "dOmega(2; x0,x1; x2,x3)"}) {
        Formula f = parse_formula(t, ctx);
        Formula g = parse_formula(to_string(f), ctx);
        CHECK_MESSAGE(same(f, g), (std::string(t) + " => " + to_string(f) + " => " + to_string(g)));
    }
}

TEST_CASE("prenex rules") {
    Signature sig = sig_p();
    Formula f = prenex(parse("(sup x1. d(x0,x1)) + P(x0)", sig));
    CHECK(same(f, parse("sup x1. (d(x0,x1) + P(x0))", sig)));
    Formula g = prenex(parse("-2*(sup x1. d(x0,x1))", sig));
    CHECK(same(g, parse("inf x1. (-2*d(x0,x1))", sig)));
    Formula h = prenex(parse("0*(sup x1. d(x0,x1))", sig));
    CHECK(h->kind == FKind::Zero);
}

TEST_CASE("demorgan dual") {
    Signature sig = sig_p();
    CHECK(same(demorgan_dual(parse("sup x0. P(x0)", sig)), parse("inf x0. (-1*P(x0))", sig)));
    CHECK(same(demorgan_dual(parse("P(x0)", sig)), parse("-1*P(x0)", sig)));
    Formula fam = parse("infN<0,1>[ sup x0. P(x0) ; sup x0. 1/2*P(x0) ]", sig);
    Formula dual = demorgan_dual(fam);
    CHECK(dual->kind == FKind::SupN);
    CHECK_THROWS(demorgan_dual(parse("P(x0) + sup x1. d(x0,x1)", sig)));
}

TEST_CASE("quantifier rank") {
    Signature sig = sig_p();
    CHECK(quant_rank(parse("P(x0)", sig)).str() == "qf");
    CHECK(quant_rank(parse("sup x0. P(x0)", sig)).str() == "sup^1");
    CHECK(quant_rank(parse("inf x0. sup x1. d(x0,x1)", sig)).str() == "inf^2");
    CHECK(quant_rank(parse("inf x0. inf x1. d(x0,x1)", sig)).str() == "inf^1");
}

TEST_CASE("rename is capture avoiding") {
    Signature sig = sig_p();
    Formula f = parse("sup x1. d(x0,x1)", sig);
    Formula g = rename_free(f, {{0, 1}});
    CHECK(free_vars(g) == std::vector<int>{1});
    CHECK(g->kind == FKind::Sup);
    CHECK(g->var != 1);
}

TEST_CASE("regularize keeps constant one") {
    Signature sig = sig_p();
    WeakModulus w = universal_modulus(sig);
    Formula r = regularize(one(), w, Interval(Rational(0), Rational(1)), RegMode::Inf);
    CHECK(r->kind == FKind::One);
    Formula p = regularize(parse("P(x0)", sig), w, Interval(Rational(0), Rational(1)), RegMode::Inf);
    CHECK(p->modulus == w.truncation(1));
}
