#include "doctest.h"

#include "cil/baf.hpp"
#include "cil/orbit.hpp"
#include "cil/types.hpp"
#include "fixtures.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <random>
#include <sstream>

using namespace cil;

namespace {

std::uint64_t seed() {
    if (const char* s = std::getenv("CILWB_SEED")) return std::strtoull(s, nullptr, 10);
    return 20261015;
}

int uni(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// distances in [1/2,1] keep the triangle inequality; P moves by at most 1/2
MetricStructure random_metric(std::mt19937_64& rng, int n) {
    static const char* ds[] = {"1/2", "3/4", "1"};
    static const char* ps[] = {"0", "1/4", "1/2"};
    std::ostringstream o;
    o << R"({"signature":{"predicates":[{"name":"P","arity":1,"modulus":"r0"},{"name":"E","arity":2,"modulus":"r0+r1"}]},"points":[)";
    for (int i = 0; i < n; ++i) o << (i ? "," : "") << "\"p" << i << "\"";
    std::vector<std::vector<std::string>> d(n, std::vector<std::string>(n, "0"));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d[i][j] = d[j][i] = ds[uni(rng, 0, 2)];
    o << "],\"distance\":[";
    for (int i = 0; i < n; ++i) {
        o << (i ? "," : "") << "[";
        for (int j = 0; j < n; ++j) o << (j ? "," : "") << "\"" << d[i][j] << "\"";
        o << "]";
    }
    o << "],\"predicates\":{\"P\":{";
    for (int i = 0; i < n; ++i) o << (i ? "," : "") << "\"(p" << i << ")\":\"" << ps[uni(rng, 0, 2)] << "\"";
    o << "},\"E\":{";
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            o << (i || j ? "," : "") << "\"(p" << i << ",p" << j << ")\":\"" << (uni(rng, 0, 1) ? "1/2" : "0") << "\"";
    o << "}}}";
    auto r = load_structure_text(o.str());
    REQUIRE(r.report.empty());
    return r.structure;
}

MetricStructure random_discrete(std::mt19937_64& rng, int n) {
    std::vector<std::string> pts;
    for (int i = 0; i < n; ++i) pts.push_back("v" + std::to_string(i));
    std::vector<int> p(n), e(n * n);
    for (auto& v : p) v = uni(rng, 0, 1);
    for (auto& v : e) v = uni(rng, 0, 3) == 0 ? 0 : 1;
    return encode_discrete({pts, {{"P", 1, p}, {"E", 2, e}}});
}

std::vector<Rational> random_vec(std::mt19937_64& rng, int n) {
    std::vector<Rational> v;
    for (int i = 0; i < n; ++i) v.push_back(Rational(uni(rng, 0, 8), 8));
    return v;
}

// folds nested scalings so double negation compares by tree equality
Formula fold_scales(const Formula& f) {
    switch (f->kind) {
    case FKind::Scale: {
        Rational q = f->q;
        Formula k = f->kids[0];
        while (k->kind == FKind::Scale) {
            q = q * k->q;
            k = k->kids[0];
        }
        k = fold_scales(k);
        return q == Rational(1) ? k : scale(q, k);
    }
    case FKind::Sum: return sum(fold_scales(f->kids[0]), fold_scales(f->kids[1]));
    case FKind::Max: return fmax(fold_scales(f->kids[0]), fold_scales(f->kids[1]));
    case FKind::Min: return fmin(fold_scales(f->kids[0]), fold_scales(f->kids[1]));
    case FKind::Sup: return sup(f->var, fold_scales(f->kids[0]));
    case FKind::Inf: return inf(f->var, fold_scales(f->kids[0]));
    case FKind::SupN:
    case FKind::InfN: {
        std::vector<Formula> kids;
        for (const auto& k : f->kids) kids.push_back(fold_scales(k));
        return f->kind == FKind::SupN ? sup_family(std::move(kids), f->bound) : inf_family(std::move(kids), f->bound);
    }
    default: return f;
    }
}

}  // namespace

TEST_CASE("moduli vanish at zero, are monotone and subadditive") {
    std::mt19937_64 rng(seed());
    std::vector<Modulus> ms;
    auto s = random_metric(rng, 3);
    auto om = universal_modulus(s.signature());
    for (int n = 1; n <= 4; ++n) ms.push_back(om.truncation(n));
    for (const char* t : {"r0", "2*r0+r1", "max(r0,1/2*r1)", "r0+r1+r2"}) ms.push_back(Modulus::parse(t, 3));
    for (const auto& m : ms)
        for (int it = 0; it < 50; ++it) {
            auto r = random_vec(rng, m.arity()), d = random_vec(rng, m.arity());
            std::vector<Rational> rs(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) rs[i] = r[i] + d[i];
            INFO(m.str());
            CHECK(m.eval(std::vector<Rational>(m.arity(), Rational(0))).is_zero());
            CHECK(m.eval(r) <= m.eval(rs));
            CHECK(m.eval(rs) <= m.eval(r) + m.eval(d));
        }
}

TEST_CASE("random formulas: bounds, moduli, prenex, dual") {
    std::mt19937_64 rng(seed() + 1);
    for (int round = 0; round < 12; ++round) {
        auto s = random_metric(rng, uni(rng, 2, 3));
        auto om = universal_modulus(s.signature());
        FormulaGenOptions opt;
        opt.depth = 3;
        opt.domega = true;
        for (int k = 0; k < 8; ++k) {
            Formula f = random_formula(s.signature(), om, rng, opt);
            INFO(to_string(f));
            auto tab = eval_all(f, s);
            for (const auto& v : tab.values) CHECK(f->bound.contains(v));
            CHECK(audit_modulus(f, s).empty());
            Formula p = prenex(f);
            CHECK(is_prenex(p));
            CHECK(eval_all(p, s).values == tab.values);
            CHECK(quant_rank(p).level <= quant_rank(f).level);
            auto dual = eval_all(demorgan_dual(p), s);
            for (std::size_t i = 0; i < tab.values.size(); ++i) CHECK(dual.values[i] == -tab.values[i]);
            CHECK(same(fold_scales(demorgan_dual(demorgan_dual(p))), fold_scales(p)));
        }
    }
}

TEST_CASE("quantifier exchange with finite families") {
    std::mt19937_64 rng(seed() + 2);
    for (int round = 0; round < 10; ++round) {
        auto s = random_metric(rng, 3);
        auto om = universal_modulus(s.signature());
        FormulaGenOptions opt;
        opt.depth = 2;
        opt.max_free = 2;
        std::vector<Formula> kids, inner_inf, inner_sup;
        for (int k = 0; k < 3; ++k) {
            Formula f = random_formula(s.signature(), om, rng, opt);
            kids.push_back(f);
            inner_inf.push_back(inf(0, f));
            inner_sup.push_back(sup(0, f));
        }
        Formula a = inf(0, inf_family_hull(kids)), b = inf_family_hull(inner_inf);
        Formula c = sup(0, sup_family_hull(kids)), d = sup_family_hull(inner_sup);
        for (const auto& t : all_tuples(s.size(), 2)) {
            Assignment asg = {-1, t[0], t[1]};
            CHECK(eval(a, s, asg) == eval(b, s, asg));
            CHECK(eval(c, s, asg) == eval(d, s, asg));
        }
    }
}

TEST_CASE("discrete encoding agrees with classical truth") {
    std::mt19937_64 rng(seed() + 3);
    for (int round = 0; round < 10; ++round) {
        int n = uni(rng, 2, 4);
        std::vector<int> p(n), e(n * n);
        for (auto& v : p) v = uni(rng, 0, 1);
        for (auto& v : e) v = uni(rng, 0, 1);
        std::vector<std::string> pts;
        for (int i = 0; i < n; ++i) pts.push_back("v" + std::to_string(i));
        auto s = encode_discrete({pts, {{"P", 1, p}, {"E", 2, e}}});
        // exists y. E(x,y) and P(y)
        Formula f = fixtures::parse("inf x1. max(E(x0,x1), P(x1))", s);
        for (int x = 0; x < n; ++x) {
            bool truth = false;
            for (int y = 0; y < n; ++y) truth = truth || (e[x * n + y] == 0 && p[y] == 0);
            CHECK(eval(f, s, {x}).is_zero() == truth);
        }
    }
}

TEST_CASE("encoding preserves isomorphism and back-and-forth is monotone") {
    std::mt19937_64 rng(seed() + 4);
    for (int round = 0; round < 12; ++round) {
        int n = uni(rng, 2, 3);
        auto a = random_discrete(rng, n);
        MetricStructure b = uni(rng, 0, 1) ? relabel(a, [&] {
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            return perm;
        }())
                                           : random_discrete(rng, n);
        bool iso = brute_force_isomorphic(a, b);
        CHECK(extract_iso(a, b).isomorphism() == iso);

        BafConfig cfg;
        cfg.omega = universal_modulus(a.signature());
        cfg.max_tuple_len = n;
        std::size_t prev = SIZE_MAX;
        for (int k = 0; k <= 3; ++k) {
            cfg.depth = k;
            auto set = baf_compute(a, b, cfg);
            CHECK(set.total() <= prev);
            prev = set.total();
            if (iso) CHECK(set.contains({}, {}, n, n));
        }
        cfg.depth = 2;
        cfg.t = Rational(1, 4);
        auto lo = baf_compute(a, b, cfg);
        cfg.t = Rational(3, 4);
        auto hi = baf_compute(a, b, cfg);
        for (std::size_t len = 0; len < lo.pairs.size(); ++len)
            for (const auto& pr : lo.pairs[len]) CHECK(hi.pairs[len].count(pr) == 1);

        cfg.depth = n * n;
        cfg.t = Rational(1, 2);
        auto v = approx_iso_decide(a, b, cfg);
        CHECK(v.yes == iso);
        if (!v.yes) CHECK(abs(eval(v.sentence, a, {}) - eval(v.sentence, b, {})) >= cfg.t);
    }
}

TEST_CASE("orbit formulas are nonnegative and vanish on their tuple") {
    std::mt19937_64 rng(seed() + 5);
    for (int round = 0; round < 6; ++round) {
        auto s = round % 2 ? random_metric(rng, 3) : random_discrete(rng, 4);
        OrbitAnalyzer an(s, universal_modulus(s.signature()));
        for (int n = 1; n <= 2; ++n)
            for (const auto& a : an.representatives(n)) {
                const auto& sy = an.synthesize(a);
                REQUIRE(sy.ok);
                auto tab = eval_all(sy.psi, s);
                CHECK(eval(sy.psi, s, a).is_zero());
                for (const auto& v : tab.values) CHECK(v.sign() >= 0);
            }
    }
}

TEST_CASE("theta zero set is the eps-ball of the realizers") {
    std::mt19937_64 rng(seed() + 6);
    for (int round = 0; round < 8; ++round) {
        auto s = random_metric(rng, 3);
        auto om = universal_modulus(s.signature());
        FormulaGenOptions opt;
        opt.depth = 2;
        opt.max_free = 1;
        Formula psi = random_formula(s.signature(), om, rng, opt);
        if (psi->width > 1) continue;
        Formula dt = tuple_distance_formula(om, 1);
        for (int anchor = 0; anchor < 3; ++anchor) {
            Rational r = eval(psi, s, {anchor});
            if (!(psi->bound.lo < r)) r = psi->bound.hi;
            for (const auto& eps : eps_ladder(3)) {
                Formula th = theta(psi, r, eps, om, 1);
                for (int x = 0; x < 3; ++x) {
                    bool ball = false;
                    for (int y = 0; y < 3; ++y) ball = ball || (eval(dt, s, {x, y}) <= eps && eval(psi, s, {y}) == r);
                    CHECK(eval(th, s, {x}).is_zero() == ball);
                }
            }
        }
    }
}

TEST_CASE("find_support results pass check_support") {
    std::mt19937_64 rng(seed() + 7);
    for (int round = 0; round < 4; ++round) {
        auto s = random_metric(rng, 3);
        auto om = universal_modulus(s.signature());
        OrbitAnalyzer an(s, om);
        for (const auto& a : all_tuples(3, 1)) {
            auto ty = fragment_type(s, a, an.fragment(1));
            auto sr = find_support(s, ty, an.fragment(1), om, 4, 0, &an.fragment_values(1));
            REQUIRE(sr.found);
            CHECK(check_support(s, ty, sr.predicate, om, eps_ladder(4)).ok);
            CHECK(eval(sr.predicate, s, a).is_zero());
        }
    }
}

TEST_CASE("henkin chains are monotone and satisfiable") {
    std::mt19937_64 rng(seed() + 8);
    for (int round = 0; round < 4; ++round) {
        auto s = round % 2 ? random_metric(rng, 3) : random_discrete(rng, 3);
        auto h = henkin_run(ConditionSet{}, {}, s, 6);
        CHECK(h.monotone);
        CHECK(h.satisfiable);
        CHECK(h.max_error <= Rational::pow2(-5));
    }
}
