#include "doctest.h"

#include "cil/orbit.hpp"
#include "fixtures.hpp"

#include <algorithm>

using namespace cil;
using fixtures::named;
using fixtures::pair_p;
using fixtures::plain;

TEST_CASE("automorphism group sizes") {
    CHECK(automorphisms(plain(3)).size() == 6);
    CHECK(automorphisms(pair_p(0, 1)).size() == 1);
    CHECK(automorphisms(plain(1)).size() == 1);
    CHECK(automorphisms(named("cycle4")).size() == 8);
    auto g = automorphisms(plain(3));
    CHECK(g.elements.front() == Perm{0, 1, 2});
}

TEST_CASE("orbit distance oracles") {
    auto tri = plain(3);
    auto om = universal_modulus(tri.signature());
    auto g = automorphisms(tri);
    for (int a = 0; a < 3; ++a)
        for (const auto& v : orbit_distance(tri, g, {a}, om)) CHECK(v.is_zero());

    auto p = pair_p(0, 1);
    auto omp = universal_modulus(p.signature());
    auto gp = automorphisms(p);
    auto d = orbit_distance(p, gp, {0}, omp);
    CHECK(d[0].is_zero());
    CHECK(d[1] == omp.eval({Rational(1)}));
}

TEST_CASE("fragment ordering and restriction") {
    auto s = named("path3");
    auto om = universal_modulus(s.signature());
    Fragment fr = generate_fragment(s, 1, om, FragmentOptions{});
    REQUIRE_FALSE(fr.empty());
    CHECK(fr.front().label.rfind("diagram", 0) == 0);
    for (const auto& e : restrict_sup(fr, 1)) CHECK(e.rank.sup_level <= 1);
    for (const auto& e : restrict_inf(fr, 1)) CHECK(e.rank.inf_level <= 1);
    FragmentOptions no_diag;
    no_diag.diagrams = false;
    for (const auto& e : generate_fragment(s, 1, om, no_diag)) CHECK(e.label.rfind("diagram", 0) != 0);
}

TEST_CASE("fragment formulas respect their moduli") {
    for (const char* name : {"pair-P01", "path3", "triangle-P", "metric-f9"}) {
        auto s = named(name);
        auto om = universal_modulus(s.signature());
        for (int n = 0; n <= 2; ++n)
            for (const auto& e : generate_fragment(s, n, om, FragmentOptions{})) {
                INFO(name << " " << e.label);
                CHECK(audit_modulus(e.formula, s).empty());
            }
    }
}

TEST_CASE("orbit synthesis oracles") {
    auto p = pair_p(0, 1);
    OrbitAnalyzer an(p, universal_modulus(p.signature()));
    const auto& sy = an.synthesize({0});
    REQUIRE(sy.ok);
    CHECK(eval(sy.psi, p, {0}).is_zero());
    CHECK(eval(sy.psi, p, {1}) > 0);
    CHECK(sy.zero_set_exact);
    CHECK(sy.delta_ok);

    auto tri = plain(3);
    OrbitAnalyzer at(tri, universal_modulus(tri.signature()));
    const auto& whole = at.synthesize({1});
    REQUIRE(whole.ok);
    CHECK(whole.separators.empty());
    for (int b = 0; b < 3; ++b) CHECK(eval(whole.psi, tri, {b}).is_zero());
}

TEST_CASE("zero sets equal orbits on corpus structures") {
    for (const char* name : {"path4", "cycle4", "star4", "metric-f10"}) {
        auto s = named(name);
        OrbitAnalyzer an(s, universal_modulus(s.signature()));
        for (int n = 1; n <= 2; ++n)
            for (const auto& a : an.representatives(n)) {
                const auto& sy = an.synthesize(a);
                INFO(name << " " << s.tuple_str(a));
                REQUIRE(sy.ok);
                Evaluator ev(s);
                auto members = orbit_members(an.group(), a);
                auto rows = all_tuples(s.size(), n);
                for (const auto& b : rows) {
                    bool in = std::binary_search(members.begin(), members.end(), b);
                    CHECK(ev.eval_tuple(sy.psi, b).is_zero() == in);
                }
            }
    }
}

TEST_CASE("scott sentences vanish on their structure and separate") {
    auto three = plain(3), two = plain(2);
    OrbitAnalyzer a3(three, universal_modulus(three.signature()));
    auto art = scott_sentence(a3, 2, 2);
    REQUIRE(art.ok);
    for (const auto& sn : art.sentences) CHECK(eval(sn, three, {}).is_zero());
    bool separated = false;
    for (const auto& sn : art.sentences) separated = separated || eval(sn, two, {}) > 0;
    CHECK(separated);

    auto c4 = named("cycle4"), c4r = named("cycle4-relabeled");
    OrbitAnalyzer ac(c4, universal_modulus(c4.signature()));
    auto cart = scott_sentence(ac, 2, 2);
    REQUIRE(cart.ok);
    CHECK(eval(cart.sentence, c4, {}).is_zero());
    CHECK(eval(cart.sentence, c4r, {}).is_zero());
}

TEST_CASE("scott sentences with a function symbol") {
    // f has modulus 2*r0, so raw atoms outgrow the orbit distance
    auto s = named("metric-f11");
    OrbitAnalyzer an(s, universal_modulus(s.signature()));
    int level = std::max(scott_rank(an, 2, 3).rank, 1);
    auto art = scott_sentence(an, 2, level);
    REQUIRE(art.ok);
    for (const auto& sn : art.sentences) CHECK(eval(sn, s, {}).is_zero());
}

TEST_CASE("longer sentences see extra points") {
    auto a = named("pair-edge"), b = named("triangle");
    OrbitAnalyzer an(a, universal_modulus(a.signature()));
    auto short_art = scott_sentence(an, 2, 2);
    REQUIRE(short_art.ok);
    for (const auto& sn : short_art.sentences) CHECK(eval(sn, b, {}).is_zero());
    auto long_art = scott_sentence(an, 3, 2);
    REQUIRE(long_art.ok);
    CHECK(eval(long_art.sentence, b, {}) > 0);
    CHECK(eval(long_art.sentence, a, {}).is_zero());
}

TEST_CASE("scott rank oracles") {
    auto tri = plain(3);
    OrbitAnalyzer at(tri, universal_modulus(tri.signature()));
    CHECK(scott_rank(at, 2, 3).rank == 1);
    auto p = pair_p(0, 1);
    OrbitAnalyzer ap(p, universal_modulus(p.signature()));
    CHECK(scott_rank(ap, 2, 3).rank == 1);
}
