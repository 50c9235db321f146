#include "doctest.h"

#include "cil/baf.hpp"
#include "fixtures.hpp"

using namespace cil;
using fixtures::named;
using fixtures::pair_p;
using fixtures::plain;

namespace {

BafConfig config_for(const MetricStructure& s, int depth, int len) {
    BafConfig cfg;
    cfg.omega = universal_modulus(s.signature());
    cfg.depth = depth;
    cfg.max_tuple_len = len;
    return cfg;
}

}  // namespace

TEST_CASE("diagonal pairs survive") {
    auto s = named("path3");
    auto set = baf_compute(s, s, config_for(s, 3, 2));
    for (int n = 0; n <= 2; ++n)
        for (const auto& a : all_tuples(s.size(), n)) CHECK(set.contains(a, a, s.size(), s.size()));
}

TEST_CASE("P00 against P01 loses the root at depth 1") {
    auto a = pair_p(0, 0), b = pair_p(0, 1);
    auto set = baf_compute(a, b, config_for(a, 1, 2));
    CHECK_FALSE(set.contains({}, {}, 2, 2));
    auto set0 = baf_compute(a, b, config_for(a, 0, 2));
    CHECK(set0.contains({}, {}, 2, 2));
}

TEST_CASE("relabeled metric spaces keep the root") {
    auto s = named("metric2");
    REQUIRE(s.size() == 3);
    auto r = relabel(s, {2, 0, 1});
    auto set = baf_compute(s, r, config_for(s, 3, 3));
    CHECK(set.contains({}, {}, 3, 3));
}

TEST_CASE("deeper sets are smaller") {
    auto a = named("path4"), b = named("star4");
    std::size_t prev = SIZE_MAX;
    for (int k = 0; k <= 3; ++k) {
        auto n = baf_compute(a, b, config_for(a, k, 3)).total();
        CHECK(n <= prev);
        prev = n;
    }
}

TEST_CASE("approx_iso_decide verdicts") {
    auto a = pair_p(0, 0), b = pair_p(0, 1);
    CHECK(approx_iso_decide(a, a, config_for(a, 3, 2)).yes);
    auto v = approx_iso_decide(a, b, config_for(a, 3, 2));
    REQUIRE_FALSE(v.yes);
    CHECK(v.depth == 1);
    REQUIRE(v.sentence);
    CHECK(v.sentence->kind == FKind::Inf);
    CHECK(v.sentence->kids.front()->kind == FKind::SupN);
    CHECK(v.sentence->free == 0);
    CHECK(v.value_a == eval(v.sentence, a, {}));
    CHECK(v.value_b == eval(v.sentence, b, {}));
    CHECK(abs(v.value_a - v.value_b) >= Rational(1, 2));
    CHECK_FALSE(v.witness.empty());
}

TEST_CASE("extract_iso oracles") {
    auto a = pair_p(0, 0), b = pair_p(0, 1);
    auto self = extract_iso(a, a);
    CHECK(self.isomorphism());
    CHECK(self.bijection == Perm{0, 1});
    auto c = named("cycle4"), cr = named("cycle4-relabeled");
    CHECK(extract_iso(c, cr).isomorphism());
    auto bad = extract_iso(a, b);
    CHECK(bad.found);
    CHECK(bad.discrepancy == 1);
}

TEST_CASE("k_set oracles") {
    auto tri = plain(3);
    auto om = universal_modulus(tri.signature());
    OrbitAnalyzer an(tri, om);
    OrbitPredicates preds = [&](const std::vector<int>& a) { return an.synthesize(a).predicate; };
    auto rep = k_set(tri, preds, Rational(1, 2), 2, om);
    CHECK(rep.ok());
    for (int n = 0; n <= 1; ++n) CHECK(rep.set.pairs[n].size() == all_tuples(3, n).size() * all_tuples(3, n).size());
    // length 2: repeated and distinct pairs fall in different orbits
    for (const auto& a : all_tuples(3, 2))
        for (const auto& b : all_tuples(3, 2)) CHECK(rep.set.contains(a, b, 3, 3) == ((a[0] == a[1]) == (b[0] == b[1])));

    auto p = named("path3");
    auto omp = universal_modulus(p.signature());
    OrbitAnalyzer ap(p, omp);
    OrbitPredicates pp = [&](const std::vector<int>& a) { return ap.synthesize(a).predicate; };
    auto rp = k_set(p, pp, Rational(1, 4), 2, omp);
    CHECK(rp.ok());
    for (int n = 0; n <= 2; ++n)
        for (const auto& a : all_tuples(3, n)) {
            CHECK(rp.set.contains(a, a, 3, 3));
            for (const auto& b : all_tuples(3, n))
                CHECK(rp.set.contains(a, b, 3, 3) == rp.set.contains(b, a, 3, 3));
        }
}

TEST_CASE("brute force oracle") {
    CHECK(brute_force_isomorphic(named("random1"), named("random1-relabeled")));
    CHECK_FALSE(brute_force_isomorphic(named("path4"), named("star4")));
    CHECK_FALSE(brute_force_isomorphic(pair_p(0, 0), pair_p(0, 1)));
}
