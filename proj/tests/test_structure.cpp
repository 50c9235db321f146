#include "doctest.h"

#include "cil/corpus.hpp"
#include "cil/structure.hpp"

using namespace cil;

namespace {

const char* kTwoPoint = R"J({
  "signature": {"predicates": [{"name": "P", "arity": 1, "modulus": "r0"}]},
  "points": ["a", "b"],
  "distance": [["0", "DAB"], ["DAB", "0"]],
  "predicates": {"P": {"(a)": "0", "(b)": "1"}}
})J";

std::string two_point(const std::string& dab) {
    std::string t = kTwoPoint;
    for (auto pos = t.find("DAB"); pos != std::string::npos; pos = t.find("DAB")) t.replace(pos, 3, dab);
    return t;
}

bool has_message(const std::vector<Violation>& v, const std::string& needle) {
    for (const auto& x : v)
        if (x.message.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("two-point discrete structure is valid") {
    auto r = load_structure_text(two_point("1"));
    CHECK(r.report.empty());
    CHECK(r.structure.size() == 2);
}

TEST_CASE("modulus violation message") {
    auto r = load_structure_text(two_point("1/2"));
    REQUIRE_FALSE(r.report.empty());
    CHECK(has_message(r.report, "modulus: |P(a)-P(b)|=1 > Delta_P(1/2)=1/2"));
}

TEST_CASE("singleton and asymmetric documents") {
    auto one = load_structure_text(R"({"points": ["p"]})");
    CHECK(one.report.empty());
    CHECK(one.structure.size() == 1);
    auto bad = load_structure_text(R"({"points": ["a","b"], "distance": [["0","1"],["1/2","0"]]})");
    CHECK(has_message(bad.report, "distance not symmetric at (a,b)"));
}

TEST_CASE("parse errors name the field") {
    CHECK_THROWS_WITH_AS(load_structure_text(R"({"points": ["a","b"], "distance": [["0","x"],["1","0"]]})"),
                         doctest::Contains("distance[0][1]"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(load_structure_text("{\n\"points\": [\n"), doctest::Contains("line"), std::invalid_argument);
}

TEST_CASE("save/load round trip") {
    auto r = load_structure_text(two_point("1"));
    auto back = load_structure_text(save_structure(r.structure));
    CHECK(back.structure == r.structure);
    CHECK(save_structure(back.structure) == save_structure(r.structure));
}

TEST_CASE("encode_discrete") {
    DiscreteEncoding plain{{"a", "b"}, {}};
    MetricStructure s = encode_discrete(plain);
    CHECK(s.d(0, 1) == Rational(1));
    CHECK(validate_structure(s).empty());
    // directed 2-cycle: 0 means the edge holds
    DiscreteEncoding cyc{{"a", "b"}, {{"E", 2, {1, 0, 0, 1}}}};
    MetricStructure g = encode_discrete(cyc);
    int ab[2] = {0, 1}, aa[2] = {0, 0};
    CHECK(g.pred(0, ab) == Rational(0));
    CHECK(g.pred(0, aa) == Rational(1));
    CHECK(validate_structure(g).empty());
    DiscreteEncoding bad{{"a"}, {{"E", 1, {2}}}};
    CHECK_THROWS(encode_discrete(bad));
}

TEST_CASE("signature rejects reserved and duplicate names") {
    Signature sig;
    CHECK_THROWS(sig.add_predicate({"d", 2, Modulus::parse("r0+r1", 2)}));
    sig.add_predicate({"P", 1, Modulus::parse("r0", 1)});
    CHECK_THROWS(sig.add_predicate({"P", 1, Modulus::parse("r0", 1)}));
    CHECK(sig.find_predicate("d") == kDistance);
    CHECK(sig.find_predicate("Q") == -2);
}

TEST_CASE("corpus documents match the built-in corpus") {
    auto all = discrete_corpus();
    for (auto& m : metric_corpus()) all.push_back(std::move(m));
    for (const auto& ns : all) {
        INFO(ns.name);
        auto r = load_structure_file(std::string(CILWB_CORPUS_DIR) + "/" + ns.name + ".json");
        CHECK(r.report.empty());
        CHECK(save_structure(r.structure) == save_structure(ns.structure));
    }
}
