#pragma once

#include "cil/corpus.hpp"
#include "cil/eval.hpp"

#include <stdexcept>
#include <string>

namespace fixtures {

inline cil::MetricStructure pair_p(int a, int b) {
    return cil::encode_discrete({{"a", "b"}, {{"P", 1, {a, b}}}});
}

inline cil::MetricStructure plain(int n) {
    std::vector<std::string> pts;
    for (int i = 0; i < n; ++i) pts.push_back("p" + std::to_string(i));
    return cil::encode_discrete({pts, {}});
}

inline cil::MetricStructure named(const std::string& name) {
    for (auto& c : cil::discrete_corpus())
        if (c.name == name) return c.structure;
    for (auto& c : cil::metric_corpus())
        if (c.name == name) return c.structure;
    throw std::out_of_range("no corpus structure " + name);
}

inline cil::Formula parse(const std::string& text, const cil::MetricStructure& s) {
    cil::ParseContext ctx{&s.signature(), cil::universal_modulus(s.signature())};
    return cil::parse_formula(text, ctx);
}

inline cil::Formula parse(const std::string& text, const cil::MetricStructure& s, const cil::WeakModulus& omega) {
    cil::ParseContext ctx{&s.signature(), omega};
    return cil::parse_formula(text, ctx);
}

}  // namespace fixtures
