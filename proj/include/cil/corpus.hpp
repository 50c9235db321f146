#pragma once

#include "cil/formula.hpp"
#include "cil/structure.hpp"

#include <random>
#include <string>
#include <vector>

namespace cil {

struct NamedStructure {
    std::string name;
    MetricStructure structure;
};

// Classical structures (unary P, binary E) encoded with the 0-is-true convention,
// up to 5 points, including relabeled copies.
std::vector<NamedStructure> discrete_corpus();

// Small metric structures with rational distances and predicate values; some carry
// a unary function symbol.
std::vector<NamedStructure> metric_corpus();

// the triangle with P = (0, 1/2, 1)
MetricStructure triangle_p();

// same structure with points renamed and reordered by perm (new index i holds old point perm[i])
MetricStructure relabel(const MetricStructure& s, const std::vector<int>& perm, const std::string& prefix = "q");

struct FormulaGenOptions {
    int depth = 4;
    int max_free = 3;
    bool families = true;
    bool domega = false;
};

Formula random_formula(const Signature& sig, const WeakModulus& omega, std::mt19937_64& rng,
                       const FormulaGenOptions& opt = {});

}  // namespace cil
