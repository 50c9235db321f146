#pragma once

#include "cil/formula.hpp"
#include "cil/structure.hpp"

#include <map>
#include <string>
#include <vector>

namespace cil {

struct FragmentOptions {
    int connective_depth = 0;  // qf combinations on top of the atoms
    int ef_depth = 2;          // characteristic formulas gamma^1..gamma^ef_depth
    bool diagrams = true;      // existential diagram formulas
    bool domega_atoms = true;  // d_Omega between disjoint sub-tuples
};

// CILWB_FRAGMENT_DEPTH when set to a natural number, else 2.
int default_fragment_depth();

struct FragmentEntry {
    Formula formula;
    std::string label;
    QuantRank rank;
};
using Fragment = std::vector<FragmentEntry>;

// Atoms over x0..x_{n-1}: every predicate (and d) on terms of depth <= 1,
// then d_Omega atoms when omega is given.
std::vector<Formula> qf_atoms(const Signature& sig, int n, const WeakModulus* omega = nullptr);
std::vector<Formula> qf_fragment(const Signature& sig, int n, const WeakModulus* omega, int connective_depth);

// Characteristic and diagram formulas seeded by one structure; shares subformulas
// across calls.
class CharacteristicBuilder {
public:
    explicit CharacteristicBuilder(const MetricStructure& s);
    // gamma^j_e(x0..x_{n-1}); zero exactly on tuples j-equivalent to e in the qf game
    Formula gamma(const std::vector<int>& e, int j);
    // inf over the remaining points of gamma^0 of the full enumeration
    Formula diagram(const std::vector<int>& e);
    const std::vector<Formula>& atoms(int n);

private:
    const MetricStructure& s_;
    std::map<int, std::vector<Formula>> atoms_;
    std::map<std::pair<int, std::vector<int>>, Formula> gamma_;
    std::map<std::vector<int>, Formula> diagram_;
};

Fragment generate_fragment(const MetricStructure& s, int n, const WeakModulus& omega, const FragmentOptions& opt);
Fragment make_fragment(const std::vector<Formula>& fs, const std::string& label);

// entries with inf-level (resp. sup-level) at most level
Fragment restrict_inf(const Fragment& f, int level);
Fragment restrict_sup(const Fragment& f, int level);

}  // namespace cil
