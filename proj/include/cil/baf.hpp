#pragma once

#include "cil/eval.hpp"
#include "cil/fragment.hpp"
#include "cil/orbit.hpp"

#include <functional>
#include <map>
#include <set>

namespace cil {

struct BafConfig {
    WeakModulus omega;
    Rational t{1, 2};
    int depth = 3;
    int max_tuple_len = 3;
    int connective_depth = 0;  // qf fragment generation depth
    bool domega_atoms = true;
};

// qf fragment per tuple length, shared by both structures
class BafFragment {
public:
    BafFragment(const Signature& sig, const BafConfig& cfg);
    const std::vector<Formula>& at(int n);
    std::size_t size(int n) { return at(n).size(); }

private:
    const Signature& sig_;
    BafConfig cfg_;
    std::map<int, std::vector<Formula>> by_len_;
};

struct BafSet {
    int depth = 0;
    int max_tuple_len = 0;
    // per tuple length: (row in A^n, row in B^n)
    std::vector<std::set<std::pair<std::size_t, std::size_t>>> pairs;
    bool contains(const std::vector<int>& a, const std::vector<int>& b, int points_a, int points_b) const;
    std::size_t total() const;
};

BafSet baf_compute(const MetricStructure& A, const MetricStructure& B, const BafConfig& cfg);

struct BafVerdict {
    bool yes = false;
    int depth = 0;  // the configured depth when yes, the least failing depth otherwise
    std::vector<std::string> witness;  // spoiler moves along one losing line
    Formula sentence;                  // distinguishing sentence when no
    Rational value_a, value_b;
    std::size_t fragment_size = 0;  // at the longest tuple length reached
};

BafVerdict approx_iso_decide(const MetricStructure& A, const MetricStructure& B, const BafConfig& cfg);

struct IsoResult {
    bool found = false;
    Perm bijection;  // A point i -> B point bijection[i]
    Rational discrepancy;
    std::string worst;  // the atom attaining the discrepancy
    bool isomorphism() const { return found && discrepancy.is_zero(); }
};

// Branch and bound over bijections minimizing the largest discrepancy on atoms.
IsoResult extract_iso(const MetricStructure& A, const MetricStructure& B);

// brute force oracle: some bijection preserves every table exactly
bool brute_force_isomorphic(const MetricStructure& A, const MetricStructure& B);

struct KSetReport {
    BafSet set;
    bool condition1 = false, forth = false, back = false;
    std::vector<std::string> violations;
    bool ok() const { return condition1 && forth && back; }
};

using OrbitPredicates = std::function<Formula(const std::vector<int>&)>;

// K(Omega,t) = {(a,b) : P_a(b) < t} over tuples up to max_len, with conditions (1)-(3) checked.
KSetReport k_set(const MetricStructure& A, const OrbitPredicates& preds, const Rational& t, int max_len,
                 const WeakModulus& omega);

void require_same_relational(const MetricStructure& A, const MetricStructure& B);

}  // namespace cil
