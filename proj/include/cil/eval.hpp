#pragma once

#include "cil/formula.hpp"
#include "cil/structure.hpp"

#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cil {

// Variable index -> point index; -1 when unassigned.
using Assignment = std::vector<int>;

// x_i -> t[i]
Assignment assignment_of(const std::vector<int>& tuple);

inline constexpr std::size_t kDefaultEvalCap = 1'000'000;

// Exact evaluator with a memo over quantified subformulas. Not thread-safe;
// use one instance per thread.
class Evaluator {
public:
    explicit Evaluator(const MetricStructure& s) : s_(s) {}

    Rational eval(const Formula& f, const Assignment& a);
    Rational eval_tuple(const Formula& f, const std::vector<int>& tuple) { return eval(f, assignment_of(tuple)); }
    const MetricStructure& structure() const { return s_; }
    void clear();

private:
    struct Key {
        const FormulaNode* node;
        std::uint64_t packed;
        bool operator==(const Key& o) const { return node == o.node && packed == o.packed; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<const void*>()(k.node) ^ (k.packed * 0x9e3779b97f4a7c15ULL);
        }
    };

    const MetricStructure& s_;
    int env_[kMaxVars] = {};
    std::unordered_map<Key, Rational, KeyHash> memo_;
    std::unordered_set<const FormulaNode*> pinned_set_;
    std::vector<Formula> pinned_;

    Rational rec(const FormulaNode& f);
    bool pack(const FormulaNode& f, std::uint64_t& out) const;
    int term_value(const Term& t) const;
};

Rational eval(const Formula& f, const MetricStructure& s, const Assignment& a);

struct EvalTable {
    std::vector<int> vars;  // free variables, ascending
    int points = 0;
    std::vector<Rational> values;  // row-major, first variable most significant
    std::vector<int> row(std::size_t i) const;
};

// Throws std::length_error when the table would exceed cap rows.
EvalTable eval_all(const Formula& f, const MetricStructure& s, std::size_t cap = kDefaultEvalCap);
EvalTable eval_all(const Formula& f, Evaluator& ev, std::size_t cap = kDefaultEvalCap);

// Bound and modulus audit over all assignment pairs of the free variables.
std::vector<Violation> audit_modulus(const Formula& f, const MetricStructure& s, std::size_t cap = kDefaultEvalCap);
// Audit against an arbitrary modulus, e.g. a weak-modulus truncation.
std::vector<Violation> audit_against(const Formula& f, const Modulus& m, const MetricStructure& s,
                                     std::size_t cap = kDefaultEvalCap);

// All tuples of length len over n points, lexicographic.
std::vector<std::vector<int>> all_tuples(int n, int len);

}  // namespace cil
