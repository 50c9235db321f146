#pragma once

#include "cil/eval.hpp"
#include "cil/fragment.hpp"

#include <optional>

namespace cil {

// inf_y max(d_Omega(x,y) - eps, |psi(y) - r|) over x0..x_{n-1}, n = max(width, arity)
Formula theta(const Formula& psi, const Rational& r, const Rational& eps, const WeakModulus& omega, int arity = 0);
// inf-level recorded for theta when psi is sup^k: max(k+1, 3)
int theta_rank_bound(const QuantRank& psi);

struct PartialType {
    int arity = 0;
    std::vector<Formula> formulas;
    std::vector<Rational> values;  // condition psi <= r
    std::vector<std::string> labels;
    std::size_t size() const { return formulas.size(); }
};

PartialType fragment_type(const MetricStructure& s, const std::vector<int>& a, const Fragment& fragment);

// 2^-m for m = 0..m_max
std::vector<Rational> eps_ladder(int m_max);

struct SupportReport {
    bool ok = false;
    Rational inf_value;
    std::string violation;
};

SupportReport check_support(const MetricStructure& s, const PartialType& type, const Formula& P, const WeakModulus& omega,
                            const std::vector<Rational>& eps_grid, Evaluator* shared = nullptr);

struct SupportStep {
    int m = 0;
    std::vector<int> anchor;
    std::vector<std::string> labels;  // chosen candidates, "+label" or "-label"
    Formula phi, phi_hat;
    Rational eta;
    ExtRational delta;
};

struct SupportResult {
    bool found = false;
    std::string failure;
    std::vector<SupportStep> steps;
    Rational scale;
    Formula raw;        // scaled truncated weighted sum
    Formula predicate;  // regularized when that form passes the check, raw otherwise
    bool regularized = false;
    SupportReport report;
};

// Candidates are oriented like orbit separators; level 0 leaves them uncapped.
// values[j][row] may supply candidate values precomputed over all_tuples; shared must be over s.
SupportResult find_support(const MetricStructure& s, const PartialType& type, const Fragment& candidates,
                           const WeakModulus& omega, int m_max, int level = 0,
                           const std::vector<std::vector<Rational>>* values = nullptr, Evaluator* shared = nullptr);

// ---------------------------------------------------------------- conditions

// phi < r with free variable i read as constant at[i]
struct Condition {
    Formula phi;
    std::vector<int> at;
    Rational r;
};

struct ConditionSet {
    std::vector<std::string> constants;
    std::vector<Condition> conditions;
    int constant(const std::string& name) const;  // -1 when absent
    std::string str(const Condition& c) const;
};

struct ConditionReport {
    bool ok = true;
    std::vector<std::string> violations;
};

ConditionReport validate_conditions(const ConditionSet& sigma);

// {"constants":[..],"conditions":[{"formula":..,"at":[..],"r":"p/q"}],"assignment":{"c":"point"}}
struct SeedDocument {
    ConditionSet seed;
    std::map<std::string, std::string> assignment;
};
SeedDocument parse_seed(const std::string& json_text, const ParseContext& ctx);
std::string condition_set_json(const ConditionSet& sigma);

struct HenkinStage {
    int index = 0;
    std::size_t size = 0;
    std::vector<std::string> notes;
};

struct HenkinResult {
    int stages = 0;
    ConditionSet gamma;
    std::vector<int> assignment;                 // constant -> oracle point
    std::vector<std::vector<std::string>> chain;  // sigma_0..sigma_k, sorted
    std::vector<HenkinStage> trace;
    std::vector<std::vector<int>> classes;  // constants per quotient point
    MetricStructure quotient;
    bool functions_complete = true;
    bool monotone = false;
    bool satisfiable = false;
    Rational max_error;  // quotient vs oracle distances under the assignment
};

// Throws std::invalid_argument when the seed is malformed or false in the oracle.
HenkinResult henkin_run(const ConditionSet& seed, const std::map<std::string, std::string>& assignment,
                        const MetricStructure& oracle, int stages);

}  // namespace cil
