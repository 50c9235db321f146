#pragma once

#include "cil/modulus.hpp"
#include "cil/structure.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cil {

inline constexpr int kMaxVars = 64;
using VarMask = std::uint64_t;

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
    int var = -1;   // >= 0 for a variable
    int func = -1;  // function index otherwise
    std::string name;
    std::vector<TermPtr> args;
    Modulus sym_modulus;  // Δ_f for applications
    Modulus modulus;      // arity = width
    VarMask free = 0;
    int width = 0;
    std::size_t hash = 0;
};

TermPtr var_term(int i);
TermPtr app_term(const Signature& sig, int func, std::vector<TermPtr> args);

enum class FKind { Atomic, Zero, One, Sum, Max, Min, Scale, Sup, Inf, SupN, InfN, DOmega };

struct FormulaNode;
using Formula = std::shared_ptr<const FormulaNode>;

struct FormulaNode {
    FKind kind = FKind::Zero;
    // Atomic
    int pred = 0;
    std::string name;
    std::vector<TermPtr> terms;
    Modulus sym_modulus;  // Δ_P
    // Scale
    Rational q;
    // Sup / Inf
    int var = -1;
    std::vector<Formula> kids;
    // DOmega
    int omega_n = 0;
    std::vector<int> xs, ys;
    WeakModulus omega;

    // cached
    VarMask free = 0;
    VarMask vars = 0;  // free and bound
    int width = 0;     // 1 + max free variable, 0 for sentences
    bool quantified = false;
    Interval bound;
    Modulus modulus;
    std::size_t hash = 0;
};

// ---------------------------------------------------------------- builders

Formula atomic(const Signature& sig, int pred, std::vector<TermPtr> terms);
Formula distance_atom(int i, int j);
Formula zero();
Formula one();
Formula constant(const Rational& r);  // r·1 (0 and 1 map to the constants)
Formula sum(const Formula& a, const Formula& b);
Formula fmax(const Formula& a, const Formula& b);
Formula fmin(const Formula& a, const Formula& b);
Formula scale(const Rational& q, const Formula& a);
Formula sup(int var, const Formula& a);
Formula inf(int var, const Formula& a);
Formula sup_block(const std::vector<int>& vars, const Formula& a);
Formula inf_block(const std::vector<int>& vars, const Formula& a);
// Children must share one inferred bound; throws "incompatible bounds" otherwise.
Formula sup_family(std::vector<Formula> kids);
Formula inf_family(std::vector<Formula> kids);
// Declared common bound that must contain every child bound.
Formula sup_family(std::vector<Formula> kids, const Interval& declared);
Formula inf_family(std::vector<Formula> kids, const Interval& declared);
// Declared bound = hull of child bounds; empty families give constant 0.
Formula sup_family_hull(std::vector<Formula> kids);
Formula inf_family_hull(std::vector<Formula> kids);
Formula d_omega(const WeakModulus& omega, int n, std::vector<int> xs, std::vector<int> ys);

// Sugar
Formula tminus(const Formula& a, const Formula& b);  // max(a + (-1)·b, 0)
Formula fabs(const Formula& a);                      // max(a,0) + (-1)·min(a,0)
Formula nary_max(const std::vector<Formula>& fs);     // left fold, 0 when empty
Formula nary_min(const std::vector<Formula>& fs);
Formula nary_sum(const std::vector<Formula>& fs);

// ---------------------------------------------------------------- structure

bool same(const Formula& a, const Formula& b);
struct FormulaHash {
    std::size_t operator()(const Formula& f) const { return f->hash; }
};
struct FormulaEq {
    bool operator()(const Formula& a, const Formula& b) const { return same(a, b); }
};

bool is_quantifier(FKind k);
bool is_qf(const Formula& f);
std::vector<int> free_vars(const Formula& f);
int fresh_var(VarMask used);
std::size_t node_count(const Formula& f);

// Capture-avoiding renaming of free variables: x_i -> x_{map[i]} for mapped i.
Formula rename_free(const Formula& f, const std::map<int, int>& map);

// ---------------------------------------------------------------- text

std::string to_string(const Formula& f);
std::string to_string(const TermPtr& t);

struct ParseContext {
    const Signature* sig = nullptr;
    WeakModulus omega;  // used by dOmega atoms
};

Formula parse_formula(std::string_view text, const ParseContext& ctx);

// ---------------------------------------------------------------- inference

inline const Interval& infer_bound(const Formula& f) { return f->bound; }
inline const Modulus& infer_modulus(const Formula& f) { return f->modulus; }

// ---------------------------------------------------------------- moduli from formulas

// d(x0,x1), each P(x0..x_{k-1}), each d(f(x0..x_{k-1}),x_k)
std::vector<Formula> default_atomic_enumeration(const Signature& sig);
WeakModulus universal_modulus(const Signature& sig, const std::vector<Formula>& atomic_enumeration);
WeakModulus universal_modulus(const Signature& sig);
// 2n-variable d_Ω((x_0..x_{n-1}),(x_n..x_{2n-1}))
Formula tuple_distance_formula(const WeakModulus& omega, int n);

// ---------------------------------------------------------------- rewriting

Formula prenex(const Formula& f);
bool is_prenex(const Formula& f);
// Throws std::invalid_argument when f is not prenex.
Formula demorgan_dual(const Formula& f);

struct QuantRank {
    enum class Kind { Qf, Inf, Sup, Both };
    Kind kind = Kind::Qf;
    int level = 0;
    int inf_level = 0;  // least k with the formula in inf^k
    int sup_level = 0;  // least k with the formula in sup^k
    std::string str() const;
    bool within_inf(int n) const { return inf_level <= n; }
    bool within_sup(int n) const { return sup_level <= n; }
};

QuantRank quant_rank(const Formula& f);

enum class RegMode { Inf, Sup };
// arity widens the regularized tuple beyond the free variables of f
Formula regularize(const Formula& f, const WeakModulus& omega, const Interval& I, RegMode mode, int arity = 0);
// max(lo, min(hi, f)) with the wrappers skipped when the bound already fits
Formula clamp(const Formula& f, const Interval& I);

}  // namespace cil
