#pragma once

#include "cil/rational.hpp"

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace cil {

// Symbolic n-ary modulus of continuity. The expression grammar (projections,
// nonnegative scaling, sum, max, composition, zero) only denotes functions
// that vanish at 0, are monotone and subadditive.
class Modulus {
public:
    enum class Kind { Zero, Proj, Scale, Sum, Max, Comp };
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    Modulus();  // zero modulus of arity 0

    static Modulus zero(int arity);
    static Modulus proj(int arity, int i);
    static Modulus scale(const Rational& q, const Modulus& m);
    static Modulus sum(const Modulus& a, const Modulus& b);
    static Modulus max(const Modulus& a, const Modulus& b);
    // outer has arity inner.size(); all inner share one arity which becomes the result's.
    static Modulus compose(const Modulus& outer, const std::vector<Modulus>& inner);
    // Δ(r,...,r) as a unary modulus.
    static Modulus diagonal(const Modulus& m);

    // Grammar: r<i> | q*M | M+M | max(M,M) | M o (M,...,M) | 0
    static Modulus parse(std::string_view text, int arity);

    int arity() const { return arity_; }
    Kind kind() const;
    bool is_zero() const { return kind() == Kind::Zero; }
    bool uses(int i) const;
    int max_used() const;  // -1 when no coordinate referenced

    Rational eval(const std::vector<Rational>& r) const;

    Modulus widened(int n) const;
    Modulus substitute_zero(int i) const;
    // Drops coordinates >= n, zeroing any that are still referenced.
    Modulus narrowed(int n) const;
    // Coordinate i of the result reads coordinate map[i] of the argument vector.
    Modulus reindexed(const std::vector<int>& map, int new_arity) const;

    std::string str() const;
    std::size_t hash() const;
    friend bool operator==(const Modulus& a, const Modulus& b);
    friend bool operator!=(const Modulus& a, const Modulus& b) { return !(a == b); }

    const NodePtr& node() const { return e_; }

private:
    Modulus(int arity, NodePtr e) : arity_(arity), e_(std::move(e)) {}
    int arity_;
    NodePtr e_;
};

// Coherent family of truncations Ω|_n, either from a generator or a finite table.
class WeakModulus {
public:
    using Generator = std::function<Modulus(int)>;

    WeakModulus() = default;
    static WeakModulus from_generator(std::string name, Generator g);
    // table[n-1] is the truncation at n
    static WeakModulus from_table(std::string name, std::vector<Modulus> table);
    // Universal construction: index 0 is the identity, even indices 2k are the d_k
    // (diagonal 2r) and odd indices enumerate the supplied atomic moduli.
    static WeakModulus universal(const std::vector<Modulus>& atomic_moduli);

    bool valid() const { return impl_ != nullptr; }
    const std::string& name() const;
    int max_arity() const;  // -1 if unbounded
    const Modulus& truncation(int n) const;
    Rational eval(const std::vector<Rational>& r) const { return truncation(static_cast<int>(r.size())).eval(r); }
    // Unary diagonals D_k used by the universal construction (empty for tables).
    const std::vector<Modulus>& diagonals() const;
    bool is_universal() const;

    friend bool operator==(const WeakModulus& a, const WeakModulus& b) { return a.impl_ == b.impl_; }

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

// Coherence violations Ω|_n(r̄) != Ω|_{n+1}(r̄,0) for n < n_max over grid^n samples.
std::vector<std::string> coherence_violations(const WeakModulus& w, int n_max, const std::vector<Rational>& grid,
                                              std::size_t max_samples = 4096);

}  // namespace cil
