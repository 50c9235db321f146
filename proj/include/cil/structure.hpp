#pragma once

#include "cil/modulus.hpp"
#include "cil/rational.hpp"

#include <memory>
#include <string>
#include <vector>

namespace cil {

struct PredicateSymbol {
    std::string name;
    int arity = 0;
    Modulus modulus;
    Interval bound{Rational(0), Rational(1)};
};

struct FunctionSymbol {
    std::string name;
    int arity = 0;
    Modulus modulus;
};

// Predicate index used for the distance symbol in atomic formulas.
inline constexpr int kDistance = -1;

class Signature {
public:
    Signature() = default;

    void add_predicate(PredicateSymbol p);
    void add_function(FunctionSymbol f);

    const std::vector<PredicateSymbol>& predicates() const { return preds_; }
    const std::vector<FunctionSymbol>& functions() const { return funcs_; }
    // kDistance for "d", -2 when unknown.
    int find_predicate(const std::string& name) const;
    int find_function(const std::string& name) const;
    // d is always present: arity 2, modulus r0+r1, bound [0,1]
    static const PredicateSymbol& distance();
    const PredicateSymbol& predicate(int idx) const { return idx == kDistance ? distance() : preds_.at(static_cast<std::size_t>(idx)); }
    bool relational() const { return funcs_.empty(); }

    friend bool operator==(const Signature& a, const Signature& b);
    friend bool operator!=(const Signature& a, const Signature& b) { return !(a == b); }

private:
    void check_name(const std::string& name) const;
    std::vector<PredicateSymbol> preds_;
    std::vector<FunctionSymbol> funcs_;
};

using SignaturePtr = std::shared_ptr<const Signature>;

struct Violation {
    std::string axiom;    // e.g. "symmetry", "modulus"
    std::string message;  // names the witnesses and both sides of the failed inequality
};

// Finite metric structure; tuple tables are row-major with the first coordinate most significant.
class MetricStructure {
public:
    MetricStructure() = default;
    MetricStructure(SignaturePtr sig, std::vector<std::string> points);

    const Signature& signature() const { return *sig_; }
    const SignaturePtr& signature_ptr() const { return sig_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<std::string>& points() const { return points_; }
    const std::string& point(int i) const { return points_.at(static_cast<std::size_t>(i)); }
    int point_index(const std::string& name) const;

    const Rational& d(int i, int j) const { return dist_[static_cast<std::size_t>(i * size() + j)]; }
    void set_d(int i, int j, const Rational& v) { dist_[static_cast<std::size_t>(i * size() + j)] = v; }

    std::size_t tuple_index(const int* args, int arity) const;
    const Rational& pred(int p, const int* args) const;
    void set_pred(int p, const std::vector<int>& args, const Rational& v);
    int func(int f, const int* args) const;
    void set_func(int f, const std::vector<int>& args, int v);

    const std::vector<Rational>& pred_table(int p) const { return preds_.at(static_cast<std::size_t>(p)); }
    const std::vector<int>& func_table(int f) const { return funcs_.at(static_cast<std::size_t>(f)); }

    std::string tuple_str(const std::vector<int>& t) const;

    friend bool operator==(const MetricStructure& a, const MetricStructure& b);

private:
    SignaturePtr sig_;
    std::vector<std::string> points_;
    std::vector<Rational> dist_;
    std::vector<std::vector<Rational>> preds_;
    std::vector<std::vector<int>> funcs_;
};

std::vector<Violation> validate_structure(const MetricStructure& s);

struct LoadResult {
    MetricStructure structure;
    std::vector<Violation> report;
};

// Throws std::invalid_argument naming the line or field on malformed documents.
LoadResult load_structure_text(const std::string& json_text);
LoadResult load_structure_file(const std::string& path);
std::string save_structure(const MetricStructure& s);

// Classical relational structure with {0,1}-valued tables, 0 meaning true.
struct ClassicalRelation {
    std::string name;
    int arity = 0;
    std::vector<int> table;  // row-major over points^arity
};

struct DiscreteEncoding {
    std::vector<std::string> points;
    std::vector<ClassicalRelation> relations;
};

MetricStructure encode_discrete(const DiscreteEncoding& c);

}  // namespace cil
