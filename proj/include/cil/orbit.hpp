#pragma once

#include "cil/eval.hpp"
#include "cil/fragment.hpp"

#include <map>
#include <memory>

namespace cil {

using Perm = std::vector<int>;

struct AutGroup {
    int points = 0;
    std::vector<Perm> elements;  // identity first
    std::size_t size() const { return elements.size(); }
};

AutGroup automorphisms(const MetricStructure& s);
std::vector<int> apply_perm(const Perm& g, const std::vector<int>& t);
// sorted, without repetitions
std::vector<std::vector<int>> orbit_members(const AutGroup& g, const std::vector<int>& a);
// row index of t among all_tuples(points, |t|)
std::size_t tuple_row(const std::vector<int>& t, int points);
// b -> d_Omega(b, Orbit(a)), rows as in all_tuples
std::vector<Rational> orbit_distance(const MetricStructure& s, const AutGroup& g, const std::vector<int>& a,
                                     const WeakModulus& omega);

// nonnegative, zero exactly where phi <= v (above) or phi >= v (below)
Formula above(const Formula& phi, const Rational& v);
Formula below(const Formula& phi, const Rational& v);

struct DeltaRow {
    Rational eps;
    ExtRational delta;  // min of psi where the orbit distance exceeds eps
};

struct OrbitSynthesis {
    std::vector<int> tuple;
    int level = 0;  // inf-level cap on separators, 0 = uncapped
    bool ok = false;
    std::string failure;
    Formula psi;
    std::vector<std::string> separators;
    Formula predicate;  // regularized, equal to the orbit distance when ok
    Rational scale, cap;
    QuantRank psi_rank, predicate_rank;
    bool zero_set_exact = false;
    bool predicate_exact = false;
    bool delta_ok = false;
    std::vector<DeltaRow> delta_table;
};

class OrbitAnalyzer {
public:
    OrbitAnalyzer(const MetricStructure& s, WeakModulus omega, FragmentOptions opt = {}, int eps_m_max = 6);

    const MetricStructure& structure() const { return s_; }
    const WeakModulus& omega() const { return omega_; }
    const FragmentOptions& options() const { return opt_; }
    const AutGroup& group() const { return group_; }

    // orbit id per row of all_tuples(|A|, n); ids follow the first row of each orbit
    const std::vector<int>& classes(int n);
    std::vector<std::vector<int>> representatives(int n);
    std::vector<int> representative(const std::vector<int>& a);
    const Fragment& fragment(int n);
    // [entry][row]
    const std::vector<std::vector<Rational>>& fragment_values(int n);
    const std::vector<Rational>& distances(const std::vector<int>& a);
    const OrbitSynthesis& synthesize(const std::vector<int>& a, int level = 0);

private:
    const MetricStructure& s_;
    WeakModulus omega_;
    FragmentOptions opt_;
    int eps_m_max_;
    AutGroup group_;
    std::map<int, std::vector<int>> classes_;
    std::map<int, Fragment> fragments_;
    std::map<int, std::vector<std::vector<Rational>>> values_;
    std::map<std::vector<int>, std::vector<Rational>> distances_;
    std::map<std::pair<std::vector<int>, int>, OrbitSynthesis> synth_;
};

struct ScottArtifacts {
    int max_len = 1;
    int level = 0;
    bool ok = false;
    std::string failure;
    std::vector<const OrbitSynthesis*> predicates;  // one per orbit representative, length <= max_len
    std::vector<Formula> sentences;                 // S_1..S_max_len
    Formula sentence;                               // S_max_len
    QuantRank rank;
};

// Sentences built from orbit predicates of tuples up to each length.
ScottArtifacts scott_sentence(OrbitAnalyzer& an, int max_len, int level = 0);

struct RankResult {
    int rank = -1;  // -1 when above max_rank
    int max_rank = 0;
    std::vector<std::pair<std::vector<int>, std::string>> witnesses;
    std::vector<std::string> notes;
};

RankResult scott_rank(OrbitAnalyzer& an, int max_len, int max_rank);

}  // namespace cil
