// Acceptance run: one PASS/FAIL line per criterion, exit status 1 when any fails.

#include "cil/baf.hpp"
#include "cil/corpus.hpp"
#include "cil/orbit.hpp"
#include "cil/types.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>

using namespace cil;

namespace {

// pinned tolerances and budgets
constexpr int kMinFormulas = 50;
constexpr int kMinStructures = 10;
constexpr int kMaxPrenexPoints = 4;
constexpr int kFormulaDepth = 4;
constexpr int kMaxFree = 3;
constexpr double kPrenexBudget = 60.0;
constexpr int kGridMaxArity = 4;
constexpr int kCoherenceN = 8;
constexpr int kMaxSearchN = 64;
constexpr double kBafBudget = 120.0;
constexpr int kMaxTupleLen = 2;
constexpr int kMaxScottLen = 4;
constexpr int kEpsMax = 6;
constexpr int kHenkinStages = 10;
constexpr double kHenkinBudget = 60.0;
const Rational kT(1, 2);
const Rational kHenkinTol = Rational::pow2(-9);
const std::vector<Rational> kGrid = {Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4), Rational(1)};

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& run) {
    auto t0 = Clock::now();
    Outcome o;
    try {
        o = run();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] %2d %-28s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), since(t0));
    std::fflush(stdout);
}

std::vector<NamedStructure> all_corpus() {
    auto c = discrete_corpus();
    for (auto& m : metric_corpus()) c.push_back(std::move(m));
    return c;
}

// ---------------------------------------------------------------- shared state

struct Corpus {
    std::vector<NamedStructure> structures = all_corpus();
    std::size_t discrete = discrete_corpus().size();
    std::map<std::size_t, std::unique_ptr<OrbitAnalyzer>> analyzers;

    OrbitAnalyzer& analyzer(std::size_t i) {
        auto& a = analyzers[i];
        if (!a) a = std::make_unique<OrbitAnalyzer>(structures[i].structure, universal_modulus(structures[i].structure.signature()));
        return *a;
    }
};

// generated formulas per distinct signature, shared by criteria 1 and 2
struct FormulaCorpus {
    std::vector<std::pair<const Signature*, std::vector<Formula>>> by_sig;

    explicit FormulaCorpus(const Corpus& c) {
        std::mt19937_64 rng(424242);
        for (const auto& ns : c.structures) {
            const Signature& sig = ns.structure.signature();
            bool seen = false;
            for (const auto& e : by_sig) seen = seen || *e.first == sig;
            if (seen) continue;
            FormulaGenOptions opt;
            opt.depth = kFormulaDepth;
            opt.max_free = kMaxFree;
            opt.domega = true;
            auto om = universal_modulus(sig);
            std::vector<Formula> fs;
            for (int i = 0; i < 24; ++i) fs.push_back(random_formula(sig, om, rng, opt));
            by_sig.emplace_back(&sig, std::move(fs));
        }
    }

    const std::vector<Formula>& formulas(const Signature& sig) const {
        for (const auto& e : by_sig)
            if (*e.first == sig) return e.second;
        throw std::logic_error("signature not in the formula corpus");
    }
    std::size_t size() const {
        std::size_t n = 0;
        for (const auto& e : by_sig) n += e.second.size();
        return n;
    }
};

// ---------------------------------------------------------------- criteria

Outcome prenex_soundness(const Corpus& c, const FormulaCorpus& fc) {
    auto t0 = Clock::now();
    std::size_t structures = 0, checks = 0, bad = 0;
    std::set<const FormulaNode*> used;
    for (const auto& ns : c.structures) {
        if (ns.structure.size() > kMaxPrenexPoints) continue;
        ++structures;
        for (const auto& f : fc.formulas(ns.structure.signature())) {
            used.insert(f.get());
            auto a = eval_all(f, ns.structure), b = eval_all(prenex(f), ns.structure);
            checks += a.values.size();
            if (a.values != b.values || a.vars != b.vars) ++bad;
        }
    }
    double t = since(t0);
    std::ostringstream o;
    o << used.size() << " formulas x " << structures << " structures, " << checks << " assignments, " << bad << " mismatches";
    return {bad == 0 && used.size() >= kMinFormulas && structures >= kMinStructures && t < kPrenexBudget, o.str()};
}

Outcome modulus_audit(const Corpus& c, const FormulaCorpus& fc) {
    std::size_t audits = 0, violations = 0;
    for (const auto& ns : c.structures)
        for (const auto& f : fc.formulas(ns.structure.signature()))
            for (const Formula& g : {f, prenex(f)}) {
                ++audits;
                violations += audit_modulus(g, ns.structure).size();
            }
    std::ostringstream o;
    o << audits << " audits over " << c.structures.size() << " structures, " << violations << " violations";
    return {violations == 0, o.str()};
}

void grid_points(int k, const std::function<void(const std::vector<Rational>&)>& fn) {
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    while (true) {
        std::vector<Rational> r;
        for (int i : idx) r.push_back(kGrid[static_cast<std::size_t>(i)]);
        fn(r);
        int p = k - 1;
        while (p >= 0 && ++idx[static_cast<std::size_t>(p)] == static_cast<int>(kGrid.size())) idx[static_cast<std::size_t>(p--)] = 0;
        if (p < 0) return;
    }
}

std::vector<Rational> padded(int zeros, const std::vector<Rational>& r) {
    std::vector<Rational> out(static_cast<std::size_t>(zeros), Rational(0));
    out.insert(out.end(), r.begin(), r.end());
    return out;
}

// least N with lhs(r) <= Omega|_N(0..0, r) on the whole grid, -1 when none up to kMaxSearchN
int find_padding(const WeakModulus& om, int k, const std::function<Rational(const std::vector<Rational>&)>& lhs) {
    for (int N = k; N <= kMaxSearchN; ++N) {
        bool ok = true;
        grid_points(k, [&](const std::vector<Rational>& r) {
            if (ok && !(lhs(r) <= om.eval(padded(N - k, r)))) ok = false;
        });
        if (ok) return N;
    }
    return -1;
}

Outcome universal_modulus_clauses(const Corpus& c) {
    int sigs = 0, fails = 0;
    std::vector<const Signature*> seen;
    std::ostringstream o;
    for (const auto& ns : c.structures) {
        const Signature& sig = ns.structure.signature();
        bool dup = false;
        for (auto* s : seen) dup = dup || *s == sig;
        if (dup) continue;
        seen.push_back(&sig);
        ++sigs;
        auto om = universal_modulus(sig);
        // (i) atomic moduli below a padded truncation
        for (const auto& a : default_atomic_enumeration(sig)) {
            int k = a->width;
            if (k > kGridMaxArity) continue;
            if (find_padding(om, k, [&](const std::vector<Rational>& r) { return a->modulus.eval(r); }) < 0) {
                ++fails;
                o << " (i) " << to_string(a);
            }
        }
        // (ii) scaled truncations
        for (int k = 1; k <= kGridMaxArity; ++k)
            for (const Rational M : {Rational(2), Rational(5), Rational(16)})
                if (find_padding(om, k, [&](const std::vector<Rational>& r) { return M * om.eval(r); }) < 0) {
                    ++fails;
                    o << " (ii) k=" << k << " M=" << M.str();
                }
        // (iv) superadditivity over concatenation
        for (int k = 1; k < kGridMaxArity; ++k)
            for (int n = 1; k + n <= kGridMaxArity; ++n)
                grid_points(k + n, [&](const std::vector<Rational>& rs) {
                    std::vector<Rational> r(rs.begin(), rs.begin() + k), s(rs.begin() + k, rs.end());
                    if (!(om.eval(r) + om.eval(s) <= om.eval(rs))) {
                        ++fails;
                        o << " (iv) k=" << k << " n=" << n;
                    }
                });
        // (v) the sup metric on k-tuples
        for (int k = 1; 2 * k <= kGridMaxArity; ++k) {
            std::vector<Formula> ds;
            for (int i = 0; i < k; ++i) ds.push_back(distance_atom(i, k + i));
            Formula dk = nary_max(ds);
            grid_points(2 * k, [&](const std::vector<Rational>& r) {
                if (!(dk->modulus.widened(2 * k).eval(r) <= om.eval(r))) {
                    ++fails;
                    o << " (v) k=" << k;
                }
            });
        }
        auto coh = coherence_violations(om, kCoherenceN, kGrid, 4096);
        if (!coh.empty()) {
            ++fails;
            o << " coherence " << coh.front();
        }
    }
    std::ostringstream d;
    d << sigs << " signatures, clauses (i),(ii),(iv),(v) on a 5-point grid, arity <= " << kGridMaxArity
      << ", coherence n <= " << kCoherenceN << ", " << fails << " failures" << o.str().substr(0, 200);
    return {fails == 0, d.str()};
}

Outcome baf_vs_brute(const Corpus& c) {
    auto t0 = Clock::now();
    std::size_t agree = 0, total = 0, gaps = 0, iso = 0;
    std::string first;
    for (std::size_t i = 0; i < c.discrete; ++i)
        for (std::size_t j = i; j < c.discrete; ++j) {
            const auto& A = c.structures[i].structure;
            const auto& B = c.structures[j].structure;
            BafConfig cfg;
            cfg.omega = universal_modulus(A.signature());
            cfg.t = kT;
            cfg.depth = A.size() + B.size();
            cfg.max_tuple_len = std::max(A.size(), B.size());
            auto v = approx_iso_decide(A, B, cfg);
            bool truth = brute_force_isomorphic(A, B);
            ++total;
            iso += truth;
            if (v.yes == truth) ++agree;
            else if (first.empty()) first = " first disagreement " + c.structures[i].name + "/" + c.structures[j].name;
            if (!v.yes && !(abs(eval(v.sentence, A, {}) - eval(v.sentence, B, {})) >= kT)) ++gaps;
        }
    double t = since(t0);
    std::ostringstream o;
    o << agree << "/" << total << " pairs agree (" << iso << " isomorphic) over " << c.discrete << " structures, "
      << gaps << " sentences below t" << first;
    return {agree == total && gaps == 0 && c.discrete >= 20 && t < kBafBudget, o.str()};
}

Outcome orbit_characterization(Corpus& c) {
    std::size_t agree = 0, total = 0;
    std::string first;
    for (std::size_t i = 0; i < c.discrete; ++i) {
        auto& an = c.analyzer(i);
        for (int n = 1; n <= kMaxTupleLen; ++n) {
            const auto& vals = an.fragment_values(n);
            const auto& cls = an.classes(n);
            std::size_t rows = cls.size();
            for (std::size_t a = 0; a < rows; ++a)
                for (std::size_t b = a; b < rows; ++b) {
                    bool same_vals = true;
                    for (const auto& e : vals) same_vals = same_vals && e[a] == e[b];
                    ++total;
                    if (same_vals == (cls[a] == cls[b])) ++agree;
                    else if (first.empty()) first = " first mismatch in " + c.structures[i].name;
                }
        }
    }
    std::ostringstream o;
    o << agree << "/" << total << " tuple pairs (length <= " << kMaxTupleLen << ") on " << c.discrete << " structures" << first;
    return {agree == total, o.str()};
}

Outcome orbit_definability(Corpus& c) {
    std::size_t ok = 0, total = 0;
    std::string first;
    for (std::size_t i = 0; i < c.structures.size(); ++i) {
        auto& an = c.analyzer(i);
        for (int n = 1; n <= kMaxTupleLen; ++n)
            for (const auto& a : an.representatives(n)) {
                const auto& sy = an.synthesize(a);
                bool eps_ok = sy.delta_ok && static_cast<int>(sy.delta_table.size()) >= kEpsMax + 1;
                ++total;
                if (sy.ok && sy.zero_set_exact && eps_ok) ++ok;
                else if (first.empty()) first = " first failure " + c.structures[i].name + " " + c.structures[i].structure.tuple_str(a);
            }
    }
    std::ostringstream o;
    o << ok << "/" << total << " orbit representatives certified, eps = 2^-m for m <= " << kEpsMax << first;
    return {ok == total, o.str()};
}

Outcome scott(Corpus& c) {
    std::vector<ScottArtifacts> art;
    std::vector<int> ranks;
    std::size_t self_ok = 0, rank_ok = 0;
    std::string first;
    for (std::size_t i = 0; i < c.structures.size(); ++i) {
        auto& an = c.analyzer(i);
        auto rr = scott_rank(an, kMaxTupleLen, 3);
        int level = std::max(rr.rank, 1);
        art.push_back(scott_sentence(an, kMaxTupleLen, level));
        ranks.push_back(rr.rank);
        const auto& s = art.back();
        bool self = s.ok;
        for (const auto& sn : s.sentences) self = self && eval(sn, c.structures[i].structure, {}).is_zero();
        if (self) ++self_ok;
        else if (first.empty()) first = " self " + c.structures[i].name;
        if (rr.rank >= 0 && s.ok && quant_rank(s.sentence).sup_level <= rr.rank + 1) ++rank_ok;
        else if (first.empty()) first = " rank " + c.structures[i].name + " " + quant_rank(s.sentence).str();
    }
    std::size_t pairs = 0, separated = 0, extended = 0;
    bool self_ext = true;
    for (std::size_t i = 0; i < c.structures.size(); ++i)
        for (std::size_t j = 0; j < c.structures.size(); ++j) {
            if (i == j) continue;
            const auto& A = c.structures[i].structure;
            const auto& B = c.structures[j].structure;
            if (!(A.signature() == B.signature()) || brute_force_isomorphic(A, B)) continue;
            ++pairs;
            bool pos = false;
            for (const auto& sn : art[i].sentences) pos = pos || eval(sn, B, {}).sign() > 0;
            // the forth/back clauses see one point past the tuple, so extra points need longer tuples
            for (int L = kMaxTupleLen + 1; !pos && L <= std::min(A.size() + 1, kMaxScottLen); ++L) {
                auto& an = c.analyzer(i);
                auto ext = scott_sentence(an, L, art[i].level);
                if (!ext.ok) ext = scott_sentence(an, L, 2);
                if (!ext.ok) break;
                ++extended;
                if (!eval(ext.sentence, A, {}).is_zero() && first.empty()) first = " extended self " + c.structures[i].name;
                self_ext = self_ext && eval(ext.sentence, A, {}).is_zero();
                pos = eval(ext.sentence, B, {}).sign() > 0;
            }
            if (pos) ++separated;
            else if (first.empty()) first = " not separated " + c.structures[i].name + "/" + c.structures[j].name;
        }
    std::ostringstream o;
    o << "self 0 on " << self_ok << "/" << c.structures.size() << ", separated " << separated << "/" << pairs
      << " ordered non-isomorphic pairs (" << extended << " longer sentences), rank certified " << rank_ok << "/"
      << c.structures.size() << first;
    return {self_ok == c.structures.size() && self_ext && separated == pairs && rank_ok == c.structures.size(), o.str()};
}

Outcome robustness(Corpus& c) {
    std::size_t agree = 0, total = 0, both = 0;
    std::string first;
    for (std::size_t i = 0; i < c.structures.size(); ++i) {
        auto& an = c.analyzer(i);
        const auto& s = c.structures[i].structure;
        Evaluator ev(s);
        for (int level = 1; level <= 2; ++level)
            for (int n = 0; n <= kMaxTupleLen; ++n) {
                const Fragment& fr = an.fragment(n);
                Fragment psi = restrict_sup(fr, level);
                for (const auto& a : all_tuples(s.size(), n)) {
                    bool syn = an.synthesize(an.representative(a), level).ok;
                    auto sr = find_support(s, fragment_type(s, a, psi), fr, an.omega(), kEpsMax, level, &an.fragment_values(n), &ev);
                    ++total;
                    if (syn == sr.found) ++agree;
                    else if (first.empty()) first = " first disagreement " + c.structures[i].name + " " + s.tuple_str(a);
                    both += syn && sr.found;
                }
            }
    }
    std::ostringstream o;
    o << agree << "/" << total << " tuples agree at levels 1 and 2 (" << both << " both succeed)" << first;
    return {agree == total, o.str()};
}

Outcome theta_and_support(Corpus& c) {
    std::size_t checks = 0, bad = 0, supported = 0, tuples = 0;
    std::string first;
    const auto eps = eps_ladder(2);
    for (std::size_t i = 0; i < c.structures.size(); ++i) {
        auto& an = c.analyzer(i);
        const auto& s = c.structures[i].structure;
        const int N = s.size();
        Formula dt = tuple_distance_formula(an.omega(), 1);
        Evaluator ev(s);
        std::vector<std::vector<Rational>> dist(N, std::vector<Rational>(N));
        for (int x = 0; x < N; ++x)
            for (int y = 0; y < N; ++y) dist[x][y] = ev.eval_tuple(dt, {x, y});
        const auto& vals = an.fragment_values(1);
        const Fragment& fr = an.fragment(1);
        for (std::size_t k = 0; k < fr.size(); ++k) {
            std::vector<Rational> rs(vals[k].begin(), vals[k].end());
            rs.push_back(fr[k].formula->bound.hi);
            std::sort(rs.begin(), rs.end());
            rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
            for (const auto& r : rs) {
                if (!(fr[k].formula->bound.lo < r)) continue;
                for (const auto& e : eps) {
                    Formula th = theta(fr[k].formula, r, e, an.omega(), 1);
                    for (int x = 0; x < N; ++x) {
                        bool ball = false;
                        for (int y = 0; y < N; ++y) ball = ball || (dist[x][y] <= e && vals[k][static_cast<std::size_t>(y)] == r);
                        ++checks;
                        if (ev.eval_tuple(th, {x}).is_zero() != ball) {
                            ++bad;
                            if (first.empty()) first = " theta mismatch " + c.structures[i].name + " " + fr[k].label;
                        }
                    }
                }
            }
        }
        for (int n = 1; n <= kMaxTupleLen; ++n)
            for (const auto& a : all_tuples(N, n)) {
                const auto& sy = an.synthesize(a);
                auto ty = fragment_type(s, a, an.fragment(n));
                ++tuples;
                if (sy.ok) {
                    if (check_support(s, ty, sy.predicate, an.omega(), eps_ladder(kEpsMax), &ev).ok) {
                        ++supported;
                        continue;
                    }
                }
                if (first.empty()) first = " unsupported " + c.structures[i].name + " " + s.tuple_str(a);
            }
    }
    std::ostringstream o;
    o << checks << " theta zero-set checks, " << bad << " mismatches; check_support passes on " << supported << "/" << tuples << " tuples" << first;
    return {bad == 0 && supported == tuples, o.str()};
}

Outcome henkin(const Corpus& c) {
    std::size_t ok = 0;
    double worst = 0;
    Rational err(0);
    std::string first;
    for (const auto& ns : c.structures) {
        auto t0 = Clock::now();
        auto h = henkin_run(ConditionSet{}, {}, ns.structure, kHenkinStages);
        double t = since(t0);
        worst = std::max(worst, t);
        err = max(err, h.max_error);
        if (h.monotone && h.satisfiable && h.max_error <= kHenkinTol && t < kHenkinBudget) ++ok;
        else if (first.empty()) first = " first failure " + ns.name;
    }
    std::ostringstream o;
    o << ok << "/" << c.structures.size() << " structures, k = " << kHenkinStages << ", max error " << err.str()
      << " (tolerance " << kHenkinTol.str() << "), slowest " << worst << "s" << first;
    return {ok == c.structures.size(), o.str()};
}

}  // namespace

int main() {
    Corpus c;
    FormulaCorpus fc(c);
    report(1, "prenex soundness", [&] { return prenex_soundness(c, fc); });
    report(2, "modulus audit", [&] { return modulus_audit(c, fc); });
    report(3, "universal modulus", [&] { return universal_modulus_clauses(c); });
    report(4, "back-and-forth vs brute", [&] { return baf_vs_brute(c); });
    report(5, "orbit characterization", [&] { return orbit_characterization(c); });
    report(6, "orbit definability", [&] { return orbit_definability(c); });
    report(7, "scott self/distinguish", [&] { return scott(c); });
    report(8, "robustness", [&] { return robustness(c); });
    report(9, "theta and support", [&] { return theta_and_support(c); });
    report(10, "henkin fidelity", [&] { return henkin(c); });
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
