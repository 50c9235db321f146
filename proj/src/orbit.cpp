#include "cil/orbit.hpp"

#include <algorithm>
#include <set>

namespace cil {

// ---------------------------------------------------------------- automorphisms

AutGroup automorphisms(const MetricStructure& s) {
    const int n = s.size();
    const Signature& sig = s.signature();
    std::vector<std::vector<Rational>> profile(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto& p = profile[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) p.push_back(s.d(i, j));
        std::sort(p.begin(), p.end());
        for (std::size_t q = 0; q < sig.predicates().size(); ++q)
            if (sig.predicates()[q].arity == 1) p.push_back(s.pred(static_cast<int>(q), &i));
    }
    // predicate tuples grouped by their largest entry so each is checked once
    std::vector<std::vector<std::pair<int, std::vector<int>>>> checks(static_cast<std::size_t>(n));
    for (std::size_t q = 0; q < sig.predicates().size(); ++q) {
        int k = sig.predicates()[q].arity;
        for (const auto& t : all_tuples(n, k)) {
            int top = t.empty() ? 0 : *std::max_element(t.begin(), t.end());
            if (!t.empty()) checks[static_cast<std::size_t>(top)].push_back({static_cast<int>(q), t});
        }
    }
    AutGroup out;
    out.points = n;
    Perm g(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    auto functions_ok = [&]() {
        for (std::size_t f = 0; f < sig.functions().size(); ++f) {
            int k = sig.functions()[f].arity;
            for (const auto& t : all_tuples(n, k)) {
                auto gt = apply_perm(g, t);
                if (g[static_cast<std::size_t>(s.func(static_cast<int>(f), t.data()))] != s.func(static_cast<int>(f), gt.data()))
                    return false;
            }
        }
        return true;
    };
    auto rec = [&](auto&& self, int i) -> void {
        if (i == n) {
            if (functions_ok()) out.elements.push_back(g);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)] || profile[static_cast<std::size_t>(i)] != profile[static_cast<std::size_t>(v)]) continue;
            g[static_cast<std::size_t>(i)] = v;
            bool ok = true;
            for (int j = 0; j < i && ok; ++j) ok = s.d(i, j) == s.d(v, g[static_cast<std::size_t>(j)]);
            for (const auto& [q, t] : checks[static_cast<std::size_t>(i)]) {
                if (!ok) break;
                auto gt = apply_perm(g, t);
                ok = s.pred(q, t.data()) == s.pred(q, gt.data());
            }
            if (ok) {
                used[static_cast<std::size_t>(v)] = true;
                self(self, i + 1);
                used[static_cast<std::size_t>(v)] = false;
            }
            g[static_cast<std::size_t>(i)] = -1;
        }
    };
    rec(rec, 0);
    return out;
}

std::vector<int> apply_perm(const Perm& g, const std::vector<int>& t) {
    std::vector<int> out;
    out.reserve(t.size());
    for (int x : t) out.push_back(g[static_cast<std::size_t>(x)]);
    return out;
}

std::vector<std::vector<int>> orbit_members(const AutGroup& g, const std::vector<int>& a) {
    std::set<std::vector<int>> seen;
    for (const auto& p : g.elements) seen.insert(apply_perm(p, a));
    return {seen.begin(), seen.end()};
}

std::size_t tuple_row(const std::vector<int>& t, int points) {
    std::size_t r = 0;
    for (int x : t) r = r * static_cast<std::size_t>(points) + static_cast<std::size_t>(x);
    return r;
}

std::vector<Rational> orbit_distance(const MetricStructure& s, const AutGroup& g, const std::vector<int>& a,
                                     const WeakModulus& omega) {
    const int n = static_cast<int>(a.size());
    auto members = orbit_members(g, a);
    std::vector<Rational> out;
    if (n == 0) return {Rational(0)};
    const Modulus& m = omega.truncation(n);
    std::vector<Rational> r(static_cast<std::size_t>(n));
    for (const auto& b : all_tuples(s.size(), n)) {
        Rational best;
        bool first = true;
        for (const auto& o : members) {
            for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = s.d(b[static_cast<std::size_t>(i)], o[static_cast<std::size_t>(i)]);
            Rational v = m.eval(r);
            if (first || v < best) best = v;
            first = false;
            if (best.is_zero()) break;
        }
        out.push_back(best);
    }
    return out;
}

// ---------------------------------------------------------------- analyzer

OrbitAnalyzer::OrbitAnalyzer(const MetricStructure& s, WeakModulus omega, FragmentOptions opt, int eps_m_max)
    : s_(s), omega_(std::move(omega)), opt_(opt), eps_m_max_(eps_m_max), group_(automorphisms(s)) {}

const std::vector<int>& OrbitAnalyzer::classes(int n) {
    auto it = classes_.find(n);
    if (it != classes_.end()) return it->second;
    auto tuples = all_tuples(s_.size(), n);
    std::vector<int> cls(tuples.size(), -1);
    int next = 0;
    for (std::size_t r = 0; r < tuples.size(); ++r) {
        if (cls[r] >= 0) continue;
        for (const auto& m : orbit_members(group_, tuples[r])) cls[tuple_row(m, s_.size())] = next;
        ++next;
    }
    return classes_.emplace(n, std::move(cls)).first->second;
}

std::vector<std::vector<int>> OrbitAnalyzer::representatives(int n) {
    const auto& cls = classes(n);
    auto tuples = all_tuples(s_.size(), n);
    std::vector<std::vector<int>> out;
    for (std::size_t r = 0; r < tuples.size(); ++r)
        if (cls[r] == static_cast<int>(out.size())) out.push_back(tuples[r]);
    return out;
}

std::vector<int> OrbitAnalyzer::representative(const std::vector<int>& a) {
    return orbit_members(group_, a).front();
}

const Fragment& OrbitAnalyzer::fragment(int n) {
    auto it = fragments_.find(n);
    if (it != fragments_.end()) return it->second;
    return fragments_.emplace(n, generate_fragment(s_, n, omega_, opt_)).first->second;
}

const std::vector<std::vector<Rational>>& OrbitAnalyzer::fragment_values(int n) {
    auto it = values_.find(n);
    if (it != values_.end()) return it->second;
    const Fragment& frag = fragment(n);
    auto tuples = all_tuples(s_.size(), n);
    Evaluator ev(s_);
    std::vector<std::vector<Rational>> vals;
    vals.reserve(frag.size());
    for (const auto& e : frag) {
        std::vector<Rational> row;
        row.reserve(tuples.size());
        for (const auto& t : tuples) row.push_back(ev.eval_tuple(e.formula, t));
        vals.push_back(std::move(row));
    }
    return values_.emplace(n, std::move(vals)).first->second;
}

const std::vector<Rational>& OrbitAnalyzer::distances(const std::vector<int>& a) {
    auto it = distances_.find(a);
    if (it != distances_.end()) return it->second;
    return distances_.emplace(a, orbit_distance(s_, group_, a, omega_)).first->second;
}

Formula above(const Formula& phi, const Rational& v) {
    if (v <= phi->bound.lo) return v.is_zero() ? phi : sum(phi, constant(-v));
    return tminus(phi, constant(v));
}

Formula below(const Formula& phi, const Rational& v) {
    if (v >= phi->bound.hi) return sum(constant(v), scale(Rational(-1), phi));
    return tminus(constant(v), phi);
}

const OrbitSynthesis& OrbitAnalyzer::synthesize(const std::vector<int>& a, int level) {
    auto key = std::make_pair(a, level);
    if (auto it = synth_.find(key); it != synth_.end()) return it->second;
    OrbitSynthesis out;
    out.tuple = a;
    out.level = level;
    const int n = static_cast<int>(a.size());
    const auto& cls = classes(n);
    const Fragment& frag = fragment(n);
    const auto& fv = fragment_values(n);
    const std::size_t ra = tuple_row(a, s_.size());
    auto tuples = all_tuples(s_.size(), n);

    std::vector<std::pair<std::size_t, bool>> chosen;
    for (std::size_t b = 0; b < tuples.size() && out.failure.empty(); ++b) {
        if (cls[b] == cls[ra]) continue;
        std::size_t best = frag.size();
        Rational gap(0);
        for (std::size_t k = 0; k < frag.size(); ++k) {
            const bool up = fv[k][b] > fv[k][ra];
            // the downward orientation negates, swapping inf and sup levels
            if (level > 0 && (up ? frag[k].rank.inf_level : frag[k].rank.sup_level) > level) continue;
            Rational g = abs(fv[k][b] - fv[k][ra]);
            if (g > gap) {
                gap = g;
                best = k;
            }
        }
        if (best == frag.size()) {
            out.failure = "fragment does not separate " + s_.tuple_str(a) + " from " + s_.tuple_str(tuples[b]);
            break;
        }
        std::pair<std::size_t, bool> sep{best, fv[best][b] > fv[best][ra]};
        if (std::find(chosen.begin(), chosen.end(), sep) == chosen.end()) chosen.push_back(sep);
    }
    if (!out.failure.empty()) return synth_.emplace(key, std::move(out)).first->second;

    std::vector<Formula> seps;
    for (const auto& [k, up] : chosen) {
        const Rational& v = fv[k][ra];
        seps.push_back(up ? above(frag[k].formula, v) : below(frag[k].formula, v));
        out.separators.push_back((up ? "+" : "-") + frag[k].label);
    }
    out.psi = sup_family_hull(seps);
    out.psi_rank = quant_rank(out.psi);

    Evaluator ev(s_);
    std::vector<Rational> psi_vals;
    for (const auto& t : tuples) psi_vals.push_back(ev.eval_tuple(out.psi, t));
    const auto& dist = distances(a);
    out.zero_set_exact = true;
    Rational M(0), D(0);
    for (std::size_t b = 0; b < tuples.size(); ++b) {
        bool in_orbit = cls[b] == cls[ra];
        if (in_orbit != psi_vals[b].is_zero()) out.zero_set_exact = false;
        if (dist[b] > D) D = dist[b];
        if (!in_orbit && psi_vals[b].sign() > 0) M = max(M, dist[b] / psi_vals[b]);
    }
    out.scale = M;
    out.cap = D;
    out.delta_ok = true;
    for (int m = 0; m <= eps_m_max_; ++m) {
        DeltaRow row{Rational::pow2(-m), ExtRational::infinity()};
        for (std::size_t b = 0; b < tuples.size(); ++b)
            if (dist[b] > row.eps) row.delta = min(row.delta, ExtRational(psi_vals[b]));
        if (!row.delta.is_infinite() && row.delta.value().sign() <= 0) out.delta_ok = false;
        out.delta_table.push_back(row);
    }
    out.predicate = regularize(scale(M, out.psi), omega_, Interval(Rational(0), D), RegMode::Inf, n);
    out.predicate_rank = quant_rank(out.predicate);
    out.predicate_exact = true;
    for (std::size_t b = 0; b < tuples.size(); ++b)
        if (ev.eval_tuple(out.predicate, tuples[b]) != dist[b]) {
            out.predicate_exact = false;
            break;
        }
    out.ok = out.zero_set_exact && out.delta_ok && out.predicate_exact;
    if (!out.ok) out.failure = "certification failed for " + s_.tuple_str(a);
    return synth_.emplace(key, std::move(out)).first->second;
}

// ---------------------------------------------------------------- Scott sentences and rank

namespace {

// chi^1 over Omega-respecting qf formulas. Moduli are monotone and 1-homogeneous, so an
// atom divided by max(1, Δ(1,..,1)) moves by at most max_i d_i <= d_Omega.
Formula chi1(const MetricStructure& s, const WeakModulus& omega, const std::vector<int>& e) {
    const int n = static_cast<int>(e.size());
    Evaluator ev(s);
    std::vector<Formula> devs;
    for (const auto& a : qf_atoms(s.signature(), n, &omega)) {
        Rational k(1);
        if (a->kind != FKind::DOmega && a->modulus.arity() > 0)
            k = max(k, a->modulus.eval(std::vector<Rational>(static_cast<std::size_t>(a->modulus.arity()), Rational(1))));
        const Rational q = Rational(1) / k;
        devs.push_back(fabs(sum(scale(q, a), constant(-(q * ev.eval_tuple(a, e))))));
    }
    return devs.empty() ? zero() : nary_max(devs);
}

}  // namespace

ScottArtifacts scott_sentence(OrbitAnalyzer& an, int max_len, int level) {
    if (max_len < 1) throw std::invalid_argument("scott_sentence: max_len must be at least 1");
    ScottArtifacts out;
    out.max_len = max_len;
    out.level = level;
    const MetricStructure& s = an.structure();
    for (int n = 0; n <= max_len; ++n)
        for (const auto& rep : an.representatives(n)) {
            const OrbitSynthesis& syn = an.synthesize(rep, level);
            if (!syn.ok) {
                out.failure = syn.failure;
                return out;
            }
            out.predicates.push_back(&syn);
        }
    auto P = [&](const std::vector<int>& t) -> Formula { return an.synthesize(an.representative(t), level).predicate; };
    for (int L = 1; L <= max_len; ++L) {
        std::vector<Formula> parts;
        for (int n = 0; n <= L; ++n)
            for (const auto& rep : an.representatives(n)) {
                std::vector<Formula> chis{chi1(s, an.omega(), rep)};
                if (n < L) {
                    std::vector<Formula> forth, back;
                    std::vector<int> ac = rep;
                    ac.push_back(0);
                    for (int c = 0; c < s.size(); ++c) {
                        ac.back() = c;
                        Formula p = P(ac);
                        forth.push_back(inf(n, p));
                        back.push_back(p);
                    }
                    chis.push_back(sup_family_hull(forth));
                    chis.push_back(sup(n, inf_family_hull(back)));
                }
                std::vector<int> xs;
                for (int i = 0; i < n; ++i) xs.push_back(i);
                parts.push_back(sup_block(xs, tminus(nary_max(chis), P(rep))));
            }
        out.sentences.push_back(fmin(one(), sup_family_hull(parts)));
    }
    out.sentence = out.sentences.back();
    out.rank = quant_rank(out.sentence);
    out.ok = true;
    return out;
}

RankResult scott_rank(OrbitAnalyzer& an, int max_len, int max_rank) {
    RankResult out;
    out.max_rank = max_rank;
    out.notes.push_back("rank is relative to the generated fragment and may exceed the true rank");
    for (int lvl = 1; lvl <= max_rank; ++lvl) {
        bool all = true;
        std::vector<std::pair<std::vector<int>, std::string>> wit;
        for (int n = 0; n <= max_len && all; ++n)
            for (const auto& rep : an.representatives(n)) {
                const OrbitSynthesis& syn = an.synthesize(rep, lvl);
                if (!syn.ok || !syn.predicate_rank.within_inf(lvl)) {
                    all = false;
                    break;
                }
                std::string labels;
                for (const auto& l : syn.separators) labels += (labels.empty() ? "" : " ") + l;
                wit.push_back({rep, labels});
            }
        if (all) {
            out.rank = lvl;
            out.witnesses = std::move(wit);
            return out;
        }
    }
    return out;
}

}  // namespace cil
