#include "cil/fragment.hpp"

#include "cil/eval.hpp"

#include <cstdlib>
#include <unordered_set>

namespace cil {

int default_fragment_depth() {
    if (const char* v = std::getenv("CILWB_FRAGMENT_DEPTH")) {
        char* end = nullptr;
        long d = std::strtol(v, &end, 10);
        if (end != v && *end == '\0' && d >= 0 && d <= 8) return static_cast<int>(d);
    }
    return 2;
}

namespace {

std::vector<std::vector<int>> increasing_subsets(int n, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int start) -> void {
        if (static_cast<int>(cur.size()) == k) {
            out.push_back(cur);
            return;
        }
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

// |theta - v| with the common cases folded
Formula deviation(const Formula& theta, const Rational& v) {
    if (v == theta->bound.lo) return v.is_zero() ? theta : sum(theta, constant(-v));
    if (v == theta->bound.hi) return sum(constant(v), scale(Rational(-1), theta));
    return fabs(sum(theta, constant(-v)));
}

}  // namespace

std::vector<Formula> qf_atoms(const Signature& sig, int n, const WeakModulus* omega) {
    std::vector<TermPtr> terms;
    for (int i = 0; i < n; ++i) terms.push_back(var_term(i));
    for (std::size_t f = 0; f < sig.functions().size(); ++f) {
        int k = sig.functions()[f].arity;
        for (const auto& t : all_tuples(n, k)) {
            std::vector<TermPtr> args;
            for (int v : t) args.push_back(var_term(v));
            terms.push_back(app_term(sig, static_cast<int>(f), std::move(args)));
        }
    }
    std::vector<Formula> out;
    const int nt = static_cast<int>(terms.size());
    for (int i = 0; i < nt; ++i)
        for (int j = i + 1; j < nt; ++j) out.push_back(atomic(sig, kDistance, {terms[static_cast<std::size_t>(i)], terms[static_cast<std::size_t>(j)]}));
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
        int k = sig.predicates()[p].arity;
        for (const auto& t : all_tuples(nt, k)) {
            std::vector<TermPtr> args;
            for (int v : t) args.push_back(terms[static_cast<std::size_t>(v)]);
            out.push_back(atomic(sig, static_cast<int>(p), std::move(args)));
        }
    }
    if (omega != nullptr && omega->valid()) {
        for (int k = 2; 2 * k <= n; ++k) {
            auto subs = increasing_subsets(n, k);
            for (const auto& I : subs)
                for (const auto& J : subs) {
                    if (J[0] <= I[0]) continue;
                    bool disjoint = true;
                    for (int a : I)
                        for (int b : J) disjoint = disjoint && a != b;
                    if (disjoint) out.push_back(d_omega(*omega, k, I, J));
                }
        }
    }
    return out;
}

std::vector<Formula> qf_fragment(const Signature& sig, int n, const WeakModulus* omega, int connective_depth) {
    std::vector<Formula> atoms = qf_atoms(sig, n, omega);
    std::vector<Formula> all = atoms;
    std::unordered_set<Formula, FormulaHash, FormulaEq> seen(all.begin(), all.end());
    std::vector<Formula> layer = atoms;
    for (int depth = 0; depth < connective_depth; ++depth) {
        std::vector<Formula> next;
        for (const auto& a : atoms)
            for (const auto& f : layer) {
                if (same(a, f)) continue;
                for (const Formula& g : {fmax(a, f), fmin(a, f), tminus(a, f), tminus(f, a)})
                    if (seen.insert(g).second) next.push_back(g);
            }
        all.insert(all.end(), next.begin(), next.end());
        layer = std::move(next);
    }
    return all;
}

CharacteristicBuilder::CharacteristicBuilder(const MetricStructure& s) : s_(s) {}

const std::vector<Formula>& CharacteristicBuilder::atoms(int n) {
    auto it = atoms_.find(n);
    if (it == atoms_.end()) it = atoms_.emplace(n, qf_atoms(s_.signature(), n, nullptr)).first;
    return it->second;
}

Formula CharacteristicBuilder::gamma(const std::vector<int>& e, int j) {
    auto key = std::make_pair(j, e);
    if (auto it = gamma_.find(key); it != gamma_.end()) return it->second;
    const int n = static_cast<int>(e.size());
    Formula out;
    if (j == 0) {
        Evaluator ev(s_);
        std::vector<Formula> devs;
        for (const auto& a : atoms(n)) devs.push_back(deviation(a, ev.eval_tuple(a, e)));
        out = nary_max(devs);
    } else {
        std::vector<Formula> forth, back;
        std::vector<int> ec = e;
        ec.push_back(0);
        for (int c = 0; c < s_.size(); ++c) {
            ec.back() = c;
            Formula g = gamma(ec, j - 1);
            forth.push_back(inf(n, g));
            back.push_back(g);
        }
        out = nary_max({gamma(e, 0), sup_family_hull(forth), sup(n, inf_family_hull(back))});
    }
    gamma_.emplace(key, out);
    return out;
}

Formula CharacteristicBuilder::diagram(const std::vector<int>& e) {
    if (auto it = diagram_.find(e); it != diagram_.end()) return it->second;
    const int n = static_cast<int>(e.size());
    std::vector<int> full = e;
    std::vector<bool> used(static_cast<std::size_t>(s_.size()), false);
    for (int p : e) used[static_cast<std::size_t>(p)] = true;
    for (int p = 0; p < s_.size(); ++p)
        if (!used[static_cast<std::size_t>(p)]) full.push_back(p);
    const int total = static_cast<int>(full.size());
    Evaluator ev(s_);
    std::vector<std::vector<Formula>> by_top(static_cast<std::size_t>(total) + 1);
    for (const auto& a : atoms(total)) by_top[static_cast<std::size_t>(std::max(a->width - 1, 0))].push_back(deviation(a, ev.eval_tuple(a, full)));
    Formula body;
    for (int k = total - 1; k >= n; --k) {
        auto parts = by_top[static_cast<std::size_t>(k)];
        if (body) parts.push_back(body);
        body = inf(k, nary_max(parts));
    }
    std::vector<Formula> outer;
    for (int k = 0; k < n; ++k)
        for (const auto& f : by_top[static_cast<std::size_t>(k)]) outer.push_back(f);
    if (body) outer.push_back(body);
    Formula out = nary_max(outer);
    diagram_.emplace(e, out);
    return out;
}

Fragment make_fragment(const std::vector<Formula>& fs, const std::string& label) {
    Fragment out;
    for (const auto& f : fs) out.push_back({f, label, quant_rank(f)});
    return out;
}

Fragment generate_fragment(const MetricStructure& s, int n, const WeakModulus& omega, const FragmentOptions& opt) {
    Fragment out;
    std::unordered_set<Formula, FormulaHash, FormulaEq> seen;
    auto add = [&](const Formula& f, std::string label) {
        if (seen.insert(f).second) out.push_back({f, std::move(label), quant_rank(f)});
    };
    CharacteristicBuilder cb(s);
    auto tuples = all_tuples(s.size(), n);
    if (opt.diagrams)
        for (const auto& e : tuples) add(cb.diagram(e), "diagram" + s.tuple_str(e));
    for (const auto& f : qf_fragment(s.signature(), n, opt.domega_atoms ? &omega : nullptr, opt.connective_depth)) add(f, "qf");
    for (int j = 1; j <= opt.ef_depth; ++j)
        for (const auto& e : tuples) add(cb.gamma(e, j), "gamma" + std::to_string(j) + s.tuple_str(e));
    return out;
}

Fragment restrict_inf(const Fragment& f, int level) {
    Fragment out;
    for (const auto& e : f)
        if (e.rank.within_inf(level)) out.push_back(e);
    return out;
}

Fragment restrict_sup(const Fragment& f, int level) {
    Fragment out;
    for (const auto& e : f)
        if (e.rank.within_sup(level)) out.push_back(e);
    return out;
}

}  // namespace cil
