#include "cil/corpus.hpp"

#include "cil/eval.hpp"

#include <algorithm>
#include <numeric>

namespace cil {

namespace {

DiscreteEncoding random_classical(std::mt19937_64& rng, int n, bool with_p, bool with_e, double p_density, double e_density) {
    std::bernoulli_distribution pd(p_density), ed(e_density);
    DiscreteEncoding c;
    for (int i = 0; i < n; ++i) c.points.push_back("p" + std::to_string(i));
    ClassicalRelation P{"P", 1, {}}, E{"E", 2, {}};
    for (int i = 0; i < n; ++i) P.table.push_back(with_p && pd(rng) ? 0 : 1);
    for (int i = 0; i < n * n; ++i) E.table.push_back(with_e && ed(rng) ? 0 : 1);
    c.relations = {P, E};
    return c;
}

DiscreteEncoding graph(int n, const std::vector<std::pair<int, int>>& edges, const std::vector<int>& marked) {
    DiscreteEncoding c;
    for (int i = 0; i < n; ++i) c.points.push_back("v" + std::to_string(i));
    ClassicalRelation P{"P", 1, std::vector<int>(static_cast<std::size_t>(n), 1)};
    ClassicalRelation E{"E", 2, std::vector<int>(static_cast<std::size_t>(n * n), 1)};
    for (int m : marked) P.table[static_cast<std::size_t>(m)] = 0;
    for (auto [a, b] : edges) {
        E.table[static_cast<std::size_t>(a * n + b)] = 0;
        E.table[static_cast<std::size_t>(b * n + a)] = 0;
    }
    c.relations = {P, E};
    return c;
}

}  // namespace

MetricStructure relabel(const MetricStructure& s, const std::vector<int>& perm, const std::string& prefix) {
    const int n = s.size();
    std::vector<int> inv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back(prefix + std::to_string(i) + "_" + s.point(perm[static_cast<std::size_t>(i)]));
    MetricStructure out(s.signature_ptr(), names);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.set_d(i, j, s.d(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]));
    const Signature& sig = s.signature();
    auto mapped = [&](const std::vector<int>& t) {
        std::vector<int> u;
        for (int x : t) u.push_back(perm[static_cast<std::size_t>(x)]);
        return u;
    };
    for (std::size_t p = 0; p < sig.predicates().size(); ++p)
        for (const auto& t : all_tuples(n, sig.predicates()[p].arity)) {
            auto u = mapped(t);
            out.set_pred(static_cast<int>(p), t, s.pred(static_cast<int>(p), u.data()));
        }
    for (std::size_t f = 0; f < sig.functions().size(); ++f)
        for (const auto& t : all_tuples(n, sig.functions()[f].arity)) {
            auto u = mapped(t);
            out.set_func(static_cast<int>(f), t, inv[static_cast<std::size_t>(s.func(static_cast<int>(f), u.data()))]);
        }
    return out;
}

std::vector<NamedStructure> discrete_corpus() {
    std::vector<NamedStructure> out;
    auto add = [&](std::string name, const DiscreteEncoding& c) { out.push_back({std::move(name), encode_discrete(c)}); };
    add("single", graph(1, {}, {}));
    add("single-P", graph(1, {}, {0}));
    add("pair-P00", graph(2, {}, {}));
    add("pair-P01", graph(2, {}, {1}));
    add("pair-edge", graph(2, {{0, 1}}, {}));
    add("triangle", graph(3, {{0, 1}, {1, 2}, {0, 2}}, {}));
    add("path3", graph(3, {{0, 1}, {1, 2}}, {}));
    add("path3-end", graph(3, {{0, 1}, {1, 2}}, {0}));
    add("path3-mid", graph(3, {{0, 1}, {1, 2}}, {1}));
    add("cycle4", graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {}));
    add("matching4", graph(4, {{0, 1}, {2, 3}}, {}));
    add("star4", graph(4, {{0, 1}, {0, 2}, {0, 3}}, {}));
    add("path4", graph(4, {{0, 1}, {1, 2}, {2, 3}}, {}));
    add("cycle5", graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}}, {}));
    add("path5-P", graph(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0, 2}));
    add("bowtie5", graph(5, {{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {2, 4}}, {}));
    std::mt19937_64 rng(20241015);
    for (int k = 0; k < 6; ++k) {
        int n = 2 + k % 4;
        DiscreteEncoding c = random_classical(rng, n, true, true, 0.4, 0.35);
        add("random" + std::to_string(k), c);
    }
    // relabeled copies give isomorphic pairs
    const std::vector<std::pair<std::string, std::vector<int>>> copies{
        {"path3-end", {2, 1, 0}}, {"cycle4", {1, 3, 0, 2}}, {"path5-P", {4, 0, 3, 1, 2}}, {"random3", {4, 2, 0, 1, 3}}, {"random1", {2, 0, 1}}};
    for (const auto& [name, perm] : copies) {
        auto it = std::find_if(out.begin(), out.end(), [&](const NamedStructure& x) { return x.name == name; });
        if (it != out.end() && it->structure.size() == static_cast<int>(perm.size()))
            out.push_back({name + "-relabeled", relabel(it->structure, perm)});
    }
    return out;
}

MetricStructure triangle_p() {
    auto sig = std::make_shared<Signature>();
    sig->add_predicate({"P", 1, Modulus::parse("r0", 1)});
    MetricStructure s(sig, {"a", "b", "c"});
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s.set_d(i, j, i == j ? Rational(0) : Rational(1));
    s.set_pred(0, {0}, Rational(0));
    s.set_pred(0, {1}, Rational(1, 2));
    s.set_pred(0, {2}, Rational(1));
    return s;
}

std::vector<NamedStructure> metric_corpus() {
    auto sig = std::make_shared<Signature>();
    sig->add_predicate({"P", 1, Modulus::parse("r0", 1)});
    sig->add_predicate({"E", 2, Modulus::parse("r0+r1", 2)});
    auto fsig = std::make_shared<Signature>();
    fsig->add_predicate({"P", 1, Modulus::parse("r0", 1)});
    fsig->add_function({"f", 1, Modulus::parse("2*r0", 1)});

    const std::vector<Rational> dists{Rational(1, 2), Rational(3, 4), Rational(1)};
    const std::vector<Rational> vals{Rational(0), Rational(1, 4), Rational(1, 2)};
    std::mt19937_64 rng(7);
    auto pick = [&](const std::vector<Rational>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };

    std::vector<NamedStructure> out;
    for (int k = 0; k < 12; ++k) {
        bool with_f = k >= 9;
        int n = 1 + k % 4;
        std::vector<std::string> pts;
        for (int i = 0; i < n; ++i) pts.push_back("m" + std::to_string(i));
        MetricStructure s(with_f ? SignaturePtr(fsig) : SignaturePtr(sig), pts);
        for (int i = 0; i < n; ++i) {
            s.set_d(i, i, Rational(0));
            for (int j = i + 1; j < n; ++j) {
                Rational v = pick(dists);
                s.set_d(i, j, v);
                s.set_d(j, i, v);
            }
        }
        for (int i = 0; i < n; ++i) s.set_pred(0, {i}, pick(vals));
        if (with_f) {
            for (int i = 0; i < n; ++i) s.set_func(0, {i}, std::uniform_int_distribution<int>(0, n - 1)(rng));
        } else {
            for (const auto& t : all_tuples(n, 2)) s.set_pred(1, t, pick(vals));
        }
        out.push_back({(with_f ? "metric-f" : "metric") + std::to_string(k), std::move(s)});
    }
    out.push_back({"triangle-P", triangle_p()});
    return out;
}

Formula random_formula(const Signature& sig, const WeakModulus& omega, std::mt19937_64& rng, const FormulaGenOptions& opt) {
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    const int pool = opt.max_free + 1;
    auto var = [&]() { return var_term(uni(0, pool - 1)); };
    auto term = [&]() -> TermPtr {
        if (!sig.functions().empty() && uni(0, 3) == 0) {
            int f = uni(0, static_cast<int>(sig.functions().size()) - 1);
            std::vector<TermPtr> args;
            for (int i = 0; i < sig.functions()[static_cast<std::size_t>(f)].arity; ++i) args.push_back(var());
            return app_term(sig, f, std::move(args));
        }
        return var();
    };
    auto leaf = [&]() -> Formula {
        int choice = uni(0, 9);
        if (choice == 0) {
            static const Rational cs[] = {Rational(0), Rational(1, 2), Rational(1), Rational(1, 3)};
            return constant(cs[uni(0, 3)]);
        }
        if (choice == 1 && opt.domega && omega.valid()) {
            std::vector<int> vs(static_cast<std::size_t>(pool));
            std::iota(vs.begin(), vs.end(), 0);
            std::shuffle(vs.begin(), vs.end(), rng);
            return d_omega(omega, 2, {vs[0], vs[1]}, {vs[2 % pool], vs[3 % pool]});
        }
        if (choice <= 3 || sig.predicates().empty()) return atomic(sig, kDistance, {term(), term()});
        int p = uni(0, static_cast<int>(sig.predicates().size()) - 1);
        std::vector<TermPtr> args;
        for (int i = 0; i < sig.predicates()[static_cast<std::size_t>(p)].arity; ++i) args.push_back(term());
        return atomic(sig, p, std::move(args));
    };
    auto gen = [&](auto&& self, int depth) -> Formula {
        if (depth == 0 || uni(0, 4) == 0) return leaf();
        switch (uni(0, 8)) {
        case 0: return sum(self(self, depth - 1), self(self, depth - 1));
        case 1: return fmax(self(self, depth - 1), self(self, depth - 1));
        case 2: return fmin(self(self, depth - 1), self(self, depth - 1));
        case 3: {
            static const Rational qs[] = {Rational(-1), Rational(1, 2), Rational(-1, 2), Rational(2)};
            return scale(qs[uni(0, 3)], self(self, depth - 1));
        }
        case 4: return sup(uni(0, pool - 1), self(self, depth - 1));
        case 5: return inf(uni(0, pool - 1), self(self, depth - 1));
        case 6: return tminus(self(self, depth - 1), self(self, depth - 1));
        default: {
            if (!opt.families) return sup(uni(0, pool - 1), self(self, depth - 1));
            std::vector<Formula> kids;
            int k = uni(2, 3);
            for (int i = 0; i < k; ++i) kids.push_back(self(self, depth - 1));
            return uni(0, 1) ? sup_family_hull(std::move(kids)) : inf_family_hull(std::move(kids));
        }
        }
    };
    Formula f = gen(gen, opt.depth);
    auto fv = free_vars(f);
    while (static_cast<int>(fv.size()) > opt.max_free) {
        f = sup(fv.back(), f);
        fv.pop_back();
    }
    return f;
}

}  // namespace cil
