#include "cil/baf.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace cil {

void require_same_relational(const MetricStructure& A, const MetricStructure& B) {
    if (A.signature() != B.signature()) throw std::invalid_argument("signature mismatch between structures");
    if (!A.signature().relational())
        throw std::invalid_argument("structures with function symbols are not supported by the back-and-forth engine");
}

BafFragment::BafFragment(const Signature& sig, const BafConfig& cfg) : sig_(sig), cfg_(cfg) {}

const std::vector<Formula>& BafFragment::at(int n) {
    auto it = by_len_.find(n);
    if (it != by_len_.end()) return it->second;
    const WeakModulus* w = cfg_.domega_atoms && cfg_.omega.valid() ? &cfg_.omega : nullptr;
    return by_len_.emplace(n, qf_fragment(sig_, n, w, cfg_.connective_depth)).first->second;
}

bool BafSet::contains(const std::vector<int>& a, const std::vector<int>& b, int points_a, int points_b) const {
    if (a.size() != b.size() || a.size() >= pairs.size()) return false;
    return pairs[a.size()].count({tuple_row(a, points_a), tuple_row(b, points_b)}) > 0;
}

std::size_t BafSet::total() const {
    std::size_t n = 0;
    for (const auto& p : pairs) n += p.size();
    return n;
}

namespace {

// Fragment values per tuple, computed on demand.
class ValueCache {
public:
    ValueCache(const MetricStructure& s, BafFragment& frag) : s_(s), frag_(frag), ev_(s) {}

    const std::vector<Rational>& values(const std::vector<int>& t) {
        auto key = std::make_pair(static_cast<int>(t.size()), tuple_row(t, s_.size()));
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        std::vector<Rational> v;
        for (const auto& f : frag_.at(static_cast<int>(t.size()))) v.push_back(ev_.eval_tuple(f, t));
        return cache_.emplace(key, std::move(v)).first->second;
    }

private:
    const MetricStructure& s_;
    BafFragment& frag_;
    Evaluator ev_;
    std::map<std::pair<int, std::size_t>, std::vector<Rational>> cache_;
};

// index of the first fragment formula with gap >= t, or -1
int condition1_failure(ValueCache& ca, ValueCache& cb, const std::vector<int>& a, const std::vector<int>& b,
                       const Rational& t) {
    const auto& va = ca.values(a);
    const auto& vb = cb.values(b);
    for (std::size_t k = 0; k < va.size(); ++k)
        if (abs(va[k] - vb[k]) >= t) return static_cast<int>(k);
    return -1;
}

std::vector<int> extend(std::vector<int> t, int c) {
    t.push_back(c);
    return t;
}

}  // namespace

BafSet baf_compute(const MetricStructure& A, const MetricStructure& B, const BafConfig& cfg) {
    require_same_relational(A, B);
    if (cfg.t.sign() <= 0) throw std::invalid_argument("t must be positive");
    BafFragment frag(A.signature(), cfg);
    ValueCache ca(A, frag), cb(B, frag);
    const int L = cfg.max_tuple_len;
    using PairSet = std::set<std::pair<std::size_t, std::size_t>>;
    std::vector<std::vector<std::pair<std::vector<int>, std::vector<int>>>> level0(static_cast<std::size_t>(L) + 1);
    level0[0].push_back({{}, {}});
    std::size_t total = 1;
    for (int n = 0; n < L; ++n)
        for (const auto& [a, b] : level0[static_cast<std::size_t>(n)])
            for (int c = 0; c < A.size(); ++c)
                for (int d = 0; d < B.size(); ++d) {
                    auto ac = extend(a, c), bd = extend(b, d);
                    if (condition1_failure(ca, cb, ac, bd, cfg.t) < 0) {
                        level0[static_cast<std::size_t>(n) + 1].push_back({ac, bd});
                        if (++total > 2'000'000) throw std::length_error("baf_compute: more than 2000000 pairs at level 0");
                    }
                }
    std::vector<PairSet> cur(static_cast<std::size_t>(L) + 1);
    for (int n = 0; n <= L; ++n)
        for (const auto& [a, b] : level0[static_cast<std::size_t>(n)]) cur[static_cast<std::size_t>(n)].insert({tuple_row(a, A.size()), tuple_row(b, B.size())});
    for (int k = 1; k <= cfg.depth; ++k) {
        std::vector<PairSet> next(static_cast<std::size_t>(L) + 1);
        next[static_cast<std::size_t>(L)] = cur[static_cast<std::size_t>(L)];
        for (int n = 0; n < L; ++n) {
            const PairSet& up = cur[static_cast<std::size_t>(n) + 1];
            for (const auto& [a, b] : level0[static_cast<std::size_t>(n)]) {
                std::pair<std::size_t, std::size_t> key{tuple_row(a, A.size()), tuple_row(b, B.size())};
                if (!cur[static_cast<std::size_t>(n)].count(key)) continue;
                auto has = [&](int c, int d) {
                    const auto na = static_cast<std::size_t>(A.size()), nb = static_cast<std::size_t>(B.size());
                    return up.count({key.first * na + static_cast<std::size_t>(c), key.second * nb + static_cast<std::size_t>(d)}) > 0;
                };
                bool ok = true;
                for (int c = 0; c < A.size() && ok; ++c) {
                    bool found = false;
                    for (int d = 0; d < B.size() && !found; ++d) found = has(c, d);
                    ok = found;
                }
                for (int d = 0; d < B.size() && ok; ++d) {
                    bool found = false;
                    for (int c = 0; c < A.size() && !found; ++c) found = has(c, d);
                    ok = found;
                }
                if (ok) next[static_cast<std::size_t>(n)].insert(key);
            }
        }
        cur = std::move(next);
    }
    BafSet out;
    out.depth = cfg.depth;
    out.max_tuple_len = L;
    out.pairs = std::move(cur);
    return out;
}

namespace {

enum class Reason { Win, Cond1, Forth, Back };

struct Node {
    Reason reason = Reason::Win;
    int witness = -1;  // fragment index or point
};

class Game {
public:
    Game(const MetricStructure& A, const MetricStructure& B, const BafConfig& cfg)
        : A_(A), B_(B), cfg_(cfg), frag_(A.signature(), cfg), ca_(A, frag_), cb_(B, frag_) {}

    const Node& play(const std::vector<int>& a, const std::vector<int>& b, int k) {
        const int n = static_cast<int>(a.size());
        Key key{n, tuple_row(a, A_.size()), tuple_row(b, B_.size()), k};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        Node node;
        int f = condition1_failure(ca_, cb_, a, b, cfg_.t);
        if (f >= 0) {
            node = {Reason::Cond1, f};
        } else if (k > 0 && n < cfg_.max_tuple_len) {
            for (int c = 0; c < A_.size() && node.reason == Reason::Win; ++c) {
                bool answered = false;
                for (int d = 0; d < B_.size() && !answered; ++d) answered = play(extend(a, c), extend(b, d), k - 1).reason == Reason::Win;
                if (!answered) node = {Reason::Forth, c};
            }
            for (int d = 0; d < B_.size() && node.reason == Reason::Win; ++d) {
                bool answered = false;
                for (int c = 0; c < A_.size() && !answered; ++c) answered = play(extend(a, c), extend(b, d), k - 1).reason == Reason::Win;
                if (!answered) node = {Reason::Back, d};
            }
        }
        max_len_seen_ = std::max(max_len_seen_, n);
        return memo_.emplace(key, node).first->second;
    }

    // zero on the A side at a when a_zero, else zero on the B side at b; the other side is >= t
    Formula sentence(const std::vector<int>& a, const std::vector<int>& b, int k, bool a_zero) {
        const Node node = play(a, b, k);
        const int n = static_cast<int>(a.size());
        if (node.reason == Reason::Cond1) {
            const Formula& phi = frag_.at(n)[static_cast<std::size_t>(node.witness)];
            Rational va = ca_.values(a)[static_cast<std::size_t>(node.witness)];
            Rational vb = cb_.values(b)[static_cast<std::size_t>(node.witness)];
            const Rational& zero_at = a_zero ? va : vb;
            const Rational& other = a_zero ? vb : va;
            return other > zero_at ? above(phi, zero_at) : below(phi, zero_at);
        }
        std::vector<Formula> kids;
        auto add = [&](Formula f) {
            for (const auto& g : kids)
                if (same(f, g)) return;
            kids.push_back(std::move(f));
        };
        if (node.reason == Reason::Forth) {
            for (int d = 0; d < B_.size(); ++d) add(sentence(extend(a, node.witness), extend(b, d), k - 1, a_zero));
            // inf_y sup_d on the zero side; sup_y inf_d otherwise
            return a_zero ? inf(n, sup_family_hull(kids)) : sup(n, inf_family_hull(kids));
        }
        for (int c = 0; c < A_.size(); ++c) add(sentence(extend(a, c), extend(b, node.witness), k - 1, a_zero));
        return a_zero ? sup(n, inf_family_hull(kids)) : inf(n, sup_family_hull(kids));
    }

    std::vector<std::string> line(std::vector<int> a, std::vector<int> b, int k) {
        std::vector<std::string> out;
        while (true) {
            const Node node = play(a, b, k);
            if (node.reason == Reason::Cond1) {
                out.push_back("cond1 " + to_string(frag_.at(static_cast<int>(a.size()))[static_cast<std::size_t>(node.witness)]));
                return out;
            }
            if (node.reason == Reason::Win) return out;
            // every reply loses, so follow the first one
            if (node.reason == Reason::Forth) {
                out.push_back("forth " + A_.point(node.witness));
                a.push_back(node.witness);
                b.push_back(0);
            } else {
                out.push_back("back " + B_.point(node.witness));
                b.push_back(node.witness);
                a.push_back(0);
            }
            --k;
        }
    }

    std::size_t fragment_size() { return frag_.size(max_len_seen_); }

private:
    struct Key {
        int n;
        std::size_t ra, rb;
        int k;
        bool operator==(const Key& o) const { return n == o.n && ra == o.ra && rb == o.rb && k == o.k; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& x) const {
            return ((x.ra * 1000003u + x.rb) * 131u + static_cast<std::size_t>(x.n)) * 131u + static_cast<std::size_t>(x.k);
        }
    };
    const MetricStructure& A_;
    const MetricStructure& B_;
    BafConfig cfg_;
    BafFragment frag_;
    ValueCache ca_, cb_;
    std::unordered_map<Key, Node, KeyHash> memo_;
    int max_len_seen_ = 0;
};

}  // namespace

BafVerdict approx_iso_decide(const MetricStructure& A, const MetricStructure& B, const BafConfig& cfg) {
    require_same_relational(A, B);
    if (cfg.t.sign() <= 0) throw std::invalid_argument("t must be positive");
    Game game(A, B, cfg);
    BafVerdict v;
    int failing = -1;
    for (int k = 0; k <= cfg.depth; ++k)
        if (game.play({}, {}, k).reason != Reason::Win) {
            failing = k;
            break;
        }
    v.fragment_size = game.fragment_size();
    if (failing < 0) {
        v.yes = true;
        v.depth = cfg.depth;
        return v;
    }
    v.depth = failing;
    Node root = game.play({}, {}, failing);
    v.sentence = game.sentence({}, {}, failing, root.reason != Reason::Back);
    v.witness = game.line({}, {}, failing);
    v.value_a = eval(v.sentence, A, {});
    v.value_b = eval(v.sentence, B, {});
    return v;
}

// ---------------------------------------------------------------- bijection search

namespace {

struct Discrepancy {
    Rational value;
    std::string where;
};

}  // namespace

IsoResult extract_iso(const MetricStructure& A, const MetricStructure& B) {
    if (A.size() != B.size()) throw std::invalid_argument("extract_iso: structures differ in size");
    if (A.signature() != B.signature()) throw std::invalid_argument("signature mismatch between structures");
    const int n = A.size();
    const Signature& sig = A.signature();
    std::vector<std::vector<std::pair<int, std::vector<int>>>> checks(static_cast<std::size_t>(n));
    for (std::size_t q = 0; q < sig.predicates().size(); ++q)
        for (const auto& t : all_tuples(n, sig.predicates()[q].arity))
            if (!t.empty()) checks[static_cast<std::size_t>(*std::max_element(t.begin(), t.end()))].push_back({static_cast<int>(q), t});

    IsoResult best;
    Perm g(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    Discrepancy best_d;
    bool have = false;

    auto finish = [&](const Discrepancy& cur) {
        Discrepancy d = cur;
        for (std::size_t f = 0; f < sig.functions().size(); ++f)
            for (const auto& t : all_tuples(n, sig.functions()[f].arity)) {
                auto gt = apply_perm(g, t);
                Rational v = B.d(g[static_cast<std::size_t>(A.func(static_cast<int>(f), t.data()))], B.func(static_cast<int>(f), gt.data()));
                if (v > d.value) d = {v, "d(g(" + sig.functions()[f].name + A.tuple_str(t) + ")," + sig.functions()[f].name + "(g" + A.tuple_str(t) + "))"};
            }
        if (!have || d.value < best_d.value) {
            have = true;
            best_d = d;
            best.bijection = g;
        }
    };
    auto rec = [&](auto&& self, int i, const Discrepancy& cur) -> void {
        if (have && (best_d.value.is_zero() || cur.value >= best_d.value)) return;
        if (i == n) {
            finish(cur);
            return;
        }
        for (int v = 0; v < n; ++v) {
            if (used[static_cast<std::size_t>(v)]) continue;
            g[static_cast<std::size_t>(i)] = v;
            Discrepancy d = cur;
            for (int j = 0; j < i; ++j) {
                Rational x = abs(A.d(i, j) - B.d(v, g[static_cast<std::size_t>(j)]));
                if (x > d.value) d = {x, "d(" + A.point(i) + "," + A.point(j) + ")"};
            }
            for (const auto& [q, t] : checks[static_cast<std::size_t>(i)]) {
                auto gt = apply_perm(g, t);
                Rational x = abs(A.pred(q, t.data()) - B.pred(q, gt.data()));
                if (x > d.value) d = {x, sig.predicates()[static_cast<std::size_t>(q)].name + A.tuple_str(t)};
            }
            used[static_cast<std::size_t>(v)] = true;
            self(self, i + 1, d);
            used[static_cast<std::size_t>(v)] = false;
            g[static_cast<std::size_t>(i)] = -1;
        }
    };
    rec(rec, 0, Discrepancy{Rational(0), ""});
    best.found = have;
    best.discrepancy = best_d.value;
    best.worst = best_d.where;
    return best;
}

bool brute_force_isomorphic(const MetricStructure& A, const MetricStructure& B) {
    if (A.size() != B.size() || A.signature() != B.signature()) return false;
    const int n = A.size();
    const Signature& sig = A.signature();
    Perm g(static_cast<std::size_t>(n));
    std::iota(g.begin(), g.end(), 0);
    do {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i)
            for (int j = 0; j < n && ok; ++j) ok = A.d(i, j) == B.d(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
        for (std::size_t q = 0; q < sig.predicates().size() && ok; ++q)
            for (const auto& t : all_tuples(n, sig.predicates()[q].arity)) {
                auto gt = apply_perm(g, t);
                if (A.pred(static_cast<int>(q), t.data()) != B.pred(static_cast<int>(q), gt.data())) {
                    ok = false;
                    break;
                }
            }
        for (std::size_t f = 0; f < sig.functions().size() && ok; ++f)
            for (const auto& t : all_tuples(n, sig.functions()[f].arity)) {
                auto gt = apply_perm(g, t);
                if (g[static_cast<std::size_t>(A.func(static_cast<int>(f), t.data()))] != B.func(static_cast<int>(f), gt.data())) {
                    ok = false;
                    break;
                }
            }
        if (ok) return true;
    } while (std::next_permutation(g.begin(), g.end()));
    return false;
}

// ---------------------------------------------------------------- K(Omega,t)

KSetReport k_set(const MetricStructure& A, const OrbitPredicates& preds, const Rational& t, int max_len,
                 const WeakModulus& omega) {
    if (t.sign() <= 0) throw std::invalid_argument("t must be positive");
    KSetReport rep;
    rep.set.depth = 0;
    rep.set.max_tuple_len = max_len;
    rep.set.pairs.resize(static_cast<std::size_t>(max_len) + 1);
    Evaluator ev(A);
    for (int n = 0; n <= max_len; ++n) {
        auto tuples = all_tuples(A.size(), n);
        for (std::size_t ra = 0; ra < tuples.size(); ++ra) {
            Formula p = preds(tuples[ra]);
            if (!p) throw std::invalid_argument("missing orbit predicate for " + A.tuple_str(tuples[ra]));
            for (std::size_t rb = 0; rb < tuples.size(); ++rb)
                if (ev.eval_tuple(p, tuples[rb]) < t) rep.set.pairs[static_cast<std::size_t>(n)].insert({ra, rb});
        }
    }
    auto note = [&](std::string msg) {
        if (rep.violations.size() < 10) rep.violations.push_back(std::move(msg));
    };
    rep.condition1 = rep.forth = rep.back = true;
    for (int n = 0; n <= max_len; ++n) {
        auto tuples = all_tuples(A.size(), n);
        auto atoms = qf_atoms(A.signature(), n, &omega);
        for (const auto& [ra, rb] : rep.set.pairs[static_cast<std::size_t>(n)]) {
            const auto& a = tuples[ra];
            const auto& b = tuples[rb];
            for (const auto& f : atoms)
                if (abs(ev.eval_tuple(f, a) - ev.eval_tuple(f, b)) >= t) {
                    rep.condition1 = false;
                    note("condition (1): " + to_string(f) + " separates " + A.tuple_str(a) + " and " + A.tuple_str(b));
                    break;
                }
            if (n == max_len) continue;
            const auto& up = rep.set.pairs[static_cast<std::size_t>(n) + 1];
            const std::size_t N = static_cast<std::size_t>(A.size());
            for (std::size_t c = 0; c < N; ++c) {
                bool found = false;
                for (std::size_t d = 0; d < N && !found; ++d) found = up.count({ra * N + c, rb * N + d}) > 0;
                if (!found) {
                    rep.forth = false;
                    note("forth: no answer to " + A.point(static_cast<int>(c)) + " at " + A.tuple_str(a) + "," + A.tuple_str(b));
                }
                found = false;
                for (std::size_t d = 0; d < N && !found; ++d) found = up.count({ra * N + d, rb * N + c}) > 0;
                if (!found) {
                    rep.back = false;
                    note("back: no answer to " + A.point(static_cast<int>(c)) + " at " + A.tuple_str(a) + "," + A.tuple_str(b));
                }
            }
        }
    }
    return rep;
}

}  // namespace cil
