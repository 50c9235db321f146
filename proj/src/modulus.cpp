#include "cil/modulus.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace cil {

struct Modulus::Node {
    Kind kind;
    int idx = 0;                   // Proj
    Rational q;                    // Scale
    std::vector<NodePtr> kids;     // Scale: 1, Sum/Max: 2, Comp: outer then inner
    int max_used = -1;
    std::size_t hash = 0;
};

namespace {

using NodePtr = Modulus::NodePtr;
using Node = Modulus::Node;
using Kind = Modulus::Kind;

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

NodePtr finish(Node n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 7919u;
    h = mix(h, static_cast<std::size_t>(n.idx));
    if (n.kind == Kind::Scale) h = mix(h, n.q.hash());
    for (const auto& k : n.kids) h = mix(h, k->hash);
    n.hash = h;
    if (n.kind == Kind::Proj) n.max_used = n.idx;
    else if (n.kind == Kind::Comp) {
        for (std::size_t i = 1; i < n.kids.size(); ++i) n.max_used = std::max(n.max_used, n.kids[i]->max_used);
    } else {
        for (const auto& k : n.kids) n.max_used = std::max(n.max_used, k->max_used);
    }
    return std::make_shared<const Node>(std::move(n));
}

bool same(const NodePtr& a, const NodePtr& b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->kind != b->kind || a->idx != b->idx || a->kids.size() != b->kids.size()) return false;
    if (a->kind == Kind::Scale && a->q != b->q) return false;
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!same(a->kids[i], b->kids[i])) return false;
    return true;
}

const NodePtr& zero_node() {
    static const NodePtr z = finish(Node{Kind::Zero});
    return z;
}

NodePtr mk_proj(int i) {
    Node n{Kind::Proj};
    n.idx = i;
    return finish(std::move(n));
}

NodePtr mk_scale(const Rational& q, const NodePtr& m) {
    if (q.sign() < 0) throw std::invalid_argument("modulus scaling must be nonnegative");
    if (q.is_zero() || m->kind == Kind::Zero) return zero_node();
    if (q == Rational(1)) return m;
    if (m->kind == Kind::Scale) return mk_scale(q * m->q, m->kids[0]);
    Node n{Kind::Scale};
    n.q = q;
    n.kids = {m};
    return finish(std::move(n));
}

NodePtr mk_sum(const NodePtr& a, const NodePtr& b) {
    if (a->kind == Kind::Zero) return b;
    if (b->kind == Kind::Zero) return a;
    Node n{Kind::Sum};
    n.kids = {a, b};
    return finish(std::move(n));
}

NodePtr mk_max(const NodePtr& a, const NodePtr& b) {
    if (a->kind == Kind::Zero) return b;
    if (b->kind == Kind::Zero) return a;
    if (same(a, b)) return a;
    Node n{Kind::Max};
    n.kids = {a, b};
    return finish(std::move(n));
}

NodePtr mk_comp(const NodePtr& outer, const std::vector<NodePtr>& inner) {
    if (outer->kind == Kind::Zero) return zero_node();
    if (std::all_of(inner.begin(), inner.end(), [](const NodePtr& x) { return x->kind == Kind::Zero; }))
        return zero_node();
    if (outer->kind == Kind::Proj) return inner.at(static_cast<std::size_t>(outer->idx));
    bool identity = true;
    for (std::size_t j = 0; j < inner.size() && identity; ++j)
        identity = inner[j]->kind == Kind::Proj && inner[j]->idx == static_cast<int>(j);
    if (identity) return outer;
    Node n{Kind::Comp};
    n.kids.reserve(inner.size() + 1);
    n.kids.push_back(outer);
    n.kids.insert(n.kids.end(), inner.begin(), inner.end());
    return finish(std::move(n));
}

// map[j] = new coordinate for old coordinate j, or -1 to substitute zero.
NodePtr remap(const NodePtr& e, const std::vector<int>& map) {
    if (e->max_used < 0) return e;
    switch (e->kind) {
    case Kind::Zero: return e;
    case Kind::Proj: {
        int t = e->idx < static_cast<int>(map.size()) ? map[static_cast<std::size_t>(e->idx)] : -1;
        return t < 0 ? zero_node() : mk_proj(t);
    }
    case Kind::Scale: return mk_scale(e->q, remap(e->kids[0], map));
    case Kind::Sum: return mk_sum(remap(e->kids[0], map), remap(e->kids[1], map));
    case Kind::Max: return mk_max(remap(e->kids[0], map), remap(e->kids[1], map));
    case Kind::Comp: {
        std::vector<NodePtr> inner;
        for (std::size_t i = 1; i < e->kids.size(); ++i) inner.push_back(remap(e->kids[i], map));
        return mk_comp(e->kids[0], inner);
    }
    }
    return e;
}

Rational eval_node(const Node& e, const std::vector<Rational>& r) {
    switch (e.kind) {
    case Kind::Zero: return Rational(0);
    case Kind::Proj: return r[static_cast<std::size_t>(e.idx)];
    case Kind::Scale: return e.q * eval_node(*e.kids[0], r);
    case Kind::Sum: return eval_node(*e.kids[0], r) + eval_node(*e.kids[1], r);
    case Kind::Max: return max(eval_node(*e.kids[0], r), eval_node(*e.kids[1], r));
    case Kind::Comp: {
        std::vector<Rational> inner;
        inner.reserve(e.kids.size() - 1);
        for (std::size_t i = 1; i < e.kids.size(); ++i) inner.push_back(eval_node(*e.kids[i], r));
        return eval_node(*e.kids[0], inner);
    }
    }
    return Rational(0);
}

bool is_primary(const Node& e) { return e.kind == Kind::Proj || e.kind == Kind::Zero || e.kind == Kind::Max; }

void print(const Node& e, std::ostream& os) {
    switch (e.kind) {
    case Kind::Zero: os << "0"; return;
    case Kind::Proj: os << "r" << e.idx; return;
    case Kind::Scale:
        os << e.q.str() << "*";
        if (e.kids[0]->kind == Kind::Sum) {
            os << "(";
            print(*e.kids[0], os);
            os << ")";
        } else {
            print(*e.kids[0], os);
        }
        return;
    case Kind::Sum:
        print(*e.kids[0], os);
        os << "+";
        if (e.kids[1]->kind == Kind::Sum) {
            os << "(";
            print(*e.kids[1], os);
            os << ")";
        } else {
            print(*e.kids[1], os);
        }
        return;
    case Kind::Max:
        os << "max(";
        print(*e.kids[0], os);
        os << ",";
        print(*e.kids[1], os);
        os << ")";
        return;
    case Kind::Comp:
        if (is_primary(*e.kids[0])) {
            print(*e.kids[0], os);
        } else {
            os << "(";
            print(*e.kids[0], os);
            os << ")";
        }
        os << " o (";
        for (std::size_t i = 1; i < e.kids.size(); ++i) {
            if (i > 1) os << ",";
            print(*e.kids[i], os);
        }
        os << ")";
        return;
    }
}

class Parser {
public:
    explicit Parser(std::string_view s) : s_(s) {}

    NodePtr parse_all() {
        NodePtr e = sum();
        skip();
        if (pos_ != s_.size()) fail("trailing input");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("modulus parse error at offset " + std::to_string(pos_) + ": " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    bool at_word(std::string_view w) {
        skip();
        if (s_.substr(pos_, w.size()) != w) return false;
        std::size_t end = pos_ + w.size();
        return end >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[end]));
    }

    NodePtr sum() {
        NodePtr e = comp();
        while (eat('+')) e = mk_sum(e, comp());
        return e;
    }
    NodePtr comp() {
        NodePtr e = unary();
        while (at_word("o")) {
            pos_ += 1;
            expect('(');
            std::vector<NodePtr> inner{sum()};
            while (eat(',')) inner.push_back(sum());
            expect(')');
            if (e->max_used >= static_cast<int>(inner.size()))
                fail("composition outer uses r" + std::to_string(e->max_used) + " but has " +
                     std::to_string(inner.size()) + " arguments");
            e = mk_comp(e, inner);
        }
        return e;
    }
    NodePtr unary() {
        skip();
        if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '-')) {
            std::size_t start = pos_;
            if (s_[pos_] == '-') ++pos_;
            while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '/')) ++pos_;
            auto q = Rational::try_parse(s_.substr(start, pos_ - start));
            if (!q) fail("bad rational");
            if (eat('*')) {
                if (q->sign() < 0) fail("negative modulus scaling");
                return mk_scale(*q, unary());
            }
            if (!q->is_zero()) fail("bare constant other than 0");
            return zero_node();
        }
        return primary();
    }
    NodePtr primary() {
        skip();
        if (eat('(')) {
            NodePtr e = sum();
            expect(')');
            return e;
        }
        if (at_word("max")) {
            pos_ += 3;
            expect('(');
            NodePtr a = sum();
            expect(',');
            NodePtr b = sum();
            expect(')');
            return mk_max(a, b);
        }
        if (pos_ < s_.size() && s_[pos_] == 'r') {
            ++pos_;
            std::size_t start = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (start == pos_) fail("expected coordinate index after 'r'");
            return mk_proj(std::stoi(std::string(s_.substr(start, pos_ - start))));
        }
        fail("unexpected input");
    }
};

}  // namespace

Modulus::Modulus() : arity_(0), e_(zero_node()) {}

Modulus::Kind Modulus::kind() const { return e_->kind; }

Modulus Modulus::zero(int arity) { return Modulus(arity, zero_node()); }

Modulus Modulus::proj(int arity, int i) {
    if (i < 0 || i >= arity) throw std::out_of_range("projection index out of range");
    return Modulus(arity, mk_proj(i));
}

Modulus Modulus::scale(const Rational& q, const Modulus& m) { return Modulus(m.arity_, mk_scale(q, m.e_)); }

Modulus Modulus::sum(const Modulus& a, const Modulus& b) {
    return Modulus(std::max(a.arity_, b.arity_), mk_sum(a.e_, b.e_));
}

Modulus Modulus::max(const Modulus& a, const Modulus& b) {
    return Modulus(std::max(a.arity_, b.arity_), mk_max(a.e_, b.e_));
}

Modulus Modulus::compose(const Modulus& outer, const std::vector<Modulus>& inner) {
    if (static_cast<int>(inner.size()) != outer.arity_)
        throw std::invalid_argument("composition arity mismatch: outer arity " + std::to_string(outer.arity_) +
                                    ", " + std::to_string(inner.size()) + " inner moduli");
    int n = 0;
    std::vector<NodePtr> kids;
    for (const auto& m : inner) {
        n = std::max(n, m.arity_);
        kids.push_back(m.e_);
    }
    if (inner.empty()) return Modulus::zero(0);
    return Modulus(n, mk_comp(outer.e_, kids));
}

Modulus Modulus::diagonal(const Modulus& m) {
    if (m.arity_ == 0) return Modulus::zero(1);
    std::vector<Modulus> inner(static_cast<std::size_t>(m.arity_), Modulus::proj(1, 0));
    return compose(m, inner);
}

Modulus Modulus::parse(std::string_view text, int arity) {
    NodePtr e = Parser(text).parse_all();
    if (e->max_used >= arity)
        throw std::invalid_argument("modulus '" + std::string(text) + "' uses r" + std::to_string(e->max_used) +
                                    " but arity is " + std::to_string(arity));
    return Modulus(arity, e);
}

bool Modulus::uses(int i) const {
    if (e_->max_used < i) return false;
    std::vector<int> map(static_cast<std::size_t>(arity_));
    for (int j = 0; j < arity_; ++j) map[static_cast<std::size_t>(j)] = j;
    map[static_cast<std::size_t>(i)] = -1;
    return !same(remap(e_, map), e_);
}

int Modulus::max_used() const { return e_->max_used; }

Rational Modulus::eval(const std::vector<Rational>& r) const {
    if (static_cast<int>(r.size()) != arity_)
        throw std::invalid_argument("modulus arity mismatch: expected " + std::to_string(arity_) + " arguments, got " +
                                    std::to_string(r.size()));
    for (const auto& x : r)
        if (x.sign() < 0) throw std::invalid_argument("modulus argument must be nonnegative");
    return eval_node(*e_, r);
}

Modulus Modulus::widened(int n) const {
    if (n < arity_) throw std::invalid_argument("widened to a smaller arity");
    return Modulus(n, e_);
}

Modulus Modulus::substitute_zero(int i) const {
    std::vector<int> map(static_cast<std::size_t>(arity_));
    for (int j = 0; j < arity_; ++j) map[static_cast<std::size_t>(j)] = j == i ? -1 : j;
    return Modulus(arity_, remap(e_, map));
}

Modulus Modulus::narrowed(int n) const {
    if (e_->max_used < n) return Modulus(n, e_);
    std::vector<int> map(static_cast<std::size_t>(arity_));
    for (int j = 0; j < arity_; ++j) map[static_cast<std::size_t>(j)] = j < n ? j : -1;
    return Modulus(n, remap(e_, map));
}

Modulus Modulus::reindexed(const std::vector<int>& map, int new_arity) const {
    for (int t : map)
        if (t >= new_arity) throw std::out_of_range("reindex target out of range");
    return Modulus(new_arity, remap(e_, map));
}

std::string Modulus::str() const {
    std::ostringstream os;
    print(*e_, os);
    return os.str();
}

std::size_t Modulus::hash() const { return e_->hash; }

bool operator==(const Modulus& a, const Modulus& b) { return a.arity_ == b.arity_ && same(a.e_, b.e_); }

// ---------------------------------------------------------------- weak moduli

struct WeakModulus::Impl {
    std::string name;
    Generator gen;
    std::vector<Modulus> table;
    std::vector<Modulus> diagonals;
    bool universal = false;
    mutable std::mutex mu;
    mutable std::map<int, Modulus> cache;
};

WeakModulus WeakModulus::from_generator(std::string name, Generator g) {
    WeakModulus w;
    w.impl_ = std::make_shared<Impl>();
    w.impl_->name = std::move(name);
    w.impl_->gen = std::move(g);
    return w;
}

WeakModulus WeakModulus::from_table(std::string name, std::vector<Modulus> table) {
    for (std::size_t i = 0; i < table.size(); ++i)
        if (table[i].arity() != static_cast<int>(i + 1))
            throw std::invalid_argument("truncation table entry " + std::to_string(i + 1) + " has arity " +
                                        std::to_string(table[i].arity()));
    WeakModulus w;
    w.impl_ = std::make_shared<Impl>();
    w.impl_->name = std::move(name);
    w.impl_->table = std::move(table);
    return w;
}

WeakModulus WeakModulus::universal(const std::vector<Modulus>& atomic_moduli) {
    if (atomic_moduli.empty()) throw std::invalid_argument("universal modulus needs at least one atomic formula");
    auto impl = std::make_shared<Impl>();
    impl->name = "universal";
    impl->universal = true;
    WeakModulus w;
    w.impl_ = impl;
    // D_k for k = 0.. is produced lazily by index; precompute the atomic diagonals.
    std::vector<Modulus> atoms;
    for (const auto& m : atomic_moduli) atoms.push_back(Modulus::diagonal(m));
    Modulus two_r = Modulus::scale(Rational(2), Modulus::proj(1, 0));
    auto diag = [atoms, two_r](int k) -> Modulus {
        if (k == 0) return Modulus::proj(1, 0);
        if (k % 2 == 0) return two_r;
        // odd indices cycle through the atomic enumeration
        return atoms[static_cast<std::size_t>((k / 2) % static_cast<int>(atoms.size()))];
    };
    for (int k = 0; k < 16; ++k) impl->diagonals.push_back(diag(k));
    impl->gen = [diag](int n) {
        Modulus total = Modulus::zero(n);
        Modulus running = Modulus::zero(1);
        for (int i = 0; i < n; ++i) {
            running = Modulus::max(running, diag(i));
            Modulus term = Modulus::compose(running, {Modulus::proj(n, i)});
            total = Modulus::sum(total, Modulus::scale(Rational(i + 1), term));
        }
        return total.widened(n);
    };
    return w;
}

const std::string& WeakModulus::name() const { return impl_->name; }

int WeakModulus::max_arity() const { return impl_->gen ? -1 : static_cast<int>(impl_->table.size()); }

const Modulus& WeakModulus::truncation(int n) const {
    if (!impl_) throw std::logic_error("empty weak modulus");
    if (n < 0) throw std::invalid_argument("negative truncation arity");
    std::lock_guard<std::mutex> lock(impl_->mu);
    auto it = impl_->cache.find(n);
    if (it != impl_->cache.end()) return it->second;
    Modulus m;
    if (n == 0) {
        m = Modulus::zero(0);
    } else if (impl_->gen) {
        m = impl_->gen(n);
    } else {
        if (n > static_cast<int>(impl_->table.size()))
            throw std::out_of_range("truncation at " + std::to_string(n) + " not available in weak modulus '" +
                                    impl_->name + "'");
        m = impl_->table[static_cast<std::size_t>(n - 1)];
    }
    return impl_->cache.emplace(n, m).first->second;
}

const std::vector<Modulus>& WeakModulus::diagonals() const { return impl_->diagonals; }

bool WeakModulus::is_universal() const { return impl_ && impl_->universal; }

std::vector<std::string> coherence_violations(const WeakModulus& w, int n_max, const std::vector<Rational>& grid,
                                              std::size_t max_samples) {
    std::vector<std::string> out;
    for (int n = 1; n < n_max; ++n) {
        if (w.max_arity() >= 0 && n + 1 > w.max_arity()) break;
        const Modulus& a = w.truncation(n);
        const Modulus& b = w.truncation(n + 1);
        std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
        std::size_t total = 1;
        for (int i = 0; i < n && total <= max_samples; ++i) total *= grid.size();
        std::size_t stride = total > max_samples ? total / max_samples + 1 : 1;
        for (std::size_t s = 0; s < total; s += stride) {
            std::size_t x = s;
            std::vector<Rational> r;
            for (int i = 0; i < n; ++i) {
                r.push_back(grid[x % grid.size()]);
                x /= grid.size();
            }
            Rational va = a.eval(r);
            r.push_back(Rational(0));
            Rational vb = b.eval(r);
            if (va != vb) {
                out.push_back("coherence at n=" + std::to_string(n) + ": " + va.str() + " != " + vb.str());
                break;
            }
        }
    }
    return out;
}

}  // namespace cil
