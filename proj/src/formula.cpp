#include "cil/formula.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <sstream>

namespace cil {

namespace {

std::size_t mix(std::size_t h, std::size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

int width_of(VarMask m) { return m == 0 ? 0 : 64 - std::countl_zero(m); }

VarMask bit(int v) {
    if (v < 0 || v >= kMaxVars) throw std::out_of_range("variable index x" + std::to_string(v) + " out of range");
    return VarMask(1) << v;
}

Formula finish(FormulaNode n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 1000003u;
    switch (n.kind) {
    case FKind::Atomic:
        h = mix(h, static_cast<std::size_t>(n.pred + 7));
        for (const auto& t : n.terms) h = mix(h, t->hash);
        break;
    case FKind::Scale: h = mix(h, n.q.hash()); break;
    case FKind::Sup:
    case FKind::Inf: h = mix(h, static_cast<std::size_t>(n.var)); break;
    case FKind::SupN:
    case FKind::InfN:
        h = mix(h, n.bound.lo.hash());
        h = mix(h, n.bound.hi.hash());
        break;
    case FKind::DOmega:
        h = mix(h, static_cast<std::size_t>(n.omega_n));
        for (int x : n.xs) h = mix(h, static_cast<std::size_t>(x));
        for (int y : n.ys) h = mix(h, static_cast<std::size_t>(y) + 101);
        break;
    default: break;
    }
    for (const auto& k : n.kids) h = mix(h, k->hash);
    n.hash = h;
    n.width = width_of(n.free);
    return std::make_shared<const FormulaNode>(std::move(n));
}

bool same_term(const TermPtr& a, const TermPtr& b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->var != b->var || a->func != b->func || a->args.size() != b->args.size()) return false;
    for (std::size_t i = 0; i < a->args.size(); ++i)
        if (!same_term(a->args[i], b->args[i])) return false;
    return true;
}

Formula binary(FKind k, const Formula& a, const Formula& b) {
    FormulaNode n;
    n.kind = k;
    n.kids = {a, b};
    n.free = a->free | b->free;
    n.vars = a->vars | b->vars;
    n.quantified = a->quantified || b->quantified;
    n.modulus = k == FKind::Sum ? Modulus::sum(a->modulus, b->modulus) : Modulus::max(a->modulus, b->modulus);
    if (k == FKind::Sum) n.bound = a->bound + b->bound;
    else if (k == FKind::Max) n.bound = max(a->bound, b->bound);
    else n.bound = min(a->bound, b->bound);
    n.modulus = n.modulus.widened(width_of(n.free));
    return finish(std::move(n));
}

Formula quantifier(FKind k, int var, const Formula& body) {
    FormulaNode n;
    n.kind = k;
    n.var = var;
    n.kids = {body};
    n.free = body->free & ~bit(var);
    n.vars = body->vars | bit(var);
    n.quantified = true;
    n.bound = body->bound;
    int w = width_of(n.free);
    Modulus m = body->modulus;
    if (var < m.arity()) m = m.substitute_zero(var);
    n.modulus = m.arity() >= w ? m.narrowed(w) : m.widened(w);
    return finish(std::move(n));
}

Formula family(FKind k, std::vector<Formula> kids, const Interval& declared) {
    if (kids.empty()) return zero();
    FormulaNode n;
    n.kind = k;
    n.bound = declared;
    Modulus m;
    for (const auto& c : kids) {
        if (!declared.contains(c->bound))
            throw std::invalid_argument("incompatible bounds: child bound " + c->bound.str() + " not within " +
                                        declared.str());
        n.free |= c->free;
        n.vars |= c->vars;
        m = Modulus::max(m, c->modulus);
    }
    n.quantified = true;
    n.modulus = m.widened(width_of(n.free));
    n.kids = std::move(kids);
    return finish(std::move(n));
}

Formula strict_family(FKind k, std::vector<Formula> kids) {
    if (kids.empty()) return zero();
    const Interval b = kids.front()->bound;
    for (const auto& c : kids)
        if (c->bound != b)
            throw std::invalid_argument("incompatible bounds: " + b.str() + " vs " + c->bound.str() + " in family");
    return family(k, std::move(kids), b);
}

Formula hull_family(FKind k, std::vector<Formula> kids) {
    if (kids.empty()) return zero();
    Interval b = kids.front()->bound;
    for (const auto& c : kids) b = b.hull(c->bound);
    return family(k, std::move(kids), b);
}

}  // namespace

// ---------------------------------------------------------------- terms

TermPtr var_term(int i) {
    Term t;
    t.var = i;
    t.free = bit(i);
    t.width = i + 1;
    t.modulus = Modulus::proj(i + 1, i);
    t.hash = mix(17, static_cast<std::size_t>(i));
    return std::make_shared<const Term>(std::move(t));
}

namespace {

TermPtr make_app(int func, const std::string& name, const Modulus& sym_mod, std::vector<TermPtr> args) {
    Term t;
    t.func = func;
    t.name = name;
    t.sym_modulus = sym_mod;
    std::size_t h = mix(31, static_cast<std::size_t>(func));
    for (const auto& a : args) {
        t.free |= a->free;
        h = mix(h, a->hash);
    }
    t.width = width_of(t.free);
    std::vector<Modulus> inner;
    for (const auto& a : args) inner.push_back(a->modulus.widened(t.width));
    t.modulus = args.empty() ? Modulus::zero(t.width) : Modulus::compose(sym_mod, inner).widened(t.width);
    t.args = std::move(args);
    t.hash = h;
    return std::make_shared<const Term>(std::move(t));
}

Formula make_atomic(int pred, const std::string& name, const Modulus& sym_mod, const Interval& bound,
                    std::vector<TermPtr> terms) {
    FormulaNode n;
    n.kind = FKind::Atomic;
    n.pred = pred;
    n.name = name;
    n.sym_modulus = sym_mod;
    for (const auto& t : terms) n.free |= t->free;
    n.vars = n.free;
    int w = width_of(n.free);
    std::vector<Modulus> inner;
    for (const auto& t : terms) inner.push_back(t->modulus.widened(w));
    n.modulus = terms.empty() ? Modulus::zero(w) : Modulus::compose(sym_mod, inner).widened(w);
    n.bound = bound;
    n.terms = std::move(terms);
    return finish(std::move(n));
}

}  // namespace

TermPtr app_term(const Signature& sig, int func, std::vector<TermPtr> args) {
    const auto& sym = sig.functions().at(static_cast<std::size_t>(func));
    if (static_cast<int>(args.size()) != sym.arity)
        throw std::invalid_argument("arity mismatch: " + sym.name + " expects " + std::to_string(sym.arity) +
                                    " arguments, got " + std::to_string(args.size()));
    return make_app(func, sym.name, sym.modulus, std::move(args));
}

// ---------------------------------------------------------------- builders

Formula atomic(const Signature& sig, int pred, std::vector<TermPtr> terms) {
    const PredicateSymbol& sym = sig.predicate(pred);
    if (static_cast<int>(terms.size()) != sym.arity)
        throw std::invalid_argument("arity mismatch: " + sym.name + " expects " + std::to_string(sym.arity) +
                                    " arguments, got " + std::to_string(terms.size()));
    return make_atomic(pred, sym.name, sym.modulus, sym.bound, std::move(terms));
}

Formula distance_atom(int i, int j) {
    static const Signature empty;
    return atomic(empty, kDistance, {var_term(i), var_term(j)});
}

Formula zero() {
    static const Formula z = [] {
        FormulaNode n;
        n.kind = FKind::Zero;
        n.bound = Interval::point(Rational(0));
        return finish(std::move(n));
    }();
    return z;
}

Formula one() {
    static const Formula o = [] {
        FormulaNode n;
        n.kind = FKind::One;
        n.bound = Interval::point(Rational(1));
        return finish(std::move(n));
    }();
    return o;
}

Formula constant(const Rational& r) {
    if (r.is_zero()) return zero();
    if (r == Rational(1)) return one();
    return scale(r, one());
}

Formula sum(const Formula& a, const Formula& b) { return binary(FKind::Sum, a, b); }
Formula fmax(const Formula& a, const Formula& b) { return binary(FKind::Max, a, b); }
Formula fmin(const Formula& a, const Formula& b) { return binary(FKind::Min, a, b); }

Formula scale(const Rational& q, const Formula& a) {
    FormulaNode n;
    n.kind = FKind::Scale;
    n.q = q;
    n.kids = {a};
    n.free = a->free;
    n.vars = a->vars;
    n.quantified = a->quantified;
    n.bound = a->bound.scaled(q);
    n.modulus = Modulus::scale(abs(q), a->modulus);
    return finish(std::move(n));
}

Formula sup(int var, const Formula& a) { return quantifier(FKind::Sup, var, a); }
Formula inf(int var, const Formula& a) { return quantifier(FKind::Inf, var, a); }

Formula sup_block(const std::vector<int>& vars, const Formula& a) {
    Formula f = a;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = sup(*it, f);
    return f;
}

Formula inf_block(const std::vector<int>& vars, const Formula& a) {
    Formula f = a;
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) f = inf(*it, f);
    return f;
}

Formula sup_family(std::vector<Formula> kids) { return strict_family(FKind::SupN, std::move(kids)); }
Formula inf_family(std::vector<Formula> kids) { return strict_family(FKind::InfN, std::move(kids)); }
Formula sup_family(std::vector<Formula> kids, const Interval& declared) {
    return family(FKind::SupN, std::move(kids), declared);
}
Formula inf_family(std::vector<Formula> kids, const Interval& declared) {
    return family(FKind::InfN, std::move(kids), declared);
}
Formula sup_family_hull(std::vector<Formula> kids) { return hull_family(FKind::SupN, std::move(kids)); }
Formula inf_family_hull(std::vector<Formula> kids) { return hull_family(FKind::InfN, std::move(kids)); }

Formula d_omega(const WeakModulus& omega, int n, std::vector<int> xs, std::vector<int> ys) {
    if (n < 1) throw std::invalid_argument("dOmega needs n >= 1");
    if (static_cast<int>(xs.size()) != n || static_cast<int>(ys.size()) != n)
        throw std::invalid_argument("dOmega(" + std::to_string(n) + ";...) needs two lists of " + std::to_string(n) +
                                    " variables");
    FormulaNode f;
    f.kind = FKind::DOmega;
    f.omega_n = n;
    f.omega = omega;
    for (int v : xs) f.free |= bit(v);
    for (int v : ys) f.free |= bit(v);
    f.vars = f.free;
    int w = width_of(f.free);
    const Modulus& trunc = omega.truncation(n);
    std::vector<Modulus> inner;
    for (int k = 0; k < n; ++k)
        inner.push_back(Modulus::sum(Modulus::proj(w, xs[static_cast<std::size_t>(k)]),
                                     Modulus::proj(w, ys[static_cast<std::size_t>(k)])));
    f.modulus = Modulus::compose(trunc, inner).widened(w);
    f.bound = Interval(Rational(0), trunc.eval(std::vector<Rational>(static_cast<std::size_t>(n), Rational(1))));
    f.xs = std::move(xs);
    f.ys = std::move(ys);
    return finish(std::move(f));
}

Formula tminus(const Formula& a, const Formula& b) { return fmax(sum(a, scale(Rational(-1), b)), zero()); }

Formula fabs(const Formula& a) { return sum(fmax(a, zero()), scale(Rational(-1), fmin(a, zero()))); }

Formula nary_max(const std::vector<Formula>& fs) {
    if (fs.empty()) return zero();
    Formula f = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) f = fmax(f, fs[i]);
    return f;
}

Formula nary_min(const std::vector<Formula>& fs) {
    if (fs.empty()) return zero();
    Formula f = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) f = fmin(f, fs[i]);
    return f;
}

Formula nary_sum(const std::vector<Formula>& fs) {
    if (fs.empty()) return zero();
    Formula f = fs.front();
    for (std::size_t i = 1; i < fs.size(); ++i) f = sum(f, fs[i]);
    return f;
}

// ---------------------------------------------------------------- structure

bool same(const Formula& a, const Formula& b) {
    if (a == b) return true;
    if (a->hash != b->hash || a->kind != b->kind || a->kids.size() != b->kids.size()) return false;
    switch (a->kind) {
    case FKind::Atomic:
        if (a->pred != b->pred || a->name != b->name || a->terms.size() != b->terms.size()) return false;
        for (std::size_t i = 0; i < a->terms.size(); ++i)
            if (!same_term(a->terms[i], b->terms[i])) return false;
        break;
    case FKind::Scale:
        if (a->q != b->q) return false;
        break;
    case FKind::Sup:
    case FKind::Inf:
        if (a->var != b->var) return false;
        break;
    case FKind::SupN:
    case FKind::InfN:
        if (a->bound != b->bound) return false;
        break;
    case FKind::DOmega:
        if (a->omega_n != b->omega_n || a->xs != b->xs || a->ys != b->ys || !(a->omega == b->omega)) return false;
        break;
    default: break;
    }
    for (std::size_t i = 0; i < a->kids.size(); ++i)
        if (!same(a->kids[i], b->kids[i])) return false;
    return true;
}

bool is_quantifier(FKind k) { return k == FKind::Sup || k == FKind::Inf || k == FKind::SupN || k == FKind::InfN; }

bool is_qf(const Formula& f) { return !f->quantified; }

std::vector<int> free_vars(const Formula& f) {
    std::vector<int> out;
    for (int i = 0; i < kMaxVars; ++i)
        if (f->free >> i & 1) out.push_back(i);
    return out;
}

int fresh_var(VarMask used) {
    for (int i = 0; i < kMaxVars; ++i)
        if (!(used >> i & 1)) return i;
    throw std::out_of_range("out of fresh variables");
}

std::size_t node_count(const Formula& f) {
    std::size_t n = 1;
    for (const auto& k : f->kids) n += node_count(k);
    return n;
}

namespace {

TermPtr rename_term(const TermPtr& t, const std::map<int, int>& map) {
    if (t->var >= 0) {
        auto it = map.find(t->var);
        return it == map.end() ? t : var_term(it->second);
    }
    std::vector<TermPtr> args;
    for (const auto& a : t->args) args.push_back(rename_term(a, map));
    return make_app(t->func, t->name, t->sym_modulus, std::move(args));
}

}  // namespace

Formula rename_free(const Formula& f, const std::map<int, int>& map) {
    bool touches = false;
    for (const auto& [from, to] : map)
        if ((f->free >> from & 1) && from != to) touches = true;
    if (!touches) return f;
    switch (f->kind) {
    case FKind::Atomic: {
        std::vector<TermPtr> terms;
        for (const auto& t : f->terms) terms.push_back(rename_term(t, map));
        return make_atomic(f->pred, f->name, f->sym_modulus, f->bound, std::move(terms));
    }
    case FKind::DOmega: {
        auto rn = [&](std::vector<int> v) {
            for (auto& x : v) {
                auto it = map.find(x);
                if (it != map.end()) x = it->second;
            }
            return v;
        };
        return d_omega(f->omega, f->omega_n, rn(f->xs), rn(f->ys));
    }
    case FKind::Zero:
    case FKind::One: return f;
    case FKind::Sum: return sum(rename_free(f->kids[0], map), rename_free(f->kids[1], map));
    case FKind::Max: return fmax(rename_free(f->kids[0], map), rename_free(f->kids[1], map));
    case FKind::Min: return fmin(rename_free(f->kids[0], map), rename_free(f->kids[1], map));
    case FKind::Scale: return scale(f->q, rename_free(f->kids[0], map));
    case FKind::Sup:
    case FKind::Inf: {
        std::map<int, int> inner;
        VarMask targets = 0;
        for (const auto& [from, to] : map)
            if (from != f->var && (f->kids[0]->free >> from & 1)) {
                inner[from] = to;
                targets |= bit(to);
            }
        int v = f->var;
        Formula body = f->kids[0];
        if (targets >> v & 1) {
            VarMask used = f->vars | targets;
            for (const auto& [from, to] : map) used |= bit(from) | bit(to);
            int w = fresh_var(used);
            body = rename_free(body, {{v, w}});
            v = w;
        }
        body = rename_free(body, inner);
        return f->kind == FKind::Sup ? sup(v, body) : inf(v, body);
    }
    case FKind::SupN:
    case FKind::InfN: {
        std::vector<Formula> kids;
        for (const auto& k : f->kids) kids.push_back(rename_free(k, map));
        return family(f->kind, std::move(kids), f->bound);
    }
    }
    return f;
}

// ---------------------------------------------------------------- printing

namespace {

void print_term(const TermPtr& t, std::ostream& os) {
    if (t->var >= 0) {
        os << "x" << t->var;
        return;
    }
    os << t->name << "(";
    for (std::size_t i = 0; i < t->args.size(); ++i) {
        if (i) os << ",";
        print_term(t->args[i], os);
    }
    os << ")";
}

void print(const Formula& f, std::ostream& os);

// operand of + or q*: quantifiers and sums get parentheses
void print_operand(const Formula& f, std::ostream& os, bool paren_sum) {
    bool paren = f->kind == FKind::Sup || f->kind == FKind::Inf || (paren_sum && f->kind == FKind::Sum);
    if (paren) os << "(";
    print(f, os);
    if (paren) os << ")";
}

void print(const Formula& f, std::ostream& os) {
    switch (f->kind) {
    case FKind::Atomic:
        os << f->name << "(";
        for (std::size_t i = 0; i < f->terms.size(); ++i) {
            if (i) os << ",";
            print_term(f->terms[i], os);
        }
        os << ")";
        return;
    case FKind::Zero: os << "0"; return;
    case FKind::One: os << "1"; return;
    case FKind::Sum:
        print_operand(f->kids[0], os, false);
        os << " + ";
        print_operand(f->kids[1], os, true);
        return;
    case FKind::Max:
    case FKind::Min:
        os << (f->kind == FKind::Max ? "max(" : "min(");
        print(f->kids[0], os);
        os << ", ";
        print(f->kids[1], os);
        os << ")";
        return;
    case FKind::Scale:
        os << f->q.str() << "*";
        print_operand(f->kids[0], os, true);
        return;
    case FKind::Sup:
    case FKind::Inf:
        os << (f->kind == FKind::Sup ? "sup x" : "inf x") << f->var << ". ";
        print(f->kids[0], os);
        return;
    case FKind::SupN:
    case FKind::InfN: {
        os << (f->kind == FKind::SupN ? "supN" : "infN");
        bool uniform = std::all_of(f->kids.begin(), f->kids.end(),
                                   [&](const Formula& k) { return k->bound == f->bound; });
        if (!uniform) os << "<" << f->bound.lo.str() << "," << f->bound.hi.str() << ">";
        os << "[";
        for (std::size_t i = 0; i < f->kids.size(); ++i) {
            if (i) os << "; ";
            print(f->kids[i], os);
        }
        os << "]";
        return;
    }
    case FKind::DOmega:
        os << "dOmega(" << f->omega_n << ";";
        for (std::size_t i = 0; i < f->xs.size(); ++i) os << (i ? "," : " ") << "x" << f->xs[i];
        os << ";";
        for (std::size_t i = 0; i < f->ys.size(); ++i) os << (i ? "," : " ") << "x" << f->ys[i];
        os << ")";
        return;
    }
}

// ---------------------------------------------------------------- parsing

class FormulaParser {
public:
    FormulaParser(std::string_view s, const ParseContext& ctx) : s_(s), ctx_(ctx) {
        if (!ctx_.sig) throw std::invalid_argument("parse context without signature");
    }

    Formula parse_all() {
        Formula f = sum_expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected trailing input");
        return f;
    }

private:
    std::string_view s_;
    const ParseContext& ctx_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::invalid_argument("formula parse error at offset " + std::to_string(pos_) + ": " + msg);
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < s_.size() && s_[pos_] == c;
    }
    bool eat(char c) {
        if (!peek(c)) return false;
        ++pos_;
        return true;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    std::string ident() {
        skip();
        std::size_t start = pos_;
        if (pos_ < s_.size() && (std::isalpha(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
            ++pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
        }
        return std::string(s_.substr(start, pos_ - start));
    }
    std::optional<Rational> number() {
        skip();
        std::size_t start = pos_;
        if (pos_ < s_.size() && s_[pos_] == '-') ++pos_;
        std::size_t digits = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
        if (digits == pos_) {
            pos_ = start;
            return std::nullopt;
        }
        if (pos_ < s_.size() && s_[pos_] == '/') {
            ++pos_;
            std::size_t d = pos_;
            while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
            if (d == pos_) fail("bad rational literal");
        }
        auto r = Rational::try_parse(s_.substr(start, pos_ - start));
        if (!r) fail("bad rational literal");
        return r;
    }
    int variable() {
        std::string id = ident();
        if (id.size() < 2 || id[0] != 'x' || !std::all_of(id.begin() + 1, id.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            fail("expected variable x<i>, got '" + id + "'");
        int v = std::stoi(id.substr(1));
        if (v >= kMaxVars) fail("variable index too large");
        return v;
    }

    Formula sum_expr() {
        Formula f = unary();
        while (eat('+')) f = sum(f, unary());
        return f;
    }

    std::vector<Formula> family_body() {
        expect('[');
        std::vector<Formula> kids;
        if (eat(']')) return kids;
        kids.push_back(sum_expr());
        while (eat(';')) kids.push_back(sum_expr());
        expect(']');
        return kids;
    }

    Formula unary() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end of input");
        if (auto q = number()) {
            if (eat('*')) return scale(*q, unary());
            if (q->is_zero()) return zero();
            if (*q == Rational(1)) return one();
            fail("bare constant " + q->str() + " (write q*1)");
        }
        if (eat('(')) {
            Formula f = sum_expr();
            expect(')');
            return f;
        }
        std::size_t save = pos_;
        std::string id = ident();
        if (id.empty()) fail("unexpected character '" + std::string(1, s_[pos_]) + "'");
        if (id == "sup" || id == "inf") {
            int v = variable();
            expect('.');
            Formula body = sum_expr();
            return id == "sup" ? sup(v, body) : inf(v, body);
        }
        if (id == "supN" || id == "infN") {
            FKind k = id == "supN" ? FKind::SupN : FKind::InfN;
            if (eat('<')) {
                auto lo = number();
                expect(',');
                auto hi = number();
                expect('>');
                if (!lo || !hi) fail("bad family bound");
                auto kids = family_body();
                return family(k, std::move(kids), Interval(*lo, *hi));
            }
            auto kids = family_body();
            return strict_family(k, std::move(kids));
        }
        if (id == "max" || id == "min" || id == "tminus") {
            expect('(');
            Formula a = sum_expr();
            expect(',');
            Formula b = sum_expr();
            expect(')');
            if (id == "max") return fmax(a, b);
            if (id == "min") return fmin(a, b);
            return tminus(a, b);
        }
        if (id == "abs") {
            expect('(');
            Formula a = sum_expr();
            expect(')');
            return fabs(a);
        }
        if (id == "dOmega") {
            if (!ctx_.omega.valid()) fail("dOmega used without a weak modulus in context");
            expect('(');
            auto n = number();
            if (!n || !n->is_integer() || n->sign() <= 0) fail("dOmega arity must be a positive integer");
            int k = static_cast<int>(std::stol(n->str()));
            expect(';');
            std::vector<int> xs{variable()};
            while (eat(',')) xs.push_back(variable());
            expect(';');
            std::vector<int> ys{variable()};
            while (eat(',')) ys.push_back(variable());
            expect(')');
            return d_omega(ctx_.omega, k, xs, ys);
        }
        int p = ctx_.sig->find_predicate(id);
        if (p == -2) {
            pos_ = save;
            fail("unknown symbol '" + id + "'");
        }
        expect('(');
        std::vector<TermPtr> terms;
        if (!eat(')')) {
            terms.push_back(term());
            while (eat(',')) terms.push_back(term());
            expect(')');
        }
        return atomic(*ctx_.sig, p, std::move(terms));
    }

    TermPtr term() {
        skip();
        std::size_t save = pos_;
        std::string id = ident();
        if (id.empty()) fail("expected a term");
        if (!peek('(')) {
            pos_ = save;
            return var_term(variable());
        }
        int f = ctx_.sig->find_function(id);
        if (f < 0) fail("unknown function symbol '" + id + "'");
        expect('(');
        std::vector<TermPtr> args;
        if (!eat(')')) {
            args.push_back(term());
            while (eat(',')) args.push_back(term());
            expect(')');
        }
        return app_term(*ctx_.sig, f, std::move(args));
    }
};

}  // namespace

std::string to_string(const Formula& f) {
    std::ostringstream os;
    print(f, os);
    return os.str();
}

std::string to_string(const TermPtr& t) {
    std::ostringstream os;
    print_term(t, os);
    return os.str();
}

Formula parse_formula(std::string_view text, const ParseContext& ctx) { return FormulaParser(text, ctx).parse_all(); }

}  // namespace cil
