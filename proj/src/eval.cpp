#include "cil/eval.hpp"

#include <limits>

namespace cil {

Assignment assignment_of(const std::vector<int>& tuple) { return Assignment(tuple.begin(), tuple.end()); }

std::vector<std::vector<int>> all_tuples(int n, int len) {
    std::vector<std::vector<int>> out;
    std::vector<int> t(static_cast<std::size_t>(len), 0);
    if (len == 0) return {t};
    if (n == 0) return out;
    while (true) {
        out.push_back(t);
        int k = len - 1;
        while (k >= 0 && ++t[static_cast<std::size_t>(k)] == n) t[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    return out;
}

void Evaluator::clear() {
    memo_.clear();
    pinned_.clear();
    pinned_set_.clear();
}

bool Evaluator::pack(const FormulaNode& f, std::uint64_t& out) const {
    std::uint64_t key = 0;
    const std::uint64_t n = static_cast<std::uint64_t>(s_.size());
    VarMask m = f.free;
    while (m) {
        int v = __builtin_ctzll(m);
        m &= m - 1;
        if (key > (std::numeric_limits<std::uint64_t>::max() - n) / (n + 1)) return false;
        key = key * n + static_cast<std::uint64_t>(env_[v]);
    }
    out = key;
    return true;
}

int Evaluator::term_value(const Term& t) const {
    if (t.var >= 0) return env_[t.var];
    int args[16];
    std::vector<int> big;
    int* a = args;
    if (t.args.size() > 16) {
        big.resize(t.args.size());
        a = big.data();
    }
    for (std::size_t i = 0; i < t.args.size(); ++i) a[i] = term_value(*t.args[i]);
    return s_.func(t.func, a);
}

Rational Evaluator::rec(const FormulaNode& f) {
    switch (f.kind) {
    case FKind::Atomic: {
        int args[16];
        std::vector<int> big;
        int* a = args;
        if (f.terms.size() > 16) {
            big.resize(f.terms.size());
            a = big.data();
        }
        for (std::size_t i = 0; i < f.terms.size(); ++i) a[i] = term_value(*f.terms[i]);
        return s_.pred(f.pred, a);
    }
    case FKind::Zero: return Rational(0);
    case FKind::One: return Rational(1);
    case FKind::Sum: return rec(*f.kids[0]) + rec(*f.kids[1]);
    case FKind::Max: {
        Rational a = rec(*f.kids[0]);
        if (a == f.bound.hi) return a;
        return max(a, rec(*f.kids[1]));
    }
    case FKind::Min: {
        Rational a = rec(*f.kids[0]);
        if (a == f.bound.lo) return a;
        return min(a, rec(*f.kids[1]));
    }
    case FKind::Scale: return f.q.is_zero() ? Rational(0) : f.q * rec(*f.kids[0]);
    default: break;
    }

    std::uint64_t packed = 0;
    bool memo = pack(f, packed);
    if (memo) {
        auto it = memo_.find(Key{&f, packed});
        if (it != memo_.end()) return it->second;
    }
    Rational result;
    switch (f.kind) {
    case FKind::Sup:
    case FKind::Inf: {
        const bool is_sup = f.kind == FKind::Sup;
        const int v = f.var;
        const int saved = env_[v];
        for (int p = 0; p < s_.size(); ++p) {
            env_[v] = p;
            Rational x = rec(*f.kids[0]);
            if (p == 0 || (is_sup ? result < x : x < result)) result = std::move(x);
            if (is_sup ? result == f.bound.hi : result == f.bound.lo) break;
        }
        env_[v] = saved;
        break;
    }
    case FKind::SupN:
    case FKind::InfN: {
        const bool is_sup = f.kind == FKind::SupN;
        bool first = true;
        for (const auto& k : f.kids) {
            Rational x = rec(*k);
            if (first || (is_sup ? result < x : x < result)) result = std::move(x);
            first = false;
            if (is_sup ? result == f.bound.hi : result == f.bound.lo) break;
        }
        break;
    }
    case FKind::DOmega: {
        std::vector<Rational> r;
        r.reserve(static_cast<std::size_t>(f.omega_n));
        for (int k = 0; k < f.omega_n; ++k)
            r.push_back(s_.d(env_[f.xs[static_cast<std::size_t>(k)]], env_[f.ys[static_cast<std::size_t>(k)]]));
        result = f.omega.truncation(f.omega_n).eval(r);
        break;
    }
    default: break;
    }
    if (memo) memo_.emplace(Key{&f, packed}, result);
    return result;
}

Rational Evaluator::eval(const Formula& f, const Assignment& a) {
    for (int v : free_vars(f)) {
        if (v >= static_cast<int>(a.size()) || a[static_cast<std::size_t>(v)] < 0)
            throw std::invalid_argument("unassigned free variable x" + std::to_string(v));
        if (a[static_cast<std::size_t>(v)] >= s_.size()) throw std::out_of_range("assignment point out of range");
    }
    // memo keys are node addresses; keep every composite root alive so they are never reused
    const bool leaf = f->kind == FKind::Atomic || f->kind == FKind::Zero || f->kind == FKind::One;
    if (!leaf && pinned_set_.insert(f.get()).second) pinned_.push_back(f);
    for (int v = 0; v < kMaxVars; ++v) env_[v] = v < static_cast<int>(a.size()) && a[static_cast<std::size_t>(v)] >= 0 ? a[static_cast<std::size_t>(v)] : 0;
    return rec(*f);
}

Rational eval(const Formula& f, const MetricStructure& s, const Assignment& a) {
    Evaluator ev(s);
    return ev.eval(f, a);
}

std::vector<int> EvalTable::row(std::size_t i) const {
    std::vector<int> t(vars.size());
    for (std::size_t k = vars.size(); k-- > 0;) {
        t[k] = static_cast<int>(i % static_cast<std::size_t>(points));
        i /= static_cast<std::size_t>(points);
    }
    return t;
}

EvalTable eval_all(const Formula& f, Evaluator& ev, std::size_t cap) {
    EvalTable t;
    t.vars = free_vars(f);
    t.points = ev.structure().size();
    std::size_t rows = 1;
    for (std::size_t i = 0; i < t.vars.size(); ++i) {
        rows *= static_cast<std::size_t>(t.points);
        if (rows > cap) throw std::length_error("eval_all: table exceeds cap of " + std::to_string(cap) + " rows");
    }
    t.values.reserve(rows);
    Assignment a(t.vars.empty() ? 0 : static_cast<std::size_t>(t.vars.back() + 1), -1);
    for (std::size_t r = 0; r < rows; ++r) {
        auto row = t.row(r);
        for (std::size_t k = 0; k < t.vars.size(); ++k) a[static_cast<std::size_t>(t.vars[k])] = row[k];
        t.values.push_back(ev.eval(f, a));
    }
    return t;
}

EvalTable eval_all(const Formula& f, const MetricStructure& s, std::size_t cap) {
    Evaluator ev(s);
    return eval_all(f, ev, cap);
}

std::vector<Violation> audit_against(const Formula& f, const Modulus& m, const MetricStructure& s, std::size_t cap) {
    std::vector<Violation> out;
    EvalTable t = eval_all(f, s, cap);
    const std::string text = to_string(f);
    for (std::size_t i = 0; i < t.values.size(); ++i)
        if (!f->bound.contains(t.values[i]))
            out.push_back({"bound", "value " + t.values[i].str() + " of " + text + " at " + s.tuple_str(t.row(i)) +
                                        " outside " + f->bound.str()});
    if (t.values.size() > 1 && t.values.size() > cap / t.values.size() + 1)
        throw std::length_error("audit_modulus: pair count exceeds cap");
    const int w = std::max(m.arity(), f->width);
    Modulus mm = m.arity() < w ? m.widened(w) : m;
    std::vector<Rational> r(static_cast<std::size_t>(w), Rational(0));
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        auto ra = t.row(i);
        for (std::size_t j = i + 1; j < t.values.size(); ++j) {
            auto rb = t.row(j);
            std::fill(r.begin(), r.end(), Rational(0));
            for (std::size_t k = 0; k < t.vars.size(); ++k) r[static_cast<std::size_t>(t.vars[k])] = s.d(ra[k], rb[k]);
            Rational gap = abs(t.values[i] - t.values[j]);
            Rational bound = mm.eval(r);
            if (gap > bound) {
                out.push_back({"modulus", "modulus: |phi" + s.tuple_str(ra) + "-phi" + s.tuple_str(rb) + "|=" +
                                              gap.str() + " > Delta=" + bound.str() + " for " + text});
                if (out.size() >= 16) return out;
            }
        }
    }
    return out;
}

std::vector<Violation> audit_modulus(const Formula& f, const MetricStructure& s, std::size_t cap) {
    return audit_against(f, f->modulus, s, cap);
}

}  // namespace cil
