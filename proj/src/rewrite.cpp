#include "cil/formula.hpp"

#include <algorithm>
#include <unordered_map>

namespace cil {

// ---------------------------------------------------------------- moduli from formulas

std::vector<Formula> default_atomic_enumeration(const Signature& sig) {
    std::vector<Formula> out{distance_atom(0, 1)};
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
        std::vector<TermPtr> ts;
        for (int i = 0; i < sig.predicates()[p].arity; ++i) ts.push_back(var_term(i));
        out.push_back(atomic(sig, static_cast<int>(p), std::move(ts)));
    }
    for (std::size_t f = 0; f < sig.functions().size(); ++f) {
        int k = sig.functions()[f].arity;
        std::vector<TermPtr> ts;
        for (int i = 0; i < k; ++i) ts.push_back(var_term(i));
        out.push_back(atomic(sig, kDistance, {app_term(sig, static_cast<int>(f), std::move(ts)), var_term(k)}));
    }
    return out;
}

WeakModulus universal_modulus(const Signature& sig, const std::vector<Formula>& atomic_enumeration) {
    (void)sig;
    if (atomic_enumeration.empty())
        throw std::invalid_argument("empty signature (no atomic formulas to enumerate)");
    std::vector<Modulus> moduli;
    for (const auto& a : atomic_enumeration) {
        if (a->kind != FKind::Atomic) throw std::invalid_argument("universal modulus enumeration must be atomic: " + to_string(a));
        moduli.push_back(a->modulus);
    }
    return WeakModulus::universal(moduli);
}

WeakModulus universal_modulus(const Signature& sig) { return universal_modulus(sig, default_atomic_enumeration(sig)); }

Formula tuple_distance_formula(const WeakModulus& omega, int n) {
    std::vector<int> xs, ys;
    for (int i = 0; i < n; ++i) {
        xs.push_back(i);
        ys.push_back(n + i);
    }
    return d_omega(omega, n, xs, ys);
}

// ---------------------------------------------------------------- quantifier rank

namespace {

struct RankPair {
    int inf = 0, sup = 0;
};

class RankCache {
public:
    RankPair get(const Formula& f) {
        if (!f->quantified) return {};
        auto it = memo_.find(f.get());
        if (it != memo_.end()) return it->second;
        RankPair r = compute(f);
        memo_.emplace(f.get(), r);
        keep_.push_back(f);
        return r;
    }

private:
    std::unordered_map<const FormulaNode*, RankPair> memo_;
    std::vector<Formula> keep_;

    RankPair compute(const Formula& f) {
        switch (f->kind) {
        case FKind::Sum:
        case FKind::Max:
        case FKind::Min: {
            RankPair a = get(f->kids[0]), b = get(f->kids[1]);
            return {std::max(a.inf, b.inf), std::max(a.sup, b.sup)};
        }
        case FKind::Scale: {
            if (f->q.is_zero()) return {};
            RankPair a = get(f->kids[0]);
            return f->q.sign() > 0 ? a : RankPair{a.sup, a.inf};
        }
        case FKind::Sup: {
            RankPair b = get(f->kids[0]);
            int s = std::min(std::max(b.sup, 1), b.inf + 1);
            return {s + 1, s};
        }
        case FKind::Inf: {
            RankPair b = get(f->kids[0]);
            int i = std::min(std::max(b.inf, 1), b.sup + 1);
            return {i, i + 1};
        }
        case FKind::SupN:
        case FKind::InfN: {
            // finite families are logically a max/min of their members
            RankPair r;
            for (const auto& k : f->kids) {
                RankPair c = get(k);
                r.inf = std::max(r.inf, c.inf);
                r.sup = std::max(r.sup, c.sup);
            }
            return r;
        }
        default: return {};
        }
    }
};

enum class QK { None, Sup, Inf };

QK outer_kind(const Formula& f) {
    if (f->kind == FKind::Sup) return QK::Sup;
    if (f->kind == FKind::Inf) return QK::Inf;
    return QK::None;
}

bool is_family(const Formula& f) { return f->kind == FKind::SupN || f->kind == FKind::InfN; }

Formula rebuild_family(FKind k, std::vector<Formula> kids) { return k == FKind::SupN ? sup_family_hull(std::move(kids)) : inf_family_hull(std::move(kids)); }

Formula apply_op(FKind op, const Formula& a, const Formula& b) {
    if (op == FKind::Sum) return sum(a, b);
    if (op == FKind::Max) return fmax(a, b);
    return fmin(a, b);
}

class Prenexer {
public:
    // pref: kind of the nearest enclosing quantifier; families are transparent
    Formula run(const Formula& f, QK pref = QK::None) {
        if (!f->quantified) return f;
        switch (f->kind) {
        case FKind::Scale: {
            QK inner = f->q.sign() >= 0 || pref == QK::None ? pref : (pref == QK::Sup ? QK::Inf : QK::Sup);
            return scale_through(f->q, run(f->kids[0], inner));
        }
        case FKind::Sum:
        case FKind::Max:
        case FKind::Min: return combine(f->kind, run(f->kids[0], pref), run(f->kids[1], pref), pref);
        case FKind::Sup: return sup(f->var, run(f->kids[0], QK::Sup));
        case FKind::Inf: return inf(f->var, run(f->kids[0], QK::Inf));
        case FKind::SupN:
        case FKind::InfN: {
            std::vector<Formula> kids;
            for (const auto& k : f->kids) kids.push_back(run(k, pref));
            return f->kind == FKind::SupN ? sup_family(std::move(kids), f->bound) : inf_family(std::move(kids), f->bound);
        }
        default: return f;
        }
    }

private:
    RankCache ranks_;

    Formula scale_through(const Rational& q, const Formula& x) {
        if (q.is_zero()) return zero();
        if (!x->quantified) return scale(q, x);
        bool flip = q.sign() < 0;
        switch (x->kind) {
        case FKind::Sup:
        case FKind::Inf: {
            Formula body = scale_through(q, x->kids[0]);
            bool s = (x->kind == FKind::Sup) != flip;
            return s ? sup(x->var, body) : inf(x->var, body);
        }
        case FKind::SupN:
        case FKind::InfN: {
            std::vector<Formula> kids;
            for (const auto& k : x->kids) kids.push_back(scale_through(q, k));
            bool s = (x->kind == FKind::SupN) != flip;
            Interval b = x->bound.scaled(q);
            return s ? sup_family(std::move(kids), b) : inf_family(std::move(kids), b);
        }
        default: return scale(q, x);
        }
    }

    int blocks(const Formula& f, QK k) {
        RankPair r = ranks_.get(f);
        return k == QK::Sup ? r.sup : r.inf;
    }

    Formula pull(FKind op, const Formula& q, const Formula& other, bool q_left, QK k) {
        int v = q->var;
        Formula body = q->kids[0];
        if (other->free >> v & 1) {
            int w = fresh_var(q->vars | other->vars);
            body = rename_free(body, {{v, w}});
            v = w;
        }
        Formula inner = q_left ? combine(op, body, other, k) : combine(op, other, body, k);
        return q->kind == FKind::Sup ? sup(v, inner) : inf(v, inner);
    }

    Formula combine(FKind op, const Formula& x, const Formula& y, QK pref) {
        if (!x->quantified && !y->quantified) return apply_op(op, x, y);
        if (is_family(x)) {
            std::vector<Formula> kids;
            for (const auto& c : x->kids) kids.push_back(combine(op, c, y, pref));
            return rebuild_family(x->kind, std::move(kids));
        }
        if (is_family(y)) {
            std::vector<Formula> kids;
            for (const auto& c : y->kids) kids.push_back(combine(op, x, c, pref));
            return rebuild_family(y->kind, std::move(kids));
        }
        QK kx = outer_kind(x), ky = outer_kind(y);
        QK k;
        if (pref != QK::None && (kx == pref || ky == pref)) k = pref;
        else if (kx == QK::None) k = ky;
        else if (ky == QK::None) k = kx;
        else if (kx == ky) k = kx;
        else k = blocks(x, kx) >= blocks(y, ky) ? kx : ky;
        if (kx == k) return pull(op, x, y, true, k);
        return pull(op, y, x, false, k);
    }
};

Formula negate_matrix(const Formula& m) {
    if (m->kind == FKind::Scale) {
        Rational q = -m->q;
        if (q == Rational(1)) return m->kids[0];
        return scale(q, m->kids[0]);
    }
    return scale(Rational(-1), m);
}

Formula dual(const Formula& f) {
    switch (f->kind) {
    case FKind::Sup: return inf(f->var, dual(f->kids[0]));
    case FKind::Inf: return sup(f->var, dual(f->kids[0]));
    case FKind::SupN:
    case FKind::InfN: {
        std::vector<Formula> kids;
        for (const auto& k : f->kids) kids.push_back(dual(k));
        Interval b(-f->bound.hi, -f->bound.lo);
        return f->kind == FKind::SupN ? inf_family(std::move(kids), b) : sup_family(std::move(kids), b);
    }
    default: return negate_matrix(f);
    }
}

}  // namespace

Formula prenex(const Formula& f) { return Prenexer().run(f); }

bool is_prenex(const Formula& f) {
    if (is_quantifier(f->kind))
        return std::all_of(f->kids.begin(), f->kids.end(), [](const Formula& k) { return is_prenex(k); });
    return !f->quantified;
}

Formula demorgan_dual(const Formula& f) {
    if (!is_prenex(f)) throw std::invalid_argument("demorgan_dual: input not prenex: " + to_string(f));
    return dual(f);
}

std::string QuantRank::str() const {
    switch (kind) {
    case Kind::Qf: return "qf";
    case Kind::Inf: return "inf^" + std::to_string(level);
    case Kind::Sup: return "sup^" + std::to_string(level);
    case Kind::Both: return "both^" + std::to_string(level);
    }
    return "?";
}

QuantRank quant_rank(const Formula& f) {
    RankCache cache;
    RankPair r = cache.get(f);
    QuantRank q;
    q.inf_level = r.inf;
    q.sup_level = r.sup;
    if (r.inf == 0 && r.sup == 0) {
        q.kind = QuantRank::Kind::Qf;
        q.level = 0;
    } else if (r.inf < r.sup) {
        q.kind = QuantRank::Kind::Inf;
        q.level = r.inf;
    } else if (r.sup < r.inf) {
        q.kind = QuantRank::Kind::Sup;
        q.level = r.sup;
    } else {
        q.kind = QuantRank::Kind::Both;
        q.level = r.inf;
    }
    return q;
}

// ---------------------------------------------------------------- regularization

Formula clamp(const Formula& f, const Interval& I) {
    Formula g = f;
    if (g->bound.hi > I.hi) g = fmin(g, constant(I.hi));
    if (g->bound.lo < I.lo) g = fmax(g, constant(I.lo));
    return g;
}

Formula regularize(const Formula& f, const WeakModulus& omega, const Interval& I, RegMode mode, int arity) {
    const int n = std::max(f->width, arity);
    Formula fi = clamp(f, I);
    if (n == 0) return fi;
    VarMask used = f->vars;
    for (int i = 0; i < n; ++i) used |= VarMask(1) << i;
    std::vector<int> xs, ys;
    std::map<int, int> to_y;
    for (int i = 0; i < n; ++i) {
        int y = fresh_var(used);
        used |= VarMask(1) << y;
        xs.push_back(i);
        ys.push_back(y);
        to_y[i] = y;
    }
    Formula at_y = rename_free(fi, to_y);
    Formula dist = d_omega(omega, n, xs, ys);
    if (mode == RegMode::Inf) {
        Formula r = inf_block(ys, sum(at_y, dist));
        if (r->bound.hi > I.hi) r = fmin(r, constant(I.hi));
        return r;
    }
    Formula r = sup_block(ys, sum(at_y, scale(Rational(-1), dist)));
    if (r->bound.lo < I.lo) r = fmax(r, constant(I.lo));
    return r;
}

}  // namespace cil
