#include "cil/types.hpp"

#include "cil/orbit.hpp"

#include <json.hpp>

#include <algorithm>
#include <numeric>
#include <set>

namespace cil {

namespace {

// theta with the renamed body shared across radii
class ThetaBuilder {
public:
    ThetaBuilder(const Formula& psi, const Rational& r, const WeakModulus& omega, int arity)
        : n_(std::max(psi->width, arity)) {
        if (n_ == 0) {
            dev_ = fabs(sum(psi, constant(-r)));
            return;
        }
        VarMask used = psi->vars;
        for (int i = 0; i < n_; ++i) used |= VarMask(1) << i;
        std::vector<int> xs;
        std::map<int, int> to_y;
        for (int i = 0; i < n_; ++i) {
            int y = fresh_var(used);
            used |= VarMask(1) << y;
            xs.push_back(i);
            ys_.push_back(y);
            to_y[i] = y;
        }
        dev_ = fabs(sum(rename_free(psi, to_y), constant(-r)));
        dist_ = d_omega(omega, n_, xs, ys_);
    }

    Formula make(const Rational& eps) const {
        if (eps.sign() <= 0) throw std::invalid_argument("theta: eps must be positive");
        if (n_ == 0) return dev_;
        return inf_block(ys_, fmax(tminus(dist_, constant(eps)), dev_));
    }

private:
    int n_;
    std::vector<int> ys_;
    Formula dev_, dist_;
};

}  // namespace

Formula theta(const Formula& psi, const Rational& r, const Rational& eps, const WeakModulus& omega, int arity) {
    return ThetaBuilder(psi, r, omega, arity).make(eps);
}

int theta_rank_bound(const QuantRank& psi) { return std::max(psi.sup_level + 1, 3); }

PartialType fragment_type(const MetricStructure& s, const std::vector<int>& a, const Fragment& fragment) {
    PartialType t;
    t.arity = static_cast<int>(a.size());
    Evaluator ev(s);
    for (const auto& e : fragment) {
        if (e.formula->width > t.arity)
            throw std::invalid_argument("fragment_type: " + e.label + " has more free variables than the tuple");
        t.formulas.push_back(e.formula);
        t.values.push_back(ev.eval_tuple(e.formula, a));
        t.labels.push_back(e.label);
    }
    return t;
}

std::vector<Rational> eps_ladder(int m_max) {
    std::vector<Rational> out;
    for (int m = 0; m <= m_max; ++m) out.push_back(Rational::pow2(-m));
    return out;
}

SupportReport check_support(const MetricStructure& s, const PartialType& type, const Formula& P, const WeakModulus& omega,
                            const std::vector<Rational>& eps_grid, Evaluator* shared) {
    SupportReport rep;
    if (P->width > type.arity) {
        rep.violation = "predicate has more free variables than the type";
        return rep;
    }
    std::optional<Evaluator> local;
    if (!shared) local.emplace(s);
    Evaluator& ev = shared ? *shared : *local;
    const int n = type.arity;
    auto tuples = all_tuples(s.size(), n);
    std::vector<Rational> pv;
    {
        // P is read once per tuple; keep its memo out of the shared one
        Evaluator pe(s);
        for (const auto& t : tuples) pv.push_back(pe.eval_tuple(P, t));
    }
    rep.inf_value = *std::min_element(pv.begin(), pv.end());
    if (!rep.inf_value.is_zero()) {
        rep.violation = "inf of the predicate is " + rep.inf_value.str() + ", not 0";
        return rep;
    }
    // theta(psi_k, r_k, eps)(z) = min over x of max(d_Omega(z, x) - eps, |psi_k(x) - r_k|), read off tables
    std::vector<std::vector<Rational>> dist(tuples.size(), std::vector<Rational>(tuples.size()));
    if (n > 0) {
        Formula dt = tuple_distance_formula(omega, n);
        Evaluator de(s);
        for (std::size_t z = 0; z < tuples.size(); ++z)
            for (std::size_t x = 0; x < tuples.size(); ++x) {
                std::vector<int> zx = tuples[z];
                zx.insert(zx.end(), tuples[x].begin(), tuples[x].end());
                dist[z][x] = de.eval_tuple(dt, zx);
            }
    }
    for (const auto& eps : eps_grid)
        if (eps.sign() <= 0) throw std::invalid_argument("check_support: eps must be positive");
    std::vector<Rational> dev(tuples.size());
    for (std::size_t k = 0; k < type.size(); ++k) {
        for (std::size_t x = 0; x < tuples.size(); ++x) dev[x] = abs(ev.eval_tuple(type.formulas[k], tuples[x]) - type.values[k]);
        for (const auto& eps : eps_grid)
            for (std::size_t z = 0; z < tuples.size(); ++z) {
                if (!(pv[z] < eps)) continue;
                Rational v = n == 0 ? dev[0] : max(dist[z][0] - eps, dev[0]);
                for (std::size_t x = 1; x < tuples.size() && v.sign() > 0; ++x) v = min(v, max(dist[z][x] - eps, dev[x]));
                if (v.sign() < 0) v = Rational(0);
                if (!v.is_zero()) {
                    rep.violation = "P" + s.tuple_str(tuples[z]) + "=" + pv[z].str() + " < " + eps.str() + " but theta(" +
                                    type.labels[k] + ", " + type.values[k].str() + ", " + eps.str() + ")=" + v.str();
                    return rep;
                }
            }
    }
    rep.ok = true;
    return rep;
}

SupportResult find_support(const MetricStructure& s, const PartialType& type, const Fragment& candidates,
                           const WeakModulus& omega, int m_max, int level,
                           const std::vector<std::vector<Rational>>* values, Evaluator* shared) {
    SupportResult out;
    const int n = type.arity;
    const auto tuples = all_tuples(s.size(), n);
    const std::size_t T = tuples.size();
    std::optional<Evaluator> local;
    if (!shared) local.emplace(s);
    Evaluator& ev = shared ? *shared : *local;

    std::vector<std::vector<Rational>> dist(T, std::vector<Rational>(T));
    if (n > 0) {
        Formula dt = tuple_distance_formula(omega, n);
        for (std::size_t x = 0; x < T; ++x)
            for (std::size_t y = 0; y < T; ++y) {
                auto xy = tuples[x];
                xy.insert(xy.end(), tuples[y].begin(), tuples[y].end());
                dist[x][y] = ev.eval_tuple(dt, xy);
            }
    }
    // hits[k][y]: psi_k(y) = r_k
    std::vector<std::vector<bool>> hits(type.size(), std::vector<bool>(T));
    std::vector<bool> realizes(T, true);
    for (std::size_t k = 0; k < type.size(); ++k)
        for (std::size_t y = 0; y < T; ++y) {
            hits[k][y] = ev.eval_tuple(type.formulas[k], tuples[y]) == type.values[k];
            if (!hits[k][y]) realizes[y] = false;
        }
    // good[m][x]: every condition is realized within 2^-m of x
    auto good_at = [&](const Rational& eps) {
        std::vector<bool> g(T, true);
        for (std::size_t x = 0; x < T; ++x)
            for (std::size_t k = 0; k < type.size() && g[x]; ++k) {
                bool near = false;
                for (std::size_t y = 0; y < T && !near; ++y) near = hits[k][y] && dist[x][y] <= eps;
                g[x] = near;
            }
        return g;
    };
    std::vector<std::vector<bool>> good;
    for (int m = 0; m <= m_max + 1; ++m) good.push_back(good_at(Rational::pow2(-m)));

    std::vector<std::vector<Rational>> own;
    if (!values) {
        own.resize(candidates.size());
        for (std::size_t j = 0; j < candidates.size(); ++j)
            for (const auto& t : tuples) own[j].push_back(ev.eval_tuple(candidates[j].formula, t));
        values = &own;
    }
    const auto& cv = *values;
    if (cv.size() != candidates.size()) throw std::invalid_argument("find_support: value table does not match the candidates");

    const auto exact = std::find(realizes.begin(), realizes.end(), true);
    VarMask used = 0;
    for (const auto& e : candidates) used |= e.formula->vars;
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

    std::map<std::size_t, Formula> renamed;
    std::vector<Formula> weighted;
    for (int m = 1; m <= m_max + 1; ++m) {
        const auto& g = good[static_cast<std::size_t>(m)];
        std::size_t anchor = exact != realizes.end() ? static_cast<std::size_t>(exact - realizes.begin())
                                                     : static_cast<std::size_t>(std::find(g.begin(), g.end(), true) - g.begin());
        if (anchor == T) {
            out.failure = "no tuple realizes the type within " + Rational::pow2(-m).str();
            return out;
        }
        SupportStep step;
        step.m = m;
        step.anchor = tuples[anchor];
        std::vector<std::pair<std::size_t, bool>> chosen;
        for (std::size_t w = 0; w < T; ++w) {
            if (g[w]) continue;
            std::size_t best = candidates.size();
            Rational gap(0);
            for (std::size_t j = 0; j < candidates.size(); ++j) {
                const bool up = cv[j][w] > cv[j][anchor];
                if (level > 0 && (up ? candidates[j].rank.inf_level : candidates[j].rank.sup_level) > level) continue;
                Rational d = abs(cv[j][w] - cv[j][anchor]);
                if (d > gap) {
                    gap = d;
                    best = j;
                }
            }
            if (best == candidates.size()) {
                out.failure = "no candidate separates " + s.tuple_str(tuples[anchor]) + " from " + s.tuple_str(tuples[w]) +
                              " at eps " + Rational::pow2(-m).str();
                return out;
            }
            std::pair<std::size_t, bool> c{best, cv[best][w] > cv[best][anchor]};
            if (std::find(chosen.begin(), chosen.end(), c) == chosen.end()) chosen.push_back(c);
        }
        std::vector<Formula> parts, parts_y;
        for (const auto& [j, up] : chosen) {
            const Rational& v = cv[j][anchor];
            parts.push_back(up ? above(candidates[j].formula, v) : below(candidates[j].formula, v));
            if (n > 0) {
                auto it = renamed.find(j);
                if (it == renamed.end()) it = renamed.emplace(j, rename_free(candidates[j].formula, to_y)).first;
                parts_y.push_back(up ? above(it->second, v) : below(it->second, v));
            }
            step.labels.push_back((up ? "+" : "-") + candidates[j].label);
        }
        step.phi = nary_max(parts);
        step.eta = ev.eval_tuple(step.phi, tuples[anchor]);
        step.delta = ExtRational::infinity();
        for (std::size_t w = 0; w < T; ++w)
            if (!g[w]) step.delta = min(step.delta, ExtRational(ev.eval_tuple(step.phi, tuples[w]) - step.eta));
        if (n == 0) {
            step.phi_hat = above(step.phi, step.eta);
        } else {
            Formula at_y = above(nary_max(parts_y), step.eta);
            step.phi_hat = inf_block(ys, fmax(tminus(d_omega(omega, n, xs, ys), constant(Rational::pow2(-m))), at_y));
        }
        weighted.push_back(scale(Rational::pow2(-m), step.phi_hat));
        out.steps.push_back(std::move(step));
    }
    Formula total = nary_sum(weighted);
    std::vector<Rational> tv;
    for (const auto& t : tuples) tv.push_back(ev.eval_tuple(total, t));
    Rational M(0);
    for (int j = 0; j <= m_max; ++j) {
        const Rational eps = Rational::pow2(-j);
        for (std::size_t x = 0; x < T; ++x) {
            if (good[static_cast<std::size_t>(j)][x]) continue;
            if (tv[x].is_zero()) {
                out.failure = "weighted sum vanishes at " + s.tuple_str(tuples[x]) + " outside the " + eps.str() + "-ball";
                return out;
            }
            M = max(M, eps / tv[x]);
        }
    }
    if (M.is_zero()) M = Rational(1);
    out.scale = M;
    const Interval unit(Rational(0), Rational(1));
    out.raw = clamp(M == Rational(1) ? total : scale(M, total), unit);
    const auto grid = eps_ladder(m_max);
    Formula reg = regularize(out.raw, omega, unit, RegMode::Inf, n);
    SupportReport r = check_support(s, type, reg, omega, grid, shared);
    if (r.ok) {
        out.predicate = reg;
        out.regularized = true;
    } else {
        r = check_support(s, type, out.raw, omega, grid, shared);
        out.predicate = out.raw;
    }
    out.report = r;
    out.found = r.ok;
    if (!r.ok) out.failure = "certification failed: " + r.violation;
    return out;
}

// ---------------------------------------------------------------- conditions

int ConditionSet::constant(const std::string& name) const {
    auto it = std::find(constants.begin(), constants.end(), name);
    return it == constants.end() ? -1 : static_cast<int>(it - constants.begin());
}

std::string ConditionSet::str(const Condition& c) const {
    std::string at;
    for (std::size_t i = 0; i < c.at.size(); ++i) {
        if (c.at[i] < 0 || !(c.phi->free >> i & 1U)) continue;
        at += (at.empty() ? "" : ",") + std::string("x") + std::to_string(i) + "=" + constants.at(static_cast<std::size_t>(c.at[i]));
    }
    return to_string(c.phi) + (at.empty() ? "" : " @ (" + at + ")") + " < " + c.r.str();
}

namespace {

// r·core after peeling nested scalings
struct Peeled {
    Rational q{1};
    Formula core;
};

Peeled peel(const Formula& f) {
    Peeled p;
    p.core = f;
    while (p.core->kind == FKind::Scale) {
        p.q *= p.core->q;
        p.core = p.core->kids[0];
    }
    return p;
}

// constants bound to the free variables only
std::vector<int> relevant(const Formula& f, const std::vector<int>& at) {
    std::vector<int> out;
    for (int i = 0; i < f->width; ++i) out.push_back((f->free >> i & 1U) && i < static_cast<int>(at.size()) ? at[static_cast<std::size_t>(i)] : -1);
    return out;
}

}  // namespace

ConditionReport validate_conditions(const ConditionSet& sigma) {
    ConditionReport rep;
    auto flag = [&](std::string msg) {
        rep.ok = false;
        rep.violations.push_back(std::move(msg));
    };
    for (const auto& c : sigma.conditions) {
        for (int i = 0; i < c.phi->width; ++i)
            if ((c.phi->free >> i & 1U) && (i >= static_cast<int>(c.at.size()) || c.at[static_cast<std::size_t>(i)] < 0 ||
                                            c.at[static_cast<std::size_t>(i)] >= static_cast<int>(sigma.constants.size())))
                flag("unbound variable x" + std::to_string(i) + " in " + to_string(c.phi));
        const Interval& I = c.phi->bound;
        if (!(c.r > I.lo && c.r <= I.hi)) flag("range: " + sigma.str(c) + " needs r in (" + I.lo.str() + "," + I.hi.str() + "]");
        Peeled p = peel(c.phi);
        if ((p.q.is_zero() || p.core->kind == FKind::Zero) && c.r.sign() <= 0) flag("(C6c): " + sigma.str(c) + " needs r > 0");
    }
    // (C3) on scalar multiples of a common core
    struct Entry {
        Peeled p;
        std::vector<int> at;
        const Condition* c;
    };
    std::vector<Entry> es;
    for (const auto& c : sigma.conditions) es.push_back({peel(c.phi), relevant(c.phi, c.at), &c});
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = 0; j < es.size(); ++j) {
            const auto& a = es[i];
            const auto& b = es[j];
            if (a.p.q.sign() <= 0 || b.p.q.sign() >= 0 || !same(a.p.core, b.p.core) || a.at != b.at) continue;
            // core < r/qa and core > s/qb
            if (b.c->r / b.p.q >= a.c->r / a.p.q)
                flag("(C3): " + sigma.str(*a.c) + " contradicts " + sigma.str(*b.c));
        }
    // lower bounds on subformulas implied by negated conditions
    auto lower = [&](const Formula& f, const std::vector<int>& at) {
        Rational lb = f->bound.lo;
        auto rel = relevant(f, at);
        for (const auto& e : es)
            if (e.p.q.sign() < 0 && same(e.p.core, f) && relevant(e.p.core, e.c->at) == rel) lb = max(lb, e.c->r / e.p.q);
        return lb;
    };
    for (const auto& e : es) {
        if (e.p.q.sign() <= 0) continue;
        const Formula& core = e.p.core;
        const Rational r = e.c->r / e.p.q;
        if (core->kind == FKind::Sum) {
            if (lower(core->kids[0], e.c->at) + lower(core->kids[1], e.c->at) >= r && r > core->bound.lo)
                flag("decomposition: the summands of " + sigma.str(*e.c) + " are bounded below by conditions in the set");
        } else if (core->kind == FKind::Max || core->kind == FKind::SupN) {
            for (const auto& k : core->kids)
                if (lower(k, e.c->at) >= r && r > core->bound.lo) {
                    flag("decomposition: " + to_string(k) + " is forced at least " + r.str() + " against " + sigma.str(*e.c));
                    break;
                }
        } else if (core->kind == FKind::Min || core->kind == FKind::InfN) {
            bool all = !core->kids.empty();
            for (const auto& k : core->kids) all = all && lower(k, e.c->at) >= r;
            if (all && r > core->bound.lo) flag("decomposition: every branch of " + sigma.str(*e.c) + " is forced at least " + r.str());
        }
    }
    return rep;
}

SeedDocument parse_seed(const std::string& json_text, const ParseContext& ctx) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("seed: ") + e.what());
    }
    SeedDocument out;
    auto text = [](const json& v, const std::string& what) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw std::invalid_argument("seed: " + what + " must be a string");
    };
    if (doc.contains("constants"))
        for (const auto& c : doc.at("constants")) out.seed.constants.push_back(text(c, "constant"));
    auto intern = [&](const std::string& name) {
        int i = out.seed.constant(name);
        if (i >= 0) return i;
        out.seed.constants.push_back(name);
        return static_cast<int>(out.seed.constants.size()) - 1;
    };
    if (doc.contains("conditions"))
        for (const auto& c : doc.at("conditions")) {
            Condition cond;
            cond.phi = parse_formula(text(c.at("formula"), "formula"), ctx);
            if (c.contains("at"))
                for (const auto& a : c.at("at")) cond.at.push_back(intern(text(a, "at")));
            auto r = Rational::try_parse(text(c.at("r"), "r"));
            if (!r) throw std::invalid_argument("seed: r must be written p/q");
            cond.r = *r;
            out.seed.conditions.push_back(std::move(cond));
        }
    if (doc.contains("assignment"))
        for (const auto& [k, v] : doc.at("assignment").items()) out.assignment[k] = text(v, "assignment");
    return out;
}

std::string condition_set_json(const ConditionSet& sigma) {
    nlohmann::ordered_json doc;
    doc["constants"] = sigma.constants;
    doc["conditions"] = nlohmann::ordered_json::array();
    for (const auto& c : sigma.conditions) {
        nlohmann::ordered_json e;
        e["formula"] = to_string(c.phi);
        std::vector<std::string> at;
        for (int a : c.at) at.push_back(a < 0 ? "" : sigma.constants.at(static_cast<std::size_t>(a)));
        e["at"] = at;
        e["r"] = c.r.str();
        doc["conditions"].push_back(e);
    }
    return doc.dump(2);
}

// ---------------------------------------------------------------- Henkin stages

namespace {

class Henkin {
public:
    Henkin(const MetricStructure& oracle) : A_(oracle), ev_(oracle) {}

    ConditionSet gamma;
    std::vector<int> assign;
    std::vector<std::string> notes;

    int new_constant(int point) {
        gamma.constants.push_back("c" + std::to_string(gamma.constants.size()));
        assign.push_back(point);
        return static_cast<int>(assign.size()) - 1;
    }

    Rational value(const Formula& f, const std::vector<int>& at) {
        Assignment a(at.size(), -1);
        for (std::size_t i = 0; i < at.size(); ++i)
            if (at[i] >= 0) a[i] = assign[static_cast<std::size_t>(at[i])];
        return ev_.eval(f, a);
    }

    // adds f < r, lowered to the top of the range; skipped only when f sits at its maximum
    bool add(const Formula& f, std::vector<int> at, Rational r) {
        if (r > f->bound.hi) r = f->bound.hi;
        Rational v = value(f, at);
        if (!(v < r)) return false;
        at.resize(static_cast<std::size_t>(std::max(f->width, 0)), -1);
        Condition c{f, std::move(at), r};
        std::string key = gamma.str(c);
        if (!keys_.insert(key).second) return false;
        gamma.conditions.push_back(std::move(c));
        pending_.push_back(gamma.conditions.size() - 1);
        return true;
    }

    void decompose_all() {
        bool changed = true;
        while (changed) {
            changed = false;
            while (!pending_.empty()) {
                std::size_t i = pending_.front();
                pending_.erase(pending_.begin());
                decompose(gamma.conditions[i]);
                changed = true;
            }
            for (auto& u : universals_)
                while (u.applied < assign.size()) {
                    std::vector<int> at = u.at;
                    at.resize(std::max(at.size(), static_cast<std::size_t>(u.var) + 1), -1);
                    at[static_cast<std::size_t>(u.var)] = static_cast<int>(u.applied++);
                    changed = add(u.body, at, u.r) || changed;
                }
        }
    }

    // P2: pin atomic sentences over the constants to within slack
    void tighten(const Rational& slack) {
        const Signature& sig = A_.signature();
        const int C = static_cast<int>(assign.size());
        auto pin = [&](const Formula& atom, const std::vector<int>& at) {
            Rational v = value(atom, at);
            if (v + slack <= atom->bound.hi) add(atom, at, v + slack);
            Formula neg = scale(Rational(-1), atom);
            if (-v + slack <= neg->bound.hi) add(neg, at, -v + slack);
        };
        Formula d = distance_atom(0, 1);
        for (int a = 0; a < C; ++a)
            for (int b = a + 1; b < C; ++b) pin(d, {a, b});
        for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
            const int k = sig.predicates()[p].arity;
            std::vector<TermPtr> vars;
            for (int i = 0; i < k; ++i) vars.push_back(var_term(i));
            Formula atom = atomic(sig, static_cast<int>(p), vars);
            for (const auto& t : all_tuples(C, k)) pin(atom, t);
        }
    }

    // P3: term listing c_0, f(..), c_1, ... with one witness per stage
    void cover_next_term(const Rational& r) {
        while (terms_.empty()) extend_listing();
        auto [f, args] = terms_.front();
        terms_.erase(terms_.begin());
        const Signature& sig = A_.signature();
        if (f < 0) {
            int c = args[0];
            if (c >= static_cast<int>(assign.size())) c = new_constant(uncovered_point());
            add(distance_atom(0, 1), {c, c}, r);
            notes.push_back("P3 " + gamma.constants[static_cast<std::size_t>(c)]);
            return;
        }
        std::vector<int> pts;
        for (int a : args) pts.push_back(assign[static_cast<std::size_t>(a)]);
        const int target = A_.func(f, pts.data());
        int w = -1;
        for (std::size_t c = 0; c < assign.size() && w < 0; ++c)
            if (assign[c] == target) w = static_cast<int>(c);
        if (w < 0) w = new_constant(target);
        std::vector<TermPtr> fa;
        std::vector<int> at{w};
        for (std::size_t i = 0; i < args.size(); ++i) {
            fa.push_back(var_term(static_cast<int>(i) + 1));
            at.push_back(args[i]);
        }
        add(atomic(sig, kDistance, {var_term(0), app_term(sig, f, fa)}), at, r);
        notes.push_back("P3 " + gamma.constants[static_cast<std::size_t>(w)] + " for " + sig.functions()[static_cast<std::size_t>(f)].name);
    }

private:
    struct Universal {
        Formula body;
        int var;
        std::vector<int> at;
        Rational r;
        std::size_t applied = 0;
    };

    const MetricStructure& A_;
    Evaluator ev_;
    std::set<std::string> keys_;
    std::vector<std::size_t> pending_;
    std::vector<Universal> universals_;
    std::vector<std::pair<int, std::vector<int>>> terms_;
    int listed_ = 0;

    int uncovered_point() {
        std::vector<bool> seen(static_cast<std::size_t>(A_.size()), false);
        for (int p : assign) seen[static_cast<std::size_t>(p)] = true;
        for (int p = 0; p < A_.size(); ++p)
            if (!seen[static_cast<std::size_t>(p)]) return p;
        return static_cast<int>(assign.size()) % A_.size();
    }

    void extend_listing() {
        const int j = listed_++;
        terms_.push_back({-1, {j}});
        const Signature& sig = A_.signature();
        for (std::size_t f = 0; f < sig.functions().size(); ++f)
            for (const auto& t : all_tuples(j + 1, sig.functions()[f].arity))
                if (std::find(t.begin(), t.end(), j) != t.end()) terms_.push_back({static_cast<int>(f), t});
    }

    void decompose(const Condition& c) {
        Peeled p = peel(c.phi);
        if (p.q.is_zero()) return;
        const bool pos = p.q.sign() > 0;
        const Rational r = c.r / abs(p.q);
        auto ch = [&](const Formula& f) { return pos ? f : scale(Rational(-1), f); };
        const Formula& core = p.core;
        const FKind k = core->kind;
        const bool conj = (pos && (k == FKind::Max || k == FKind::SupN)) || (!pos && (k == FKind::Min || k == FKind::InfN));
        const bool disj = (pos && (k == FKind::Min || k == FKind::InfN)) || (!pos && (k == FKind::Max || k == FKind::SupN));
        if (k == FKind::Sum) {
            Formula a = ch(core->kids[0]), b = ch(core->kids[1]);
            Rational va = value(a, c.at), vb = value(b, c.at);
            Rational half = (r - va - vb) / Rational(2);
            add(a, c.at, va + half);
            add(b, c.at, vb + half);
        } else if (conj) {
            for (const auto& kid : core->kids) add(ch(kid), c.at, r);
        } else if (disj) {
            Formula best;
            Rational bv;
            for (const auto& kid : core->kids) {
                Rational v = value(ch(kid), c.at);
                if (!best || v < bv) {
                    best = ch(kid);
                    bv = v;
                }
            }
            if (best) add(best, c.at, r);
        } else if ((pos && k == FKind::Sup) || (!pos && k == FKind::Inf)) {
            universals_.push_back({ch(core->kids[0]), core->var, c.at, r});
        } else if ((pos && k == FKind::Inf) || (!pos && k == FKind::Sup)) {
            Formula body = ch(core->kids[0]);
            std::vector<int> at = c.at;
            at.resize(std::max(at.size(), static_cast<std::size_t>(core->var) + 1), -1);
            int best = -1;
            Rational bv;
            for (int q = 0; q < A_.size(); ++q) {
                Assignment a(at.size(), -1);
                for (std::size_t i = 0; i < at.size(); ++i)
                    if (at[i] >= 0) a[i] = assign[static_cast<std::size_t>(at[i])];
                a[static_cast<std::size_t>(core->var)] = q;
                Rational v = ev_.eval(body, a);
                if (best < 0 || v < bv) {
                    best = q;
                    bv = v;
                }
            }
            at[static_cast<std::size_t>(core->var)] = new_constant(best);
            notes.push_back("witness " + gamma.constants.back() + " for " + to_string(c.phi));
            add(body, at, r);
        }
    }
};

bool is_distance_pair(const Formula& f) {
    return f->kind == FKind::Atomic && f->pred == kDistance && f->terms[0]->var == 0 && f->terms[1]->var == 1;
}

}  // namespace

HenkinResult henkin_run(const ConditionSet& seed, const std::map<std::string, std::string>& assignment,
                        const MetricStructure& oracle, int stages) {
    if (stages < 1) throw std::invalid_argument("henkin: stages must be positive");
    if (oracle.size() == 0) throw std::invalid_argument("henkin: empty oracle");
    ConditionReport vr = validate_conditions(seed);
    if (!vr.ok) throw std::invalid_argument("henkin: seed rejected: " + vr.violations.front());

    Henkin h(oracle);
    h.gamma.constants = seed.constants;
    for (const auto& name : seed.constants) {
        auto it = assignment.find(name);
        if (it == assignment.end()) throw std::invalid_argument("henkin: constant " + name + " has no assignment");
        int p = oracle.point_index(it->second);
        if (p < 0) throw std::invalid_argument("henkin: unknown point " + it->second);
        h.assign.push_back(p);
    }
    for (const auto& c : seed.conditions) {
        if (!(h.value(c.phi, c.at) < c.r)) throw std::invalid_argument("henkin: seed condition fails in the oracle: " + seed.str(c));
        if (!h.add(c.phi, c.at, c.r))
            throw std::invalid_argument("henkin: duplicate seed condition " + seed.str(c));
    }

    HenkinResult out;
    out.stages = stages;
    auto snapshot = [&]() {
        std::vector<std::string> keys;
        for (const auto& c : h.gamma.conditions) keys.push_back(h.gamma.str(c));
        std::sort(keys.begin(), keys.end());
        out.chain.push_back(std::move(keys));
    };
    snapshot();
    for (int i = 0; i < stages; ++i) {
        h.notes.clear();
        h.cover_next_term(Rational::pow2(-(i + 1)));
        h.decompose_all();
        h.tighten(Rational::pow2(-(i + 2)));
        h.decompose_all();
        snapshot();
        out.trace.push_back({i + 1, h.gamma.conditions.size(), h.notes});
    }
    out.gamma = h.gamma;
    out.assignment = h.assign;

    out.monotone = true;
    for (std::size_t i = 0; i + 1 < out.chain.size(); ++i)
        out.monotone = out.monotone && std::includes(out.chain[i + 1].begin(), out.chain[i + 1].end(), out.chain[i].begin(), out.chain[i].end());
    out.satisfiable = true;
    for (const auto& c : out.gamma.conditions) out.satisfiable = out.satisfiable && h.value(c.phi, c.at) < c.r;

    // quotient by distance bounds at most 2^(1-k)
    const std::size_t C = out.assignment.size();
    std::vector<std::vector<std::optional<Rational>>> ub(C, std::vector<std::optional<Rational>>(C));
    for (const auto& c : out.gamma.conditions) {
        if (!is_distance_pair(c.phi)) continue;
        auto a = static_cast<std::size_t>(c.at[0]), b = static_cast<std::size_t>(c.at[1]);
        for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}})
            if (!ub[x][y] || c.r < *ub[x][y]) ub[x][y] = c.r;
    }
    std::vector<std::size_t> parent(C);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    const Rational close = Rational::pow2(1 - stages);
    for (std::size_t a = 0; a < C; ++a)
        for (std::size_t b = 0; b < C; ++b)
            if (a != b && ub[a][b] && *ub[a][b] <= close) parent[std::max(find(a), find(b))] = std::min(find(a), find(b));
    std::map<std::size_t, int> cls;
    for (std::size_t a = 0; a < C; ++a) {
        auto root = find(a);
        if (!cls.count(root)) {
            cls[root] = static_cast<int>(out.classes.size());
            out.classes.emplace_back();
        }
        out.classes[static_cast<std::size_t>(cls[root])].push_back(static_cast<int>(a));
    }
    const std::size_t Q = out.classes.size();
    std::vector<std::string> names;
    for (const auto& k : out.classes) names.push_back("[" + out.gamma.constants[static_cast<std::size_t>(k.front())] + "]");
    MetricStructure q(oracle.signature_ptr(), names);
    const Signature& sig = oracle.signature();
    const Rational dhi = distance_atom(0, 1)->bound.hi;
    out.max_error = Rational(0);
    for (std::size_t i = 0; i < Q; ++i)
        for (std::size_t j = 0; j < Q; ++j) {
            Rational v(0);
            if (i != j) {
                std::optional<Rational> best;
                for (int a : out.classes[i])
                    for (int b : out.classes[j]) {
                        const auto& u = ub[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
                        if (u && (!best || *u < *best)) best = u;
                    }
                v = best ? min(*best, dhi) : dhi;
            }
            q.set_d(static_cast<int>(i), static_cast<int>(j), v);
            const int pa = out.assignment[static_cast<std::size_t>(out.classes[i].front())];
            const int pb = out.assignment[static_cast<std::size_t>(out.classes[j].front())];
            out.max_error = max(out.max_error, abs(v - oracle.d(pa, pb)));
        }
    auto rep = [&](std::size_t cl) { return out.classes[cl].front(); };
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
        const int k = sig.predicates()[p].arity;
        const Rational hi = sig.predicates()[p].bound.hi;
        for (const auto& t : all_tuples(static_cast<int>(Q), k)) {
            std::vector<int> at;
            for (int x : t) at.push_back(rep(static_cast<std::size_t>(x)));
            std::optional<Rational> best;
            for (const auto& c : out.gamma.conditions)
                if (c.phi->kind == FKind::Atomic && c.phi->pred == static_cast<int>(p) && relevant(c.phi, c.at) == at &&
                    (!best || c.r < *best))
                    best = c.r;
            q.set_pred(static_cast<int>(p), t, best ? min(*best, hi) : hi);
        }
    }
    for (std::size_t f = 0; f < sig.functions().size(); ++f)
        for (const auto& t : all_tuples(static_cast<int>(Q), sig.functions()[f].arity)) {
            std::optional<Rational> best;
            int target = -1;
            for (const auto& c : out.gamma.conditions) {
                const Formula& g = c.phi;
                if (g->kind != FKind::Atomic || g->pred != kDistance || g->terms[0]->var != 0 || g->terms[1]->func != static_cast<int>(f))
                    continue;
                bool match = c.at.size() == t.size() + 1;
                for (std::size_t i = 0; i < t.size() && match; ++i) match = g->terms[1]->args[i]->var == static_cast<int>(i) + 1;
                for (std::size_t i = 0; i < t.size() && match; ++i)
                    match = find(static_cast<std::size_t>(c.at[i + 1])) == find(static_cast<std::size_t>(rep(static_cast<std::size_t>(t[i]))));
                if (match && (!best || c.r < *best)) {
                    best = c.r;
                    target = cls[find(static_cast<std::size_t>(c.at[0]))];
                }
            }
            if (target < 0) {
                out.functions_complete = false;
                std::vector<int> pts;
                for (int x : t) pts.push_back(out.assignment[static_cast<std::size_t>(rep(static_cast<std::size_t>(x)))]);
                const int img = oracle.func(static_cast<int>(f), pts.data());
                Rational bd;
                for (std::size_t cl = 0; cl < Q; ++cl) {
                    Rational dv = oracle.d(img, out.assignment[static_cast<std::size_t>(rep(cl))]);
                    if (target < 0 || dv < bd) {
                        target = static_cast<int>(cl);
                        bd = dv;
                    }
                }
            }
            q.set_func(static_cast<int>(f), t, target);
        }
    out.quotient = std::move(q);
    return out;
}

}  // namespace cil
