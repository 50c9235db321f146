#include "cil/baf.hpp"
#include "cil/eval.hpp"
#include "cil/orbit.hpp"
#include "cil/types.hpp"
#include "cil/version.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace cil;
using Json = nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Report {
    Json doc;
    std::vector<std::string> lines;
    bool failed = false;  // domain-level negative outcome, exit 1
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Rational rational_arg(const std::string& text, const std::string& flag) {
    auto r = Rational::try_parse(text);
    if (!r) throw UsageError(flag + " must be a rational written p/q, got '" + text + "'");
    return *r;
}

MetricStructure load_valid(const std::string& path) {
    LoadResult lr = load_structure_file(path);
    if (!lr.report.empty()) throw std::invalid_argument(path + ": " + lr.report.front().axiom + ": " + lr.report.front().message);
    return lr.structure;
}

WeakModulus omega_for(const Signature& sig, const std::string& spec) {
    if (spec == "universal") return universal_modulus(sig);
    Json doc;
    try {
        doc = Json::parse(read_file(spec));
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(spec + ": " + e.what());
    }
    std::vector<Modulus> table;
    int n = 1;
    for (const auto& t : doc.at("truncations")) table.push_back(Modulus::parse(t.get<std::string>(), n++));
    return WeakModulus::from_table(doc.value("name", spec), std::move(table));
}

std::vector<int> tuple_arg(const MetricStructure& s, const std::string& text) {
    std::vector<int> out;
    std::string item;
    std::stringstream ss(text);
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        int p = s.point_index(item);
        if (p < 0) throw std::invalid_argument("unknown point '" + item + "'");
        out.push_back(p);
    }
    return out;
}

Json tuple_json(const MetricStructure& s, const std::vector<int>& t) {
    Json a = Json::array();
    for (int p : t) a.push_back(s.point(p));
    return a;
}

Json rank_json(const QuantRank& r) {
    return Json{{"class", r.str()}, {"inf_level", r.inf_level}, {"sup_level", r.sup_level}};
}

struct Options {
    std::string structure, a, b, formula, formula_file, tuple, at, seed, omega = "universal";
    std::string t = "1/2", r = "0", eps = "1/2";
    int depth = 3, max_len = 2, max_rank = 3, connective_depth = 0, fragment_depth = default_fragment_depth();
    int level = 0, m_max = 6, stages = 10, arity = 0, truncation = 0;
    bool no_domega = false, self_check = false, audit = false, check = false, print_sentence = false;
    std::vector<std::string> against;
    bool json = false;
    std::string out;
};

Formula formula_arg(const Options& o, const Signature& sig, const WeakModulus& omega) {
    if (o.formula.empty() == o.formula_file.empty()) throw UsageError("give exactly one of --formula and --formula-file");
    ParseContext ctx{&sig, omega};
    return parse_formula(o.formula.empty() ? read_file(o.formula_file) : o.formula, ctx);
}

Json base_config(const Options& o) { return Json{{"omega", o.omega}}; }

// ---------------------------------------------------------------- commands

Report cmd_validate(const Options& o) {
    Report rep;
    LoadResult lr = load_structure_file(o.structure);
    Json v = Json::array();
    for (const auto& x : lr.report) {
        v.push_back({{"axiom", x.axiom}, {"message", x.message}});
        rep.lines.push_back(x.axiom + ": " + x.message);
    }
    rep.doc["config"] = {{"structure", o.structure}};
    rep.doc["result"] = {{"valid", lr.report.empty()}, {"points", lr.structure.size()}, {"violations", v}};
    rep.lines.push_back(lr.report.empty() ? "valid" : std::to_string(lr.report.size()) + " violation(s)");
    rep.failed = !lr.report.empty();
    return rep;
}

Report cmd_eval(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    Formula f = formula_arg(o, s.signature(), om);
    Json cfg = base_config(o);
    cfg["structure"] = o.structure;
    cfg["formula"] = to_string(f);
    Json res;
    if (!o.at.empty() || f->width == 0) {
        auto t = tuple_arg(s, o.at);
        cfg["at"] = tuple_json(s, t);
        Rational v = eval(f, s, assignment_of(t));
        res["value"] = v.str();
        rep.lines.push_back("value " + v.str());
    } else {
        EvalTable tab = eval_all(f, s);
        Json rows = Json::array();
        for (std::size_t i = 0; i < tab.values.size(); ++i) {
            auto row = tab.row(i);
            std::string a;
            for (std::size_t k = 0; k < row.size(); ++k)
                a += (k ? " " : "") + std::string("x") + std::to_string(tab.vars[k]) + "=" + s.point(row[k]);
            rows.push_back({{"assignment", a}, {"value", tab.values[i].str()}});
            rep.lines.push_back(a + " -> " + tab.values[i].str());
        }
        res["table"] = rows;
    }
    rep.doc["config"] = cfg;
    rep.doc["result"] = res;
    return rep;
}

Report cmd_prenex(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    Formula f = formula_arg(o, s.signature(), om);
    Formula p = prenex(f);
    Json res{{"prenex", to_string(p)}, {"rank", rank_json(quant_rank(p))}};
    rep.lines.push_back(to_string(p));
    if (o.check) {
        EvalTable a = eval_all(f, s), b = eval_all(p, s);
        bool same_values = a.values == b.values;
        res["values_preserved"] = same_values;
        rep.lines.push_back(same_values ? "values preserved on every assignment" : "VALUES DIFFER");
        rep.failed = !same_values;
    }
    rep.doc["config"] = {{"structure", o.structure}, {"formula", to_string(f)}, {"omega", o.omega}, {"check", o.check}};
    rep.doc["result"] = res;
    return rep;
}

Report cmd_rank_of(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    Formula f = formula_arg(o, s.signature(), om);
    QuantRank r = quant_rank(f);
    rep.doc["config"] = {{"structure", o.structure}, {"formula", to_string(f)}, {"omega", o.omega}};
    rep.doc["result"] = rank_json(r);
    rep.lines.push_back(r.str());
    return rep;
}

Report cmd_modulus(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    Json cfg{{"structure", o.structure}, {"omega", o.omega}, {"audit", o.audit}, {"truncation", o.truncation}};
    Json res;
    if (o.truncation > 0) {
        res["omega_truncation"] = om.truncation(o.truncation).str();
        rep.lines.push_back(om.name() + "|" + std::to_string(o.truncation) + " = " + om.truncation(o.truncation).str());
    }
    if (!o.formula.empty() || !o.formula_file.empty()) {
        Formula f = formula_arg(o, s.signature(), om);
        cfg["formula"] = to_string(f);
        res["bound"] = f->bound.str();
        res["modulus"] = f->modulus.str();
        res["arity"] = f->modulus.arity();
        rep.lines.push_back("bound " + f->bound.str());
        rep.lines.push_back("modulus " + f->modulus.str());
        if (o.audit) {
            auto v = audit_modulus(f, s);
            Json arr = Json::array();
            for (const auto& x : v) arr.push_back({{"axiom", x.axiom}, {"message", x.message}});
            res["audit"] = arr;
            rep.lines.push_back(v.empty() ? "audit passed" : std::to_string(v.size()) + " audit violation(s)");
            for (const auto& x : v) rep.lines.push_back("  " + x.message);
            rep.failed = !v.empty();
        }
    } else if (o.truncation <= 0) {
        throw UsageError("modulus needs --formula, --formula-file or --truncation");
    }
    rep.doc["config"] = cfg;
    rep.doc["result"] = res;
    return rep;
}

BafConfig baf_config(const Options& o, const Signature& sig) {
    BafConfig c;
    c.omega = omega_for(sig, o.omega);
    c.t = rational_arg(o.t, "--t");
    if (c.t.sign() <= 0) throw UsageError("--t must be positive");
    c.depth = o.depth;
    c.max_tuple_len = o.max_len;
    c.connective_depth = o.connective_depth;
    c.domega_atoms = !o.no_domega;
    return c;
}

Json baf_cfg_json(const Options& o, const BafConfig& c) {
    return {{"a", o.a}, {"b", o.b}, {"omega", o.omega}, {"t", c.t.str()}, {"depth", c.depth}, {"max_tuple_len", c.max_tuple_len},
            {"connective_depth", c.connective_depth}, {"domega_atoms", c.domega_atoms}};
}

Report cmd_baf(const Options& o) {
    Report rep;
    MetricStructure A = load_valid(o.a), B = load_valid(o.b);
    BafConfig c = baf_config(o, A.signature());
    BafSet set = baf_compute(A, B, c);
    Json per = Json::array();
    for (std::size_t n = 0; n < set.pairs.size(); ++n) {
        per.push_back({{"length", n}, {"pairs", set.pairs[n].size()}});
        rep.lines.push_back("length " + std::to_string(n) + ": " + std::to_string(set.pairs[n].size()) + " pair(s)");
    }
    const bool root = set.contains({}, {}, A.size(), B.size());
    BafFragment frag(A.signature(), c);
    rep.doc["config"] = baf_cfg_json(o, c);
    rep.doc["result"] = {{"root_survives", root}, {"total", set.total()}, {"per_length", per},
                         {"fragment_size", frag.size(c.max_tuple_len)}};
    rep.lines.insert(rep.lines.begin(), std::string("root pair ") + (root ? "survives" : "eliminated") + " at depth " + std::to_string(c.depth));
    return rep;
}

Report cmd_iso(const Options& o) {
    Report rep;
    MetricStructure A = load_valid(o.a), B = load_valid(o.b);
    BafConfig c = baf_config(o, A.signature());
    BafVerdict v = approx_iso_decide(A, B, c);
    Json res{{"verdict", v.yes ? "yes" : "no"}, {"depth", v.depth}, {"fragment_size", v.fragment_size}};
    rep.lines.push_back(std::string("verdict ") + (v.yes ? "yes" : "no") + " at depth " + std::to_string(v.depth));
    if (!v.yes) {
        res["witness"] = v.witness;
        res["sentence"] = to_string(v.sentence);
        res["value_a"] = v.value_a.str();
        res["value_b"] = v.value_b.str();
        res["gap"] = abs(v.value_a - v.value_b).str();
        for (const auto& w : v.witness) rep.lines.push_back("  " + w);
        rep.lines.push_back("sentence " + to_string(v.sentence));
        rep.lines.push_back("values " + v.value_a.str() + " / " + v.value_b.str());
    }
    if (A.size() == B.size()) {
        IsoResult iso = extract_iso(A, B);
        Json bij = Json::object();
        for (std::size_t i = 0; i < iso.bijection.size(); ++i) bij[A.point(static_cast<int>(i))] = B.point(iso.bijection[i]);
        res["bijection"] = bij;
        res["discrepancy"] = iso.discrepancy.str();
        res["worst_atom"] = iso.worst;
        res["isomorphism"] = iso.isomorphism();
        rep.lines.push_back("best bijection discrepancy " + iso.discrepancy.str() + (iso.worst.empty() ? "" : " at " + iso.worst));
    }
    rep.doc["config"] = baf_cfg_json(o, c);
    rep.doc["result"] = res;
    return rep;
}

Report cmd_autos(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    AutGroup g = automorphisms(s);
    Json els = Json::array();
    for (const auto& p : g.elements) {
        Json m = Json::object();
        for (std::size_t i = 0; i < p.size(); ++i) m[s.point(static_cast<int>(i))] = s.point(p[i]);
        els.push_back(m);
        rep.lines.push_back(s.tuple_str(p));
    }
    rep.lines.insert(rep.lines.begin(), "group of size " + std::to_string(g.size()));
    rep.doc["config"] = {{"structure", o.structure}};
    rep.doc["result"] = {{"size", g.size()}, {"elements", els}};
    return rep;
}

FragmentOptions fragment_options(const Options& o) {
    FragmentOptions f;
    f.ef_depth = o.fragment_depth;
    f.connective_depth = o.connective_depth;
    f.domega_atoms = !o.no_domega;
    return f;
}

Json fragment_cfg(const Options& o) {
    return {{"fragment_depth", o.fragment_depth}, {"connective_depth", o.connective_depth}, {"domega_atoms", !o.no_domega}};
}

Json synthesis_json(const MetricStructure& s, const OrbitSynthesis& syn) {
    Json delta = Json::array();
    for (const auto& d : syn.delta_table) delta.push_back({{"eps", d.eps.str()}, {"delta", d.delta.str()}});
    Json j{{"tuple", tuple_json(s, syn.tuple)}, {"level", syn.level}, {"ok", syn.ok}};
    if (!syn.failure.empty()) j["failure"] = syn.failure;
    if (syn.psi) {
        j["separators"] = syn.separators;
        j["psi"] = to_string(syn.psi);
        j["psi_rank"] = rank_json(syn.psi_rank);
        j["predicate"] = to_string(syn.predicate);
        j["predicate_rank"] = rank_json(syn.predicate_rank);
        j["scale"] = syn.scale.str();
        j["cap"] = syn.cap.str();
        j["zero_set_exact"] = syn.zero_set_exact;
        j["predicate_exact"] = syn.predicate_exact;
        j["delta_ok"] = syn.delta_ok;
        j["delta_table"] = delta;
    }
    return j;
}

Report cmd_orbit(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    OrbitAnalyzer an(s, omega_for(s.signature(), o.omega), fragment_options(o));
    auto a = tuple_arg(s, o.tuple);
    const OrbitSynthesis& syn = an.synthesize(a, o.level);
    Json members = Json::array();
    for (const auto& m : orbit_members(an.group(), a)) members.push_back(tuple_json(s, m));
    const auto& dist = an.distances(a);
    auto tuples = all_tuples(s.size(), static_cast<int>(a.size()));
    Json dj = Json::array();
    for (std::size_t i = 0; i < tuples.size(); ++i) dj.push_back({{"tuple", tuple_json(s, tuples[i])}, {"distance", dist[i].str()}});
    Json cfg = fragment_cfg(o);
    cfg["structure"] = o.structure;
    cfg["omega"] = o.omega;
    cfg["tuple"] = tuple_json(s, a);
    cfg["level"] = o.level;
    rep.doc["config"] = cfg;
    rep.doc["result"] = {{"orbit", members}, {"orbit_distance", dj}, {"synthesis", synthesis_json(s, syn)}};
    rep.lines.push_back("orbit of " + s.tuple_str(a) + ": " + std::to_string(members.size()) + " member(s)");
    if (syn.ok) {
        rep.lines.push_back("psi " + to_string(syn.psi));
        rep.lines.push_back("psi rank " + syn.psi_rank.str() + ", predicate rank " + syn.predicate_rank.str());
        rep.lines.push_back("zero set exact, delta table ok, predicate equals orbit distance");
    } else {
        rep.lines.push_back("synthesis failed: " + syn.failure);
        rep.failed = true;
    }
    return rep;
}

Report cmd_scott(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    OrbitAnalyzer an(s, omega_for(s.signature(), o.omega), fragment_options(o));
    int level = o.level;
    RankResult rank;
    if (level == 0) {
        rank = scott_rank(an, o.max_len, o.max_rank);
        level = rank.rank > 0 ? rank.rank : 0;
    }
    ScottArtifacts art = scott_sentence(an, o.max_len, level);
    Json cfg = fragment_cfg(o);
    cfg["structure"] = o.structure;
    cfg["omega"] = o.omega;
    cfg["max_len"] = o.max_len;
    cfg["level"] = level;
    cfg["self_check"] = o.self_check;
    cfg["against"] = o.against;
    Json res{{"ok", art.ok}};
    if (!art.ok) {
        res["failure"] = art.failure;
        rep.failed = true;
        rep.lines.push_back("scott sentence failed: " + art.failure);
    } else {
        Json sents = Json::array();
        for (const auto& f : art.sentences) sents.push_back(to_string(f));
        res["sentences"] = sents;
        res["rank"] = rank_json(art.rank);
        res["orbit_predicates"] = art.predicates.size();
        rep.lines.push_back("S_1..S_" + std::to_string(o.max_len) + " built from " + std::to_string(art.predicates.size()) +
                            " orbit predicate(s), rank " + art.rank.str());
        if (o.print_sentence) rep.lines.push_back(to_string(art.sentence));
        if (o.self_check) {
            Json vals = Json::array();
            bool zero = true;
            for (const auto& f : art.sentences) {
                Rational v = eval(f, s, {});
                vals.push_back(v.str());
                zero = zero && v.is_zero();
            }
            res["self_values"] = vals;
            rep.lines.push_back(zero ? "S(s)=0" : "S(s) != 0");
            rep.failed = rep.failed || !zero;
        }
        Json other = Json::array();
        for (const auto& path : o.against) {
            MetricStructure B = load_valid(path);
            if (B.signature() != s.signature()) throw std::invalid_argument(path + ": signature differs");
            Json vals = Json::array();
            std::string line = path + ":";
            for (const auto& f : art.sentences) {
                Rational v = eval(f, B, {});
                vals.push_back(v.str());
                line += " " + v.str();
            }
            other.push_back({{"structure", path}, {"values", vals}});
            rep.lines.push_back(line);
        }
        if (!o.against.empty()) res["against"] = other;
    }
    rep.doc["config"] = cfg;
    rep.doc["result"] = res;
    return rep;
}

Report cmd_rank(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    OrbitAnalyzer an(s, omega_for(s.signature(), o.omega), fragment_options(o));
    RankResult r = scott_rank(an, o.max_len, o.max_rank);
    Json wit = Json::array();
    for (const auto& [t, labels] : r.witnesses) wit.push_back({{"tuple", tuple_json(s, t)}, {"separators", labels}});
    Json cfg = fragment_cfg(o);
    cfg["structure"] = o.structure;
    cfg["omega"] = o.omega;
    cfg["max_len"] = o.max_len;
    cfg["max_rank"] = o.max_rank;
    rep.doc["config"] = cfg;
    rep.doc["result"] = {{"rank", r.rank > 0 ? Json(r.rank) : Json("> " + std::to_string(o.max_rank))}, {"witnesses", wit}, {"notes", r.notes}};
    rep.lines.push_back(r.rank > 0 ? "rank " + std::to_string(r.rank) : "rank > " + std::to_string(o.max_rank));
    for (const auto& n : r.notes) rep.lines.push_back("note: " + n);
    return rep;
}

Report cmd_theta(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    Formula psi = formula_arg(o, s.signature(), om);
    Rational r = rational_arg(o.r, "--r"), eps = rational_arg(o.eps, "--eps");
    if (eps.sign() <= 0) throw UsageError("--eps must be positive");
    Formula th = theta(psi, r, eps, om, o.arity);
    EvalTable tab = eval_all(th, s);
    Json zeros = Json::array();
    for (std::size_t i = 0; i < tab.values.size(); ++i)
        if (tab.values[i].is_zero()) zeros.push_back(tuple_json(s, tab.row(i)));
    rep.doc["config"] = {{"structure", o.structure}, {"formula", to_string(psi)}, {"r", r.str()}, {"eps", eps.str()},
                         {"arity", o.arity}, {"omega", o.omega}};
    rep.doc["result"] = {{"theta", to_string(th)}, {"rank", rank_json(quant_rank(th))},
                         {"recorded_inf_level", theta_rank_bound(quant_rank(psi))}, {"zero_set", zeros}};
    rep.lines.push_back(to_string(th));
    rep.lines.push_back("zero at " + std::to_string(zeros.size()) + " of " + std::to_string(tab.values.size()) + " tuple(s)");
    return rep;
}

Report cmd_type(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    OrbitAnalyzer an(s, omega_for(s.signature(), o.omega), fragment_options(o));
    auto a = tuple_arg(s, o.tuple);
    const Fragment& fr = an.fragment(static_cast<int>(a.size()));
    PartialType t = fragment_type(s, a, o.level > 0 ? restrict_sup(fr, o.level) : fr);
    Json conds = Json::array();
    for (std::size_t k = 0; k < t.size(); ++k) {
        conds.push_back({{"label", t.labels[k]}, {"formula", to_string(t.formulas[k])}, {"r", t.values[k].str()}});
        rep.lines.push_back(t.labels[k] + " <= " + t.values[k].str());
    }
    Json cfg = fragment_cfg(o);
    cfg["structure"] = o.structure;
    cfg["omega"] = o.omega;
    cfg["tuple"] = tuple_json(s, a);
    cfg["level"] = o.level;
    rep.doc["config"] = cfg;
    rep.doc["result"] = {{"arity", t.arity}, {"conditions", conds}};
    return rep;
}

Report cmd_support(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    OrbitAnalyzer an(s, om, fragment_options(o));
    auto a = tuple_arg(s, o.tuple);
    const int n = static_cast<int>(a.size());
    const Fragment& fr = an.fragment(n);
    PartialType t = fragment_type(s, a, o.level > 0 ? restrict_sup(fr, o.level) : fr);
    SupportResult sr = find_support(s, t, fr, om, o.m_max, o.level, &an.fragment_values(n));
    Json steps = Json::array();
    for (const auto& st : sr.steps)
        steps.push_back({{"m", st.m}, {"anchor", tuple_json(s, st.anchor)}, {"candidates", st.labels}, {"eta", st.eta.str()},
                         {"delta", st.delta.str()}, {"phi", to_string(st.phi)}});
    Json cfg = fragment_cfg(o);
    cfg["structure"] = o.structure;
    cfg["omega"] = o.omega;
    cfg["tuple"] = tuple_json(s, a);
    cfg["level"] = o.level;
    cfg["m_max"] = o.m_max;
    Json res{{"found", sr.found}, {"type_size", t.size()}, {"steps", steps}};
    if (sr.found) {
        res["scale"] = sr.scale.str();
        res["regularized"] = sr.regularized;
        res["predicate"] = to_string(sr.predicate);
        res["predicate_rank"] = rank_json(quant_rank(sr.predicate));
        rep.lines.push_back("support found" + std::string(sr.regularized ? " (regularized)" : "") + ", scale " + sr.scale.str());
        rep.lines.push_back("check_support passed on eps 2^-m, m <= " + std::to_string(o.m_max));
    } else {
        res["failure"] = sr.failure;
        rep.lines.push_back("no support: " + sr.failure);
        rep.failed = true;
    }
    rep.doc["config"] = cfg;
    rep.doc["result"] = res;
    return rep;
}

Report cmd_henkin(const Options& o) {
    Report rep;
    MetricStructure s = load_valid(o.structure);
    WeakModulus om = omega_for(s.signature(), o.omega);
    SeedDocument seed;
    if (!o.seed.empty()) seed = parse_seed(read_file(o.seed), ParseContext{&s.signature(), om});
    HenkinResult h = henkin_run(seed.seed, seed.assignment, s, o.stages);
    Json trace = Json::array();
    for (const auto& st : h.trace) trace.push_back({{"stage", st.index}, {"conditions", st.size}, {"notes", st.notes}});
    Json classes = Json::array();
    for (const auto& k : h.classes) {
        Json names = Json::array();
        for (int c : k) names.push_back(h.gamma.constants[static_cast<std::size_t>(c)]);
        classes.push_back({{"constants", names}, {"oracle_point", s.point(h.assignment[static_cast<std::size_t>(k.front())])}});
    }
    rep.doc["config"] = {{"structure", o.structure}, {"seed", o.seed}, {"stages", o.stages}, {"omega", o.omega}};
    rep.doc["result"] = {{"monotone", h.monotone}, {"satisfiable", h.satisfiable}, {"functions_complete", h.functions_complete},
                         {"max_distance_error", h.max_error.str()}, {"trace", trace}, {"classes", classes},
                         {"quotient", Json::parse(save_structure(h.quotient))}, {"gamma", Json::parse(condition_set_json(h.gamma))}};
    rep.lines.push_back(std::to_string(o.stages) + " stage(s), " + std::to_string(h.gamma.conditions.size()) + " condition(s), " +
                        std::to_string(h.gamma.constants.size()) + " constant(s)");
    rep.lines.push_back("quotient has " + std::to_string(h.classes.size()) + " point(s), max distance error " + h.max_error.str());
    rep.lines.push_back(std::string("chain ") + (h.monotone ? "monotone" : "NOT monotone") + ", " +
                        (h.satisfiable ? "satisfied in the oracle" : "NOT satisfied in the oracle"));
    rep.failed = !h.monotone || !h.satisfiable;
    return rep;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-structure toolkit for continuous infinitary logic"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Options o;

    auto common = [&](CLI::App* c) {
        c->add_flag("--json", o.json, "print the report document instead of the summary");
        c->add_option("--out", o.out, "write the report document to a file");
        c->add_option("--omega", o.omega, "weak modulus: universal or a truncation table file")->capture_default_str();
    };
    auto structure = [&](CLI::App* c) { c->add_option("--structure,-s", o.structure, "structure document")->required(); };
    auto formula = [&](CLI::App* c) {
        auto* f = c->add_option("--formula,-f", o.formula, "formula text");
        f->excludes(c->add_option("--formula-file", o.formula_file, "file holding the formula text"));
    };
    auto fragment = [&](CLI::App* c) {
        c->add_option("--fragment-depth", o.fragment_depth, "characteristic formula depth")->capture_default_str();
        c->add_option("--connective-depth", o.connective_depth, "qf connective combination depth")->capture_default_str();
        c->add_flag("--no-domega", o.no_domega, "omit d_Omega atoms from the qf fragment");
    };
    auto pair = [&](CLI::App* c) {
        c->add_option("--a", o.a, "first structure")->required();
        c->add_option("--b", o.b, "second structure")->required();
        c->add_option("--t", o.t, "tolerance p/q")->capture_default_str();
        c->add_option("--depth", o.depth, "game depth")->capture_default_str();
        c->add_option("--max-len", o.max_len, "longest tuple")->capture_default_str();
        c->add_option("--connective-depth", o.connective_depth, "qf connective combination depth")->capture_default_str();
        c->add_flag("--no-domega", o.no_domega, "omit d_Omega atoms");
    };

    std::map<CLI::App*, std::function<Report(const Options&)>> run;
    auto add = [&](const std::string& name, const std::string& help, std::function<Report(const Options&)> fn) {
        CLI::App* c = app.add_subcommand(name, help);
        common(c);
        run[c] = std::move(fn);
        return c;
    };

    structure(add("validate", "check structure axioms", cmd_validate));
    {
        auto* c = add("eval", "evaluate a formula", cmd_eval);
        structure(c);
        formula(c);
        c->add_option("--at", o.at, "comma separated points for x0,x1,..");
    }
    {
        auto* c = add("prenex", "prenex normal form", cmd_prenex);
        structure(c);
        formula(c);
        c->add_flag("--check", o.check, "compare values on every assignment");
    }
    {
        auto* c = add("rank-of", "quantifier rank of a formula", cmd_rank_of);
        structure(c);
        formula(c);
    }
    {
        auto* c = add("modulus", "inferred bound and modulus", cmd_modulus);
        structure(c);
        formula(c);
        c->add_flag("--audit", o.audit, "audit the modulus on the structure");
        c->add_option("--truncation", o.truncation, "print the weak modulus truncation at this arity");
    }
    pair(add("baf", "bounded back-and-forth set", cmd_baf));
    pair(add("iso", "approximate isomorphism decision", cmd_iso));
    structure(add("autos", "automorphism group", cmd_autos));
    {
        auto* c = add("orbit", "orbit and synthesized orbit formula", cmd_orbit);
        structure(c);
        fragment(c);
        c->add_option("--tuple", o.tuple, "comma separated points");
        c->add_option("--level", o.level, "inf-level cap on separators, 0 for none")->capture_default_str();
    }
    {
        auto* c = add("scott", "Scott sentences", cmd_scott);
        structure(c);
        fragment(c);
        c->add_option("--max-len", o.max_len, "longest tuple")->capture_default_str();
        c->add_option("--level", o.level, "separator level, 0 to use the computed rank")->capture_default_str();
        c->add_option("--max-rank", o.max_rank, "largest rank tried")->capture_default_str();
        c->add_flag("--self-check", o.self_check, "evaluate the sentences on the structure itself");
        c->add_flag("--print-sentence", o.print_sentence, "print the last sentence");
        c->add_option("--against", o.against, "evaluate on further structures");
    }
    {
        auto* c = add("rank", "Scott rank estimate", cmd_rank);
        structure(c);
        fragment(c);
        c->add_option("--max-len", o.max_len, "longest tuple")->capture_default_str();
        c->add_option("--max-rank", o.max_rank, "largest rank tried")->capture_default_str();
    }
    {
        auto* c = add("theta", "theta formula and its zero set", cmd_theta);
        structure(c);
        formula(c);
        c->add_option("--r", o.r, "threshold p/q")->capture_default_str();
        c->add_option("--eps", o.eps, "radius p/q")->capture_default_str();
        c->add_option("--arity", o.arity, "tuple arity when larger than the formula width");
    }
    {
        auto* c = add("type", "fragment type of a tuple", cmd_type);
        structure(c);
        fragment(c);
        c->add_option("--tuple", o.tuple, "comma separated points");
        c->add_option("--level", o.level, "keep formulas of sup-level at most this, 0 for all")->capture_default_str();
    }
    {
        auto* c = add("support", "search a supporting predicate for a fragment type", cmd_support);
        structure(c);
        fragment(c);
        c->add_option("--tuple", o.tuple, "comma separated points");
        c->add_option("--level", o.level, "rank level, 0 for none")->capture_default_str();
        c->add_option("--m-max", o.m_max, "eps ladder 2^-m, m <= m-max")->capture_default_str();
    }
    {
        auto* c = add("henkin", "oracle-guided staged Henkin construction", cmd_henkin);
        structure(c);
        c->add_option("--seed", o.seed, "seed condition document");
        c->add_option("--stages", o.stages, "number of stages")->capture_default_str();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    try {
        for (const auto& [text, flag] : {std::pair{o.t, "--t"}, std::pair{o.r, "--r"}, std::pair{o.eps, "--eps"}}) rational_arg(text, flag);
        Report rep = run.at(chosen)(o);
        Json doc;
        doc["tool"] = "cilwb";
        doc["version"] = kVersion;
        doc["command"] = chosen->get_name();
        doc["config"] = rep.doc["config"];
        doc["result"] = rep.doc["result"];
        const std::string text = doc.dump(2) + "\n";
        if (!o.out.empty()) {
            std::ofstream out(o.out);
            if (!out) throw std::invalid_argument("cannot write " + o.out);
            out << text;
        }
        if (o.json)
            std::cout << text;
        else
            for (const auto& l : rep.lines) std::cout << l << "\n";
        return rep.failed ? 1 : 0;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
