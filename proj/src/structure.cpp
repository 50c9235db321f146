#include "cil/structure.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cil {

using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------- signature

const PredicateSymbol& Signature::distance() {
    static const PredicateSymbol d{"d", 2,
                                   Modulus::sum(Modulus::proj(2, 0), Modulus::proj(2, 1)),
                                   Interval(Rational(0), Rational(1))};
    return d;
}

void Signature::check_name(const std::string& name) const {
    if (name.empty()) throw std::invalid_argument("empty symbol name");
    if (name == "d") throw std::invalid_argument("symbol name 'd' is reserved for the metric");
    if (find_predicate(name) != -2 || find_function(name) != -1)
        throw std::invalid_argument("duplicate symbol name '" + name + "'");
}

void Signature::add_predicate(PredicateSymbol p) {
    check_name(p.name);
    if (p.arity < 0) throw std::invalid_argument("negative arity for '" + p.name + "'");
    if (p.modulus.arity() != p.arity) p.modulus = p.modulus.widened(p.arity);
    preds_.push_back(std::move(p));
}

void Signature::add_function(FunctionSymbol f) {
    check_name(f.name);
    if (f.arity < 0) throw std::invalid_argument("negative arity for '" + f.name + "'");
    if (f.modulus.arity() != f.arity) f.modulus = f.modulus.widened(f.arity);
    funcs_.push_back(std::move(f));
}

int Signature::find_predicate(const std::string& name) const {
    if (name == "d") return kDistance;
    for (std::size_t i = 0; i < preds_.size(); ++i)
        if (preds_[i].name == name) return static_cast<int>(i);
    return -2;
}

int Signature::find_function(const std::string& name) const {
    for (std::size_t i = 0; i < funcs_.size(); ++i)
        if (funcs_[i].name == name) return static_cast<int>(i);
    return -1;
}

bool operator==(const Signature& a, const Signature& b) {
    if (a.preds_.size() != b.preds_.size() || a.funcs_.size() != b.funcs_.size()) return false;
    for (std::size_t i = 0; i < a.preds_.size(); ++i) {
        const auto& p = a.preds_[i];
        const auto& q = b.preds_[i];
        if (p.name != q.name || p.arity != q.arity || p.modulus != q.modulus || p.bound != q.bound) return false;
    }
    for (std::size_t i = 0; i < a.funcs_.size(); ++i) {
        const auto& f = a.funcs_[i];
        const auto& g = b.funcs_[i];
        if (f.name != g.name || f.arity != g.arity || f.modulus != g.modulus) return false;
    }
    return true;
}

// ---------------------------------------------------------------- structure

namespace {

std::size_t ipow(std::size_t b, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// decode row-major index into a tuple
std::vector<int> decode(std::size_t idx, int n, int arity) {
    std::vector<int> t(static_cast<std::size_t>(arity));
    for (int k = arity - 1; k >= 0; --k) {
        t[static_cast<std::size_t>(k)] = static_cast<int>(idx % static_cast<std::size_t>(n));
        idx /= static_cast<std::size_t>(n);
    }
    return t;
}

}  // namespace

MetricStructure::MetricStructure(SignaturePtr sig, std::vector<std::string> points)
    : sig_(std::move(sig)), points_(std::move(points)) {
    if (!sig_) throw std::invalid_argument("structure without signature");
    std::size_t n = points_.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (points_[i] == points_[j]) throw std::invalid_argument("duplicate point name '" + points_[i] + "'");
    dist_.assign(n * n, Rational(0));
    for (const auto& p : sig_->predicates()) preds_.emplace_back(ipow(n, p.arity), p.bound.lo);
    for (const auto& f : sig_->functions()) funcs_.emplace_back(ipow(n, f.arity), 0);
}

int MetricStructure::point_index(const std::string& name) const {
    for (std::size_t i = 0; i < points_.size(); ++i)
        if (points_[i] == name) return static_cast<int>(i);
    return -1;
}

std::size_t MetricStructure::tuple_index(const int* args, int arity) const {
    std::size_t idx = 0;
    for (int k = 0; k < arity; ++k) idx = idx * static_cast<std::size_t>(size()) + static_cast<std::size_t>(args[k]);
    return idx;
}

const Rational& MetricStructure::pred(int p, const int* args) const {
    if (p == kDistance) return d(args[0], args[1]);
    const auto& sym = sig_->predicates()[static_cast<std::size_t>(p)];
    return preds_[static_cast<std::size_t>(p)][tuple_index(args, sym.arity)];
}

void MetricStructure::set_pred(int p, const std::vector<int>& args, const Rational& v) {
    if (p == kDistance) {
        set_d(args.at(0), args.at(1), v);
        return;
    }
    preds_.at(static_cast<std::size_t>(p))[tuple_index(args.data(), static_cast<int>(args.size()))] = v;
}

int MetricStructure::func(int f, const int* args) const {
    const auto& sym = sig_->functions()[static_cast<std::size_t>(f)];
    return funcs_[static_cast<std::size_t>(f)][tuple_index(args, sym.arity)];
}

void MetricStructure::set_func(int f, const std::vector<int>& args, int v) {
    if (v < 0 || v >= size()) throw std::out_of_range("function value out of range");
    funcs_.at(static_cast<std::size_t>(f))[tuple_index(args.data(), static_cast<int>(args.size()))] = v;
}

std::string MetricStructure::tuple_str(const std::vector<int>& t) const {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ",";
        s += point(t[i]);
    }
    return s + ")";
}

bool operator==(const MetricStructure& a, const MetricStructure& b) {
    return *a.sig_ == *b.sig_ && a.points_ == b.points_ && a.dist_ == b.dist_ && a.preds_ == b.preds_ &&
           a.funcs_ == b.funcs_;
}

// ---------------------------------------------------------------- validation

std::vector<Violation> validate_structure(const MetricStructure& s) {
    std::vector<Violation> out;
    const int n = s.size();
    auto pn = [&](int i) { return s.point(i); };
    for (int i = 0; i < n; ++i) {
        if (!s.d(i, i).is_zero())
            out.push_back({"diagonal", "distance not zero at (" + pn(i) + "," + pn(i) + "): " + s.d(i, i).str()});
        for (int j = 0; j < n; ++j) {
            const Rational& v = s.d(i, j);
            if (v.sign() < 0 || v > Rational(1))
                out.push_back({"range", "distance outside [0,1] at (" + pn(i) + "," + pn(j) + "): " + v.str()});
            if (j > i && v != s.d(j, i))
                out.push_back({"symmetry", "distance not symmetric at (" + pn(i) + "," + pn(j) + "): " + v.str() +
                                               " vs " + s.d(j, i).str()});
            if (i != j && v.is_zero())
                out.push_back({"positivity", "distance zero between distinct points (" + pn(i) + "," + pn(j) + ")"});
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                if (s.d(i, k) > s.d(i, j) + s.d(j, k))
                    out.push_back({"triangle", "triangle inequality fails: d(" + pn(i) + "," + pn(k) +
                                                   ")=" + s.d(i, k).str() + " > d(" + pn(i) + "," + pn(j) + ")+d(" +
                                                   pn(j) + "," + pn(k) + ")=" + (s.d(i, j) + s.d(j, k)).str()});

    const Signature& sig = s.signature();
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
        const auto& sym = sig.predicates()[p];
        const auto& tab = s.pred_table(static_cast<int>(p));
        for (std::size_t a = 0; a < tab.size(); ++a)
            if (!sym.bound.contains(tab[a]))
                out.push_back({"bound", "value of " + sym.name + s.tuple_str(decode(a, n, sym.arity)) + "=" +
                                            tab[a].str() + " outside " + sym.bound.str()});
        for (std::size_t a = 0; a < tab.size(); ++a) {
            auto ta = decode(a, n, sym.arity);
            for (std::size_t b = a + 1; b < tab.size(); ++b) {
                auto tb = decode(b, n, sym.arity);
                std::vector<Rational> r;
                for (int k = 0; k < sym.arity; ++k) r.push_back(s.d(ta[static_cast<std::size_t>(k)], tb[static_cast<std::size_t>(k)]));
                Rational bound = sym.modulus.eval(r);
                Rational gap = abs(tab[a] - tab[b]);
                if (gap > bound) {
                    std::string args;
                    for (std::size_t k = 0; k < r.size(); ++k) args += (k ? "," : "") + r[k].str();
                    out.push_back({"modulus", "modulus: |" + sym.name + s.tuple_str(ta) + "-" + sym.name +
                                                  s.tuple_str(tb) + "|=" + gap.str() + " > Delta_" + sym.name + "(" +
                                                  args + ")=" + bound.str()});
                }
            }
        }
    }
    for (std::size_t f = 0; f < sig.functions().size(); ++f) {
        const auto& sym = sig.functions()[f];
        const auto& tab = s.func_table(static_cast<int>(f));
        for (std::size_t a = 0; a < tab.size(); ++a) {
            auto ta = decode(a, n, sym.arity);
            for (std::size_t b = a + 1; b < tab.size(); ++b) {
                auto tb = decode(b, n, sym.arity);
                std::vector<Rational> r;
                for (int k = 0; k < sym.arity; ++k) r.push_back(s.d(ta[static_cast<std::size_t>(k)], tb[static_cast<std::size_t>(k)]));
                Rational bound = sym.modulus.eval(r);
                const Rational& gap = s.d(tab[a], tab[b]);
                if (gap > bound)
                    out.push_back({"modulus", "modulus: d(" + sym.name + s.tuple_str(ta) + "," + sym.name +
                                                  s.tuple_str(tb) + ")=" + gap.str() + " > Delta_" + sym.name +
                                                  "=" + bound.str()});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- documents

namespace {

Rational json_rational(const ojson& v, const std::string& field) {
    if (v.is_number_integer()) return Rational(v.get<long>());
    if (v.is_string()) {
        auto r = Rational::try_parse(v.get<std::string>());
        if (r) return *r;
    }
    throw std::invalid_argument("field " + field + ": expected a rational \"p/q\" or an integer");
}

std::vector<std::string> split_tuple_key(const std::string& key, const std::string& field) {
    if (key.size() < 2 || key.front() != '(' || key.back() != ')')
        throw std::invalid_argument("field " + field + ": tuple key '" + key + "' must look like (a,b)");
    std::vector<std::string> out;
    std::string inner = key.substr(1, key.size() - 2);
    if (inner.empty()) return out;
    std::stringstream ss(inner);
    std::string part;
    while (std::getline(ss, part, ',')) {
        auto b = part.find_first_not_of(' ');
        auto e = part.find_last_not_of(' ');
        out.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
    }
    return out;
}

const ojson& require(const ojson& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) throw std::invalid_argument("missing field " + where + "." + key);
    return obj.at(key);
}

}  // namespace

LoadResult load_structure_text(const std::string& text) {
    ojson doc;
    try {
        doc = ojson::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        // locate the byte offset as a line number
        std::size_t line = 1;
        for (std::size_t i = 0; i < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw std::invalid_argument("structure document parse error at line " + std::to_string(line) + ": " + e.what());
    }
    auto sig = std::make_shared<Signature>();
    const ojson empty = ojson::object();
    const ojson& sdoc = doc.contains("signature") ? doc.at("signature") : empty;
    if (sdoc.contains("predicates")) {
        std::size_t i = 0;
        for (const auto& p : sdoc.at("predicates")) {
            std::string where = "signature.predicates[" + std::to_string(i++) + "]";
            PredicateSymbol sym;
            sym.name = require(p, "name", where).get<std::string>();
            sym.arity = require(p, "arity", where).get<int>();
            sym.modulus = Modulus::parse(require(p, "modulus", where).get<std::string>(), sym.arity);
            if (p.contains("bound")) {
                const auto& b = p.at("bound");
                if (!b.is_array() || b.size() != 2) throw std::invalid_argument("field " + where + ".bound: expected [lo,hi]");
                sym.bound = Interval(json_rational(b[0], where + ".bound[0]"), json_rational(b[1], where + ".bound[1]"));
            }
            sig->add_predicate(std::move(sym));
        }
    }
    if (sdoc.contains("functions")) {
        std::size_t i = 0;
        for (const auto& f : sdoc.at("functions")) {
            std::string where = "signature.functions[" + std::to_string(i++) + "]";
            FunctionSymbol sym;
            sym.name = require(f, "name", where).get<std::string>();
            sym.arity = require(f, "arity", where).get<int>();
            sym.modulus = Modulus::parse(require(f, "modulus", where).get<std::string>(), sym.arity);
            sig->add_function(std::move(sym));
        }
    }
    std::vector<std::string> points;
    for (const auto& p : require(doc, "points", "document")) points.push_back(p.get<std::string>());
    if (points.empty()) throw std::invalid_argument("field points: at least one point is required");
    MetricStructure s(sig, points);
    const int n = s.size();

    const ojson& dist = doc.contains("distance") ? doc.at("distance") : ojson();
    if (n > 1 || !dist.is_null()) {
        if (!dist.is_array() || static_cast<int>(dist.size()) != n)
            throw std::invalid_argument("field distance: expected " + std::to_string(n) + " rows");
        for (int i = 0; i < n; ++i) {
            const auto& row = dist[static_cast<std::size_t>(i)];
            if (!row.is_array() || static_cast<int>(row.size()) != n)
                throw std::invalid_argument("field distance[" + std::to_string(i) + "]: expected " + std::to_string(n) + " entries");
            for (int j = 0; j < n; ++j)
                s.set_d(i, j, json_rational(row[static_cast<std::size_t>(j)],
                                            "distance[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
        }
    }

    auto resolve = [&](const std::string& key, int arity, const std::string& field) {
        auto names = split_tuple_key(key, field);
        if (static_cast<int>(names.size()) != arity)
            throw std::invalid_argument("field " + field + ": tuple " + key + " has wrong length");
        std::vector<int> t;
        for (const auto& nm : names) {
            int idx = s.point_index(nm);
            if (idx < 0) throw std::invalid_argument("field " + field + ": unknown point '" + nm + "'");
            t.push_back(idx);
        }
        return t;
    };

    for (std::size_t p = 0; p < sig->predicates().size(); ++p) {
        const auto& sym = sig->predicates()[p];
        std::string field = "predicates." + sym.name;
        if (!doc.contains("predicates") || !doc.at("predicates").contains(sym.name))
            throw std::invalid_argument("missing field " + field);
        const auto& tab = doc.at("predicates").at(sym.name);
        std::size_t expect = ipow(static_cast<std::size_t>(n), sym.arity);
        if (tab.size() != expect)
            throw std::invalid_argument("field " + field + ": expected " + std::to_string(expect) + " entries, got " +
                                        std::to_string(tab.size()));
        std::vector<bool> seen(expect, false);
        for (auto it = tab.begin(); it != tab.end(); ++it) {
            auto t = resolve(it.key(), sym.arity, field);
            std::size_t idx = s.tuple_index(t.data(), sym.arity);
            if (seen[idx]) throw std::invalid_argument("field " + field + ": duplicate tuple " + it.key());
            seen[idx] = true;
            s.set_pred(static_cast<int>(p), t, json_rational(it.value(), field + "." + it.key()));
        }
    }
    for (std::size_t f = 0; f < sig->functions().size(); ++f) {
        const auto& sym = sig->functions()[f];
        std::string field = "functions." + sym.name;
        if (!doc.contains("functions") || !doc.at("functions").contains(sym.name))
            throw std::invalid_argument("missing field " + field);
        const auto& tab = doc.at("functions").at(sym.name);
        std::size_t expect = ipow(static_cast<std::size_t>(n), sym.arity);
        if (tab.size() != expect)
            throw std::invalid_argument("field " + field + ": expected " + std::to_string(expect) + " entries");
        for (auto it = tab.begin(); it != tab.end(); ++it) {
            auto t = resolve(it.key(), sym.arity, field);
            int v = s.point_index(it.value().get<std::string>());
            if (v < 0) throw std::invalid_argument("field " + field + "." + it.key() + ": unknown point");
            s.set_func(static_cast<int>(f), t, v);
        }
    }
    LoadResult r{std::move(s), {}};
    r.report = validate_structure(r.structure);
    return r;
}

LoadResult load_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open structure file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_structure_text(ss.str());
}

std::string save_structure(const MetricStructure& s) {
    ojson doc;
    const Signature& sig = s.signature();
    ojson preds = ojson::array();
    for (const auto& p : sig.predicates())
        preds.push_back({{"name", p.name}, {"arity", p.arity}, {"modulus", p.modulus.str()},
                         {"bound", {p.bound.lo.str(), p.bound.hi.str()}}});
    ojson funcs = ojson::array();
    for (const auto& f : sig.functions())
        funcs.push_back({{"name", f.name}, {"arity", f.arity}, {"modulus", f.modulus.str()}});
    doc["signature"] = {{"predicates", preds}, {"functions", funcs}};
    doc["points"] = s.points();
    ojson dist = ojson::array();
    for (int i = 0; i < s.size(); ++i) {
        ojson row = ojson::array();
        for (int j = 0; j < s.size(); ++j) row.push_back(s.d(i, j).str());
        dist.push_back(row);
    }
    doc["distance"] = dist;
    ojson ptabs = ojson::object();
    for (std::size_t p = 0; p < sig.predicates().size(); ++p) {
        const auto& sym = sig.predicates()[p];
        ojson tab = ojson::object();
        const auto& vals = s.pred_table(static_cast<int>(p));
        for (std::size_t a = 0; a < vals.size(); ++a) tab[s.tuple_str(decode(a, s.size(), sym.arity))] = vals[a].str();
        ptabs[sym.name] = tab;
    }
    doc["predicates"] = ptabs;
    ojson ftabs = ojson::object();
    for (std::size_t f = 0; f < sig.functions().size(); ++f) {
        const auto& sym = sig.functions()[f];
        ojson tab = ojson::object();
        const auto& vals = s.func_table(static_cast<int>(f));
        for (std::size_t a = 0; a < vals.size(); ++a) tab[s.tuple_str(decode(a, s.size(), sym.arity))] = s.point(vals[a]);
        ftabs[sym.name] = tab;
    }
    doc["functions"] = ftabs;
    return doc.dump(2) + "\n";
}

MetricStructure encode_discrete(const DiscreteEncoding& c) {
    auto sig = std::make_shared<Signature>();
    for (const auto& rel : c.relations) {
        PredicateSymbol p;
        p.name = rel.name;
        p.arity = rel.arity;
        Modulus m = Modulus::zero(rel.arity);
        for (int i = 0; i < rel.arity; ++i) m = Modulus::sum(m, Modulus::proj(rel.arity, i));
        p.modulus = m.widened(rel.arity);
        p.bound = Interval(Rational(0), Rational(1));
        sig->add_predicate(std::move(p));
    }
    MetricStructure s(sig, c.points);
    const int n = s.size();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s.set_d(i, j, Rational(i == j ? 0 : 1));
    for (std::size_t r = 0; r < c.relations.size(); ++r) {
        const auto& rel = c.relations[r];
        std::size_t expect = ipow(static_cast<std::size_t>(n), rel.arity);
        if (rel.table.size() != expect)
            throw std::invalid_argument("relation " + rel.name + ": table has " + std::to_string(rel.table.size()) +
                                        " entries, expected " + std::to_string(expect));
        for (std::size_t a = 0; a < expect; ++a) {
            int v = rel.table[a];
            if (v != 0 && v != 1)
                throw std::invalid_argument("relation " + rel.name + ": non-{0,1} value " + std::to_string(v));
            s.set_pred(static_cast<int>(r), decode(a, n, rel.arity), Rational(v));
        }
    }
    return s;
}

}  // namespace cil
