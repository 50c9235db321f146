#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cil/baf.hpp"
#include "cil/eval.hpp"
#include "cil/orbit.hpp"
#include "cil/types.hpp"
#include "cil/version.hpp"

namespace py = pybind11;
using namespace cil;

namespace {

// Formulas refer to their signature by index; keep it alive alongside.
struct PyFormula {
    Formula f;
    SignaturePtr sig;
};

MetricStructure checked(LoadResult r) {
    if (!r.report.empty()) {
        std::string msg = "invalid structure:";
        for (const auto& v : r.report) msg += "\n  " + v.axiom + ": " + v.message;
        throw std::invalid_argument(msg);
    }
    return std::move(r.structure);
}

Assignment at(const MetricStructure& s, const std::vector<std::string>& points) {
    std::vector<int> t;
    for (const auto& p : points) {
        int i = s.point_index(p);
        if (i < 0) throw std::invalid_argument("unknown point " + p);
        t.push_back(i);
    }
    return assignment_of(t);
}

std::vector<int> tuple_of(const MetricStructure& s, const std::vector<std::string>& points) {
    std::vector<int> t;
    for (const auto& p : points) {
        int i = s.point_index(p);
        if (i < 0) throw std::invalid_argument("unknown point " + p);
        t.push_back(i);
    }
    return t;
}

void same_sig(const PyFormula& f, const MetricStructure& s) {
    if (!(*f.sig == s.signature())) throw std::invalid_argument("formula and structure signatures differ");
}

py::dict rank_dict(const QuantRank& r) {
    py::dict d;
    d["level"] = r.level;
    d["inf_level"] = r.inf_level;
    d["sup_level"] = r.sup_level;
    d["text"] = r.str();
    return d;
}

BafConfig baf_config(const MetricStructure& a, const std::string& t, int depth, int max_len) {
    BafConfig cfg;
    cfg.omega = universal_modulus(a.signature());
    cfg.t = Rational::parse(t);
    cfg.depth = depth;
    cfg.max_tuple_len = max_len;
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "continuous infinitary logic over finite metric structures";
    m.attr("__version__") = kVersion;

    py::register_exception<std::invalid_argument>(m, "InvalidArgument", PyExc_ValueError);

    py::class_<MetricStructure>(m, "Structure")
        .def_static("from_json", [](const std::string& text) { return checked(load_structure_text(text)); })
        .def_static("from_file", [](const std::string& path) { return checked(load_structure_file(path)); })
        .def_property_readonly("size", &MetricStructure::size)
        .def_property_readonly("points", &MetricStructure::points)
        .def("to_json", &save_structure)
        .def("distance", [](const MetricStructure& s, const std::string& a, const std::string& b) {
            auto t = tuple_of(s, {a, b});
            return s.d(t[0], t[1]).str();
        })
        .def("__len__", &MetricStructure::size);

    py::class_<PyFormula>(m, "Formula")
        .def("__str__", [](const PyFormula& f) { return to_string(f.f); })
        .def("__repr__", [](const PyFormula& f) { return "Formula(" + to_string(f.f) + ")"; })
        .def_property_readonly("free_vars", [](const PyFormula& f) { return free_vars(f.f); })
        .def_property_readonly("bound", [](const PyFormula& f) { return std::make_pair(f.f->bound.lo.str(), f.f->bound.hi.str()); })
        .def_property_readonly("modulus", [](const PyFormula& f) { return f.f->modulus.str(); })
        .def("quant_rank", [](const PyFormula& f) { return rank_dict(quant_rank(f.f)); })
        .def("prenex", [](const PyFormula& f) { return PyFormula{prenex(f.f), f.sig}; })
        .def("is_prenex", [](const PyFormula& f) { return is_prenex(f.f); })
        .def("dual", [](const PyFormula& f) { return PyFormula{demorgan_dual(f.f), f.sig}; });

    m.def(
        "parse",
        [](const std::string& text, const MetricStructure& s) {
            ParseContext ctx{&s.signature(), universal_modulus(s.signature())};
            return PyFormula{parse_formula(text, ctx), s.signature_ptr()};
        },
        py::arg("text"), py::arg("structure"));

    m.def(
        "evaluate",
        [](const PyFormula& f, const MetricStructure& s, const std::vector<std::string>& points) {
            same_sig(f, s);
            return eval(f.f, s, at(s, points)).str();
        },
        py::arg("formula"), py::arg("structure"), py::arg("at") = std::vector<std::string>{});

    m.def(
        "audit_modulus",
        [](const PyFormula& f, const MetricStructure& s) {
            same_sig(f, s);
            std::vector<std::string> out;
            for (const auto& v : audit_modulus(f.f, s)) out.push_back(v.axiom + ": " + v.message);
            return out;
        },
        py::arg("formula"), py::arg("structure"));

    m.def("validate", [](const std::string& text) {
        std::vector<std::string> out;
        for (const auto& v : load_structure_text(text).report) out.push_back(v.axiom + ": " + v.message);
        return out;
    });

    m.def("automorphisms", [](const MetricStructure& s) { return automorphisms(s).elements; });

    m.def("isomorphic", [](const MetricStructure& a, const MetricStructure& b) { return brute_force_isomorphic(a, b); });

    m.def(
        "approx_iso",
        [](const MetricStructure& a, const MetricStructure& b, const std::string& t, int depth, int max_len) {
            auto v = approx_iso_decide(a, b, baf_config(a, t, depth, max_len));
            py::dict d;
            d["yes"] = v.yes;
            d["depth"] = v.depth;
            d["witness"] = v.witness;
            d["sentence"] = v.sentence ? py::cast(to_string(v.sentence)) : py::none();
            d["value_a"] = v.value_a.str();
            d["value_b"] = v.value_b.str();
            return d;
        },
        py::arg("a"), py::arg("b"), py::arg("t") = "1/2", py::arg("depth") = 3, py::arg("max_len") = 2);

    m.def(
        "orbit_formula",
        [](const MetricStructure& s, const std::vector<std::string>& points, int level) {
            OrbitAnalyzer an(s, universal_modulus(s.signature()));
            const auto& sy = an.synthesize(tuple_of(s, points), level);
            py::dict d;
            d["ok"] = sy.ok;
            d["failure"] = sy.failure;
            d["psi"] = PyFormula{sy.psi, s.signature_ptr()};
            d["predicate"] = sy.predicate ? py::cast(PyFormula{sy.predicate, s.signature_ptr()}) : py::none();
            d["zero_set_exact"] = sy.zero_set_exact;
            d["predicate_exact"] = sy.predicate_exact;
            d["separators"] = sy.separators;
            return d;
        },
        py::arg("structure"), py::arg("tuple"), py::arg("level") = 2);

    m.def(
        "scott",
        [](const MetricStructure& s, int max_len, int level) {
            OrbitAnalyzer an(s, universal_modulus(s.signature()));
            if (level <= 0) level = std::max(scott_rank(an, max_len, 3).rank, 1);
            auto art = scott_sentence(an, max_len, level);
            py::dict d;
            d["ok"] = art.ok;
            d["failure"] = art.failure;
            d["level"] = art.level;
            py::list sentences;
            for (const auto& sn : art.sentences) sentences.append(PyFormula{sn, s.signature_ptr()});
            d["sentences"] = sentences;
            if (art.ok) d["rank"] = rank_dict(art.rank);
            return d;
        },
        py::arg("structure"), py::arg("max_len") = 2, py::arg("level") = 0);

    m.def(
        "scott_rank",
        [](const MetricStructure& s, int max_len, int max_rank) {
            OrbitAnalyzer an(s, universal_modulus(s.signature()));
            auto r = scott_rank(an, max_len, max_rank);
            return r.rank < 0 ? py::object(py::none()) : py::object(py::int_(r.rank));
        },
        py::arg("structure"), py::arg("max_len") = 2, py::arg("max_rank") = 3);

    m.def(
        "theta",
        [](const PyFormula& psi, const std::string& r, const std::string& eps, const MetricStructure& s) {
            same_sig(psi, s);
            return PyFormula{theta(psi.f, Rational::parse(r), Rational::parse(eps), universal_modulus(s.signature())), psi.sig};
        },
        py::arg("psi"), py::arg("r"), py::arg("eps"), py::arg("structure"));

    m.def(
        "find_support",
        [](const MetricStructure& s, const std::vector<std::string>& points, int m_max) {
            auto a = tuple_of(s, points);
            OrbitAnalyzer an(s, universal_modulus(s.signature()));
            const int n = static_cast<int>(a.size());
            auto ty = fragment_type(s, a, an.fragment(n));
            auto sr = find_support(s, ty, an.fragment(n), an.omega(), m_max);
            py::dict d;
            d["found"] = sr.found;
            d["failure"] = sr.failure;
            d["predicate"] = sr.found ? py::cast(PyFormula{sr.predicate, s.signature_ptr()}) : py::none();
            d["checked"] = sr.found && check_support(s, ty, sr.predicate, an.omega(), eps_ladder(m_max)).ok;
            return d;
        },
        py::arg("structure"), py::arg("tuple"), py::arg("m_max") = 6);

    m.def(
        "henkin",
        [](const MetricStructure& oracle, int stages, const std::string& seed_json) {
            SeedDocument doc;
            if (!seed_json.empty()) {
                ParseContext ctx{&oracle.signature(), universal_modulus(oracle.signature())};
                doc = parse_seed(seed_json, ctx);
            }
            auto h = henkin_run(doc.seed, doc.assignment, oracle, stages);
            py::dict d;
            d["monotone"] = h.monotone;
            d["satisfiable"] = h.satisfiable;
            d["max_error"] = h.max_error.str();
            d["chain_length"] = h.chain.size();
            d["quotient"] = h.quotient;
            d["classes"] = h.classes;
            return d;
        },
        py::arg("oracle"), py::arg("stages") = 10, py::arg("seed") = "");
}
