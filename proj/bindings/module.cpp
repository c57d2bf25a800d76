#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nsprobe/errors.hpp"
#include "nsprobe/estimators.hpp"
#include "nsprobe/exact.hpp"
#include "nsprobe/fnspec.hpp"
#include "nsprobe/lowerbounds.hpp"
#include "nsprobe/nscore.hpp"
#include "nsprobe/oracle.hpp"
#include "nsprobe/version.hpp"

namespace py = pybind11;
using namespace nsprobe;

namespace {

// Value wrapper so Python never sees the shared_ptr<const ...> holder.
struct PyFn {
    SpecPtr ptr;
};

Point point_from_bits(int n, const std::vector<int>& bits) {
    if (static_cast<int>(bits.size()) != n)
        throw std::invalid_argument("bit list length must equal n");
    Point p(n);
    for (int i = 0; i < n; ++i)
        if (bits[static_cast<std::size_t>(i)])
            p.set(i);
    return p;
}

Mode mode_from_string(const std::string& s) {
    if (s == "paper")
        return Mode::paper;
    if (s == "practical")
        return Mode::practical;
    throw std::invalid_argument("mode must be 'paper' or 'practical'");
}

}  // namespace

PYBIND11_MODULE(_nsprobe, m) {
    m.doc() = "Noise-sensitivity estimators and exact oracles for Boolean functions";
    m.attr("__version__") = kVersion;

    py::register_exception<DimensionError>(m, "DimensionError");
    py::register_exception<CapExceededError>(m, "CapExceededError");
    py::register_exception<ParseError>(m, "FunctionParseError");

    py::class_<PyFn>(m, "FunctionSpec")
        .def_property_readonly("n", [](const PyFn& s) { return s.ptr->n; })
        .def("__str__", [](const PyFn& s) { return serialize(*s.ptr); });

    m.def("parse_function", [](const std::string& text) { return PyFn{deserialize(text)}; },
          py::arg("text"));
    m.def("function_to_text", [](const PyFn& s) { return serialize(*s.ptr); });
    m.def("load_function", [](const std::string& path) { return PyFn{load_spec_file(path)}; },
          py::arg("path"));

    m.def("constant", [](int n, bool v) { return PyFn{fn::constant(n, v)}; }, py::arg("n"),
          py::arg("value"));
    m.def("dictator", [](int n, int i) { return PyFn{fn::dictator(n, i)}; }, py::arg("n"),
          py::arg("index"));
    m.def("parity", [](int n) { return PyFn{fn::parity(n)}; }, py::arg("n"));
    m.def("majority", [](int n) { return PyFn{fn::majority(n)}; }, py::arg("n"));
    m.def("threshold", [](int n, int t) { return PyFn{fn::threshold(n, t)}; }, py::arg("n"),
          py::arg("t"));
    m.def("dnf", [](int n, std::vector<std::vector<int>> c) { return PyFn{fn::dnf(n, std::move(c))}; },
          py::arg("n"), py::arg("clauses"));
    m.def(
        "or_of",
        [](const std::vector<PyFn>& children) {
            std::vector<SpecPtr> c;
            for (const auto& ch : children)
                c.push_back(ch.ptr);
            return PyFn{fn::or_of(std::move(c))};
        },
        py::arg("children"));
    m.def("truncate", [](const PyFn& child, int t) { return PyFn{fn::truncate(child.ptr, t)}; },
          py::arg("child"), py::arg("t"));
    m.def(
        "permute",
        [](const PyFn& child, std::vector<int> sigma) {
            return PyFn{fn::permute(child.ptr, std::move(sigma))};
        },
        py::arg("child"), py::arg("sigma"));
    m.def("make_f0", [](int n, double C1) { return PyFn{make_f0(n, C1)}; }, py::arg("n"),
          py::arg("C1"));
    m.def("f0_threshold", &f0_threshold, py::arg("n"), py::arg("C1"));
    m.def(
        "make_random_dnf",
        [](int n, int num_clauses, int clause_width, std::uint64_t seed) {
            Rng rng(seed);
            return PyFn{make_random_dnf(n, num_clauses, clause_width, rng)};
        },
        py::arg("n"), py::arg("num_clauses"), py::arg("clause_width"), py::arg("seed"));
    m.def("monotonicity_check", [](const PyFn& s) { return monotonicity_check(*s.ptr); });

    py::class_<OracleSession>(m, "Session")
        .def(py::init([](const PyFn& spec, bool memoize) {
                 return new OracleSession(spec.ptr, memoize);
             }),
             py::arg("spec"), py::arg("memoize") = false)
        .def_property_readonly("n", &OracleSession::n)
        .def_property_readonly("query_count", &OracleSession::query_count)
        .def("reset_count", &OracleSession::reset_count)
        .def("evaluate", [](OracleSession& s, const std::vector<int>& bits) {
            return s.evaluate(point_from_bits(s.n(), bits));
        });

    m.def("exact_bias", [](const PyFn& s) { return exact::exact_bias(exact::truth_table(*s.ptr)); });
    m.def("exact_influence", [](const PyFn& s) {
        auto p = exact::exact_influence(exact::truth_table(*s.ptr));
        return py::make_tuple(p.edge_scan, p.fourier);
    });
    m.def("exact_ns",
          [](const PyFn& s, double delta) { return exact::exact_ns(exact::truth_table(*s.ptr), delta); });
    m.def("exact_ns_direct", [](const PyFn& s, double delta) {
        return exact::exact_ns_direct(exact::truth_table(*s.ptr), delta);
    });
    m.def("exact_stability", [](const PyFn& s, double rho) {
        return exact::exact_stability(exact::truth_table(*s.ptr), rho);
    });

    py::class_<NsParams>(m, "NsParams")
        .def_static(
            "make",
            [](int n, double delta, double epsilon, double C, const std::string& mode) {
                return NsParams::make(n, delta, epsilon, C, mode_from_string(mode));
            },
            py::arg("n"), py::arg("delta"), py::arg("epsilon"), py::arg("C") = 2.0,
            py::arg("mode") = "practical")
        .def_readwrite("t1", &NsParams::t1)
        .def_readwrite("t2", &NsParams::t2)
        .def_readwrite("w", &NsParams::w)
        .def_readwrite("kappa", &NsParams::kappa)
        .def_readwrite("influence_kappa", &NsParams::influence_kappa)
        .def_readwrite("trust_monotone", &NsParams::trust_monotone)
        .def_readonly("eta1", &NsParams::eta1)
        .def_readonly("eta2", &NsParams::eta2);

    py::class_<EstimateReport>(m, "EstimateReport")
        .def_readonly("method", &EstimateReport::method)
        .def_readonly("value", &EstimateReport::value)
        .def_readonly("queries", &EstimateReport::queries)
        .def_readonly("trials", &EstimateReport::trials)
        .def_readonly("successes", &EstimateReport::successes)
        .def_readonly("seed", &EstimateReport::seed)
        .def_readonly("capped", &EstimateReport::capped)
        .def("to_json", [](const EstimateReport& r) { return r.to_json_string(); });

    py::class_<NsReport>(m, "NsReport")
        .def_readonly("estimate", &NsReport::estimate)
        .def_readonly("influence_estimate", &NsReport::influence_estimate)
        .def_readonly("p_tilde_A", &NsReport::p_tilde_A)
        .def_readonly("p_tilde_B", &NsReport::p_tilde_B)
        .def_readonly("queries", &NsReport::queries)
        .def_readonly("edge_sampler_attempts", &NsReport::edge_sampler_attempts)
        .def_readonly("loop_iterations", &NsReport::loop_iterations)
        .def_readonly("seed", &NsReport::seed)
        .def_property_readonly("status", [](const NsReport& r) { return to_string(r.status); })
        .def("to_json", [](const NsReport& r) { return r.to_json_string(); });

    m.def(
        "std_ns_estimate",
        [](OracleSession& s, double delta, double epsilon, std::uint64_t seed, long long kappa,
           long long trial_cap) {
            SamplingOptions o;
            o.seed = seed;
            o.kappa = kappa;
            o.trial_cap = trial_cap;
            return std_ns_estimate(s, delta, epsilon, o);
        },
        py::arg("session"), py::arg("delta"), py::arg("epsilon"), py::arg("seed") = 0,
        py::arg("kappa") = -1, py::arg("trial_cap") = -1);
    m.def(
        "std_bias_estimate",
        [](OracleSession& s, double epsilon, std::uint64_t seed, long long kappa,
           long long trial_cap) {
            SamplingOptions o;
            o.seed = seed;
            o.kappa = kappa;
            o.trial_cap = trial_cap;
            return std_bias_estimate(s, epsilon, o);
        },
        py::arg("session"), py::arg("epsilon"), py::arg("seed") = 0, py::arg("kappa") = -1,
        py::arg("trial_cap") = -1);
    m.def(
        "influence_estimate",
        [](OracleSession& s, double epsilon, const NsParams& params, std::uint64_t seed,
           bool trust_monotone) {
            SamplingOptions o;
            o.seed = seed;
            o.trust_monotone = trust_monotone;
            return influence_estimate(s, epsilon, params, o);
        },
        py::arg("session"), py::arg("epsilon"), py::arg("params"), py::arg("seed") = 0,
        py::arg("trust_monotone") = false);
    m.def("estimate_ns", &estimate_ns, py::arg("session"), py::arg("params"), py::arg("seed") = 0,
          py::arg("workers") = 1);

    py::class_<lb::FamilySpec>(m, "FamilySpec")
        .def(py::init([](const std::string& kind, int n, double C1, double C2, int num_clauses,
                         int clause_width, double delta) {
                 lb::FamilySpec f;
                 f.kind = lb::family_kind_from_string(kind);
                 f.n = n;
                 f.C1 = C1;
                 f.C2 = C2;
                 f.num_clauses = num_clauses;
                 f.clause_width = clause_width;
                 f.delta = delta;
                 return f;
             }),
             py::arg("kind"), py::arg("n"), py::arg("C1") = 2.0, py::arg("C2") = 0.0,
             py::arg("num_clauses") = 0, py::arg("clause_width") = 0, py::arg("delta") = 0.0);

    m.def("family_threshold", &lb::family_threshold);
    m.def(
        "draw_family",
        [](const lb::FamilySpec& f, std::uint64_t seed) {
            Rng rng(seed);
            return PyFn{lb::draw_family(f, rng)};
        },
        py::arg("family"), py::arg("seed"));
    m.def(
        "draw_h_alpha",
        [](int n, double alpha, std::uint64_t seed) {
            Rng rng(seed);
            return PyFn{lb::draw_h_alpha(n, alpha, rng)};
        },
        py::arg("n"), py::arg("alpha"), py::arg("seed"));
    m.def(
        "measure_thinness",
        [](const PyFn& s, int level, long long samples, std::uint64_t seed) {
            Rng rng(seed);
            auto r = lb::measure_thinness(*s.ptr, level, samples, rng);
            py::dict d;
            d["level"] = r.level;
            d["estimate"] = r.estimate;
            d["samples"] = r.samples;
            d["std_error"] = r.std_error;
            d["exact"] = r.exact;
            return d;
        },
        py::arg("spec"), py::arg("level"), py::arg("samples") = 100000, py::arg("seed") = 0);
    m.def(
        "distinguisher_experiment",
        [](const lb::FamilySpec& f, long long q, long long trials, std::uint64_t seed) {
            Rng rng(seed);
            auto r = lb::distinguisher_experiment(f, q, trials, rng);
            py::dict d;
            d["q"] = r.q;
            d["trials"] = r.trials;
            d["success_rate"] = r.success_rate;
            d["bound"] = r.bound;
            d["thinness"] = r.thinness;
            d["std_error"] = r.std_error;
            d["vacuous"] = r.vacuous;
            return d;
        },
        py::arg("family"), py::arg("q"), py::arg("trials") = 2000, py::arg("seed") = 0);

    m.def("phase1_length_tail", &phase1_length_tail, py::arg("l"), py::arg("w"), py::arg("delta"));
    m.def(
        "continuity_check",
        [](int n, int l1, int l2, double xi) {
            auto r = continuity_check(n, l1, l2, xi);
            return py::make_tuple(r.ratio, r.within);
        },
        py::arg("n"), py::arg("l1"), py::arg("l2"), py::arg("xi"));
}
