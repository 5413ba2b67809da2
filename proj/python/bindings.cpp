#include <floquetcm/cm_expand.hpp>
#include <floquetcm/family.hpp>
#include <floquetcm/lyapunov_perron.hpp>
#include <floquetcm/verify.hpp>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fcm;

namespace {

py::object inf_to_none(double v) {
    if (std::isfinite(v)) return py::float_(v);
    return py::none();
}

py::dict periodic_dict(const PeriodicScalar& p) {
    py::list h;
    for (const auto& hk : p.harmonics) h.append(py::make_tuple(hk.k, hk.sin, hk.cos));
    py::dict d;
    d["mean"] = p.mean;
    d["harmonics"] = h;
    return d;
}

py::dict floquet(const std::string& system, const Params& params, double s) {
    auto sys = builtin(system, params);
    auto fa = analyze(sys, {}, kDefaultRhoTol, s);
    py::list mult;
    for (const auto& m : fa.spectrum.multipliers) {
        py::dict e;
        e["value"] = m.value;
        e["multiplicity"] = m.multiplicity;
        e["band"] = to_string(m.band);
        mult.append(e);
    }
    py::dict rates;
    rates["a"] = inf_to_none(fa.rates.a);
    rates["b"] = inf_to_none(fa.rates.b);
    rates["eps"] = fa.rates.eps;
    rates["C"] = fa.rates.C;
    rates["bounds_hold"] = fa.rates.bounds_hold;
    py::dict d;
    d["monodromy"] = Mat(fa.U->monodromy());
    d["multipliers"] = mult;
    d["center_dim"] = fa.spectrum.center_dim();
    d["has_trivial"] = fa.spectrum.has_trivial;
    d["rates"] = rates;
    d["warnings"] = fa.spectrum.warnings;
    return d;
}

py::dict expand(const std::string& system, int order, std::optional<double> z) {
    CoefficientSeries s;
    if (system == "driven2d") {
        if (z) throw UsageError("z applies to driven3d only");
        s = expand_driven2d(order);
    } else if (system == "driven3d") {
        if (!z) throw UsageError("driven3d needs z");
        s = expand_driven3d(order, *z);
    } else {
        throw UsageError("expansions exist for driven2d and driven3d only");
    }
    py::list terms;
    for (const auto& c : s.terms) {
        py::dict t = periodic_dict(c.value);
        t["degree"] = c.degree;
        t["status"] = to_string(c.status);
        terms.append(t);
    }
    py::list res;
    for (const auto& r : s.resonances) res.append(py::make_tuple(r.degree, r.divisor));
    py::dict d;
    d["terms"] = terms;
    d["resonances"] = res;
    return d;
}

py::dict lp_fixed_point(const std::string& system, const Params& params, const Vec& y0, double s,
                        std::optional<double> delta, std::optional<double> eta, std::optional<double> window,
                        std::uint64_t seed) {
    LpOptions opt;
    opt.delta = delta;
    opt.eta = eta;
    opt.window = window;
    opt.seed = seed;
    auto p = LpProblem::from_system(builtin(system, params), s, opt);
    auto r = p.fixed_point(y0);
    py::dict d;
    d["C"] = r.C;
    d["H"] = r.H;
    d["iterations"] = r.iterations;
    d["rate"] = r.rate;
    d["bound"] = r.bound;
    d["delta"] = p.cutoff().delta;
    d["warnings"] = r.warnings;
    d["inhomogeneous_residual"] = p.inhomogeneous_residual(r.u, p.substitute(r.u));
    return d;
}

std::string suite_json(const std::string& system, const Params& params, const std::vector<std::string>& checks,
                       std::uint64_t seed) {
    ProblemSpec spec;
    spec.system = system;
    spec.params = params;
    return report_json({run_suite(spec, checks, seed)});
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Floquet analysis and center-manifold tools for periodic orbits";

    auto usage = py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    (void)usage;

    m.def("list_systems", [] {
        std::vector<std::string> ids;
        for (const auto& s : builtin_catalog()) ids.push_back(s.id);
        return ids;
    });
    m.def("floquet", &floquet, py::arg("system"), py::arg("params") = Params{}, py::arg("s") = 0.0);
    m.def("expand", &expand, py::arg("system"), py::arg("order"), py::arg("z") = std::nullopt);
    m.def("driven3d_resonances", &driven3d_resonances, py::arg("order"));
    m.def(
        "family",
        [](double t, double x, double alpha, double beta, const std::string& phi) {
            return nonunique_family(t, x, alpha, beta, phi_from_string(phi));
        },
        py::arg("t"), py::arg("x"), py::arg("alpha"), py::arg("beta"), py::arg("phi") = "zero");
    m.def(
        "family_residual",
        [](double t, double x, double alpha, double beta, const std::string& phi) {
            return family_residual(t, x, alpha, beta, phi_from_string(phi));
        },
        py::arg("t"), py::arg("x"), py::arg("alpha"), py::arg("beta"), py::arg("phi") = "zero");
    m.def("cylinder_graph", &cylinder_graph, py::arg("z1"), py::arg("z3") = 0.0);
    m.def("torus_root", &torus_root, py::arg("level"));
    m.def("lp_fixed_point", &lp_fixed_point, py::arg("system"), py::arg("params") = Params{}, py::arg("y0"),
          py::arg("s") = 0.0, py::arg("delta") = std::nullopt, py::arg("eta") = std::nullopt,
          py::arg("window") = std::nullopt, py::arg("seed") = 0);
    m.def("_suite_json", &suite_json, py::arg("system"), py::arg("params"), py::arg("checks"), py::arg("seed") = 0);
    m.def(
        "_reproduce_json",
        [](const std::string& id, std::uint64_t seed) { return report_json(reproduce(id, seed), id); },
        py::arg("example"), py::arg("seed") = 0);
    m.def("known_checks", &known_analyses);
    m.def("example_ids", &example_ids);
}
