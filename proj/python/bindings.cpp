#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/params.hpp"
#include "kslab/scenario.hpp"
#include "kslab/solver.hpp"
#include "kslab/thresholds.hpp"

namespace py = pybind11;
using namespace kslab;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::dict check_to_dict(const SystemCheck& c) {
  py::list rows;
  for (const auto& q : c.inequalities) {
    py::dict d;
    d["name"] = q.name;
    d["margin"] = q.margin;
    d["scale"] = q.scale;
    d["strict"] = q.strict;
    d["passed"] = q.passed;
    rows.append(d);
  }
  py::dict out;
  out["passed"] = c.passed;
  out["inequalities"] = rows;
  out["first_failure"] = c.first_failure() ? py::cast(*c.first_failure()) : py::none();
  return out;
}

// Runs a Gaussian-bump or perturbed-constant simulation and returns the
// diagnostics table as numpy columns plus the final fields.
py::dict simulate(const Parameters& p, int dim, int cells, double t_end, double dt,
                  double amplitude, double width, bool bump, std::uint64_t seed) {
  const Grid g = Grid::unit_box(dim, cells);
  InitialConditionSpec ic;
  ic.kind = bump ? IcKind::GaussianBump : IcKind::ConstantPlusPerturbation;
  ic.u_base = p.kappa > 0.0 ? p.kappa / p.mu : 1.0;
  ic.v_base = p.alpha * ic.u_base / p.beta;
  ic.amplitude = amplitude;
  ic.width = width;
  ic.seed = seed;
  SolverConfig cfg;
  cfg.dt_initial = dt;
  cfg.t_end = t_end;
  const auto f = SourceFunction::standard_logistic(p.kappa, p.mu);
  Trajectory tr;
  {
    py::gil_scoped_release release;
    tr = run(initial_condition(ic, g), g, p, &f, cfg);
  }
  py::dict cols;
  cols["t"] = to_array(tr.diagnostics.times());
  for (const char* c : {"mass_u", "L2_u", "L3_u", "Linf_u", "L2_gradv", "L4_gradv", "L6_gradv"})
    cols[c] = to_array(tr.diagnostics.column(c));
  py::dict out;
  out["outcome"] = to_string(tr.outcome);
  out["steps"] = tr.steps;
  out["clamp_count"] = tr.clamp_count;
  out["diagnostics"] = cols;
  out["u"] = to_array(tr.states.back().u);
  out["v"] = to_array(tr.states.back().v);
  return out;
}

}  // namespace

PYBIND11_MODULE(_kslab, m) {
  m.doc() = "Chemotaxis-growth thresholds and finite-volume solver";
  m.attr("__version__") = KSLAB_VERSION;

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  // Leaked on purpose: the type must outlive interpreter teardown.
  static PyObject* infeasible =
      py::exception<InfeasibleError>(m, "InfeasibleError", PyExc_RuntimeError).release().ptr();
  py::register_exception_translator([](std::exception_ptr e) {
    try {
      if (e) std::rethrow_exception(e);
    } catch (const InfeasibleError& err) {
      py::object exc = py::handle(infeasible)(err.what());
      exc.attr("min_feasible_mu") = err.min_feasible_mu();
      PyErr_SetObject(infeasible, exc.ptr());
    }
  });

  py::class_<Parameters>(m, "Parameters")
      .def(py::init([](double d1, double d2, double chi, double alpha, double beta, double kappa,
                       double mu, double a, int n) {
             return Parameters{d1, d2, chi, alpha, beta, kappa, mu, a, n};
           }),
           py::kw_only(), py::arg("d1") = 1.0, py::arg("d2") = 1.0, py::arg("chi") = 1.0,
           py::arg("alpha") = 1.0, py::arg("beta") = 1.0, py::arg("kappa") = 1.0,
           py::arg("mu") = 1.0, py::arg("a") = 0.0, py::arg("n") = 3)
      .def_readwrite("d1", &Parameters::d1)
      .def_readwrite("d2", &Parameters::d2)
      .def_readwrite("chi", &Parameters::chi)
      .def_readwrite("alpha", &Parameters::alpha)
      .def_readwrite("beta", &Parameters::beta)
      .def_readwrite("kappa", &Parameters::kappa)
      .def_readwrite("mu", &Parameters::mu)
      .def_readwrite("a", &Parameters::a)
      .def_readwrite("n", &Parameters::n)
      .def("validate", [](const Parameters& p) { return validate(p); })
      .def(py::self == py::self)
      .def("__repr__", [](const Parameters& p) {
        return py::str("Parameters(d1={}, d2={}, chi={}, alpha={}, beta={}, kappa={}, mu={}, a={}, n={})")
            .format(p.d1, p.d2, p.chi, p.alpha, p.beta, p.kappa, p.mu, p.a, p.n);
      });

  py::class_<HMinimum>(m, "HMinimum")
      .def_readonly("value", &HMinimum::value)
      .def_readonly("eps", &HMinimum::eps)
      .def_readonly("eta", &HMinimum::eta);

  py::class_<CoefficientSet3D>(m, "CoefficientSet3D")
      .def_readonly("eps1", &CoefficientSet3D::eps1)
      .def_readonly("eps2", &CoefficientSet3D::eps2)
      .def_readonly("eps3", &CoefficientSet3D::eps3)
      .def_readonly("eps4", &CoefficientSet3D::eps4)
      .def_readonly("delta1", &CoefficientSet3D::delta1)
      .def_readonly("delta2", &CoefficientSet3D::delta2)
      .def_readonly("delta3", &CoefficientSet3D::delta3);

  py::class_<CoefficientSet45D>(m, "CoefficientSet45D")
      .def_readonly("eps", &CoefficientSet45D::eps)
      .def_readonly("eta", &CoefficientSet45D::eta)
      .def_readonly("eps1", &CoefficientSet45D::eps1)
      .def_readonly("eps2", &CoefficientSet45D::eps2)
      .def_readonly("eps3", &CoefficientSet45D::eps3)
      .def_readonly("eps4", &CoefficientSet45D::eps4)
      .def_readonly("delta1", &CoefficientSet45D::delta1)
      .def_readonly("delta2", &CoefficientSet45D::delta2)
      .def_readonly("delta3", &CoefficientSet45D::delta3)
      .def_readonly("delta4", &CoefficientSet45D::delta4);

  m.def("mu0", [](const Parameters& p, bool convex) {
        const Threshold t = mu0_general(p, convex);
        return py::make_tuple(t.value, to_string(t.branch));
      }, py::arg("params"), py::arg("convex") = false,
      "Boundedness threshold and the branch that produced it.");
  m.def("mu1", &mu1, py::arg("params"));
  m.def("gamma_rate", [](const Parameters& p) {
        const GammaRate g = gamma_rate(p);
        return py::make_tuple(g.gamma, g.epsilon0);
      }, py::arg("params"));
  m.def("minimize_h", &minimize_h, py::arg("n"), py::arg("d1"), py::arg("d2"));
  m.def("h_objective", &h_objective, py::arg("n"), py::arg("d1"), py::arg("d2"), py::arg("eps"),
        py::arg("eta"));

  m.def("select_coefficients_3d", &select_coefficients_3d, py::arg("params"), py::arg("mu"));
  m.def("select_coefficients_45d", &select_coefficients_45d, py::arg("params"), py::arg("mu"));
  m.def("min_feasible_mu_45d", &min_feasible_mu_45d, py::arg("params"));
  m.def("verify_system_3d", [](const Parameters& p, double mu, const CoefficientSet3D& c) {
        return check_to_dict(verify_system_3d(p, mu, c));
      }, py::arg("params"), py::arg("mu"), py::arg("coefficients"));
  m.def("verify_system_45d", [](const Parameters& p, double mu, const CoefficientSet45D& c) {
        return check_to_dict(verify_system_45d(p, mu, c));
      }, py::arg("params"), py::arg("mu"), py::arg("coefficients"));

  m.def("threshold_report", [](const Parameters& p, bool convex) {
        py::dict d;
        for (const auto& [k, v] : describe(report(p, convex))) d[py::str(k)] = v;
        return d;
      }, py::arg("params"), py::arg("convex") = false);

  m.def("simulate", &simulate, py::arg("params"), py::kw_only(), py::arg("dim") = 1,
        py::arg("cells") = 64, py::arg("t_end") = 1.0, py::arg("dt") = 1e-2,
        py::arg("amplitude") = 0.1, py::arg("width") = 0.1, py::arg("bump") = true,
        py::arg("seed") = 0);

  m.def("run_config", [](const std::string& text, const std::string& output_dir) {
        ExperimentConfig cfg = parse_config(text);
        if (!output_dir.empty()) cfg.output_dir = output_dir;
        ScenarioResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(cfg);
        }
        py::dict out;
        out["exit_code"] = r.exit_code;
        out["outcome"] = r.outcome ? py::cast(to_string(*r.outcome)) : py::none();
        out["sup_linf_u"] = r.sup_linf_u;
        out["mu0"] = r.mu0;
        out["message"] = r.message;
        py::dict rep;
        for (const auto& [k, v] : r.report) rep[py::str(k)] = v;
        out["report"] = rep;
        return out;
      }, py::arg("config_text"), py::arg("output_dir") = "",
      "Parses a config in the sectioned key = value format and runs its scenario.");
  m.def("serialize_config", [](const std::string& text) { return serialize(parse_config(text)); },
        py::arg("config_text"));
}
