#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <sstream>

#include "opx/asymptotics.hpp"
#include "opx/cli.hpp"
#include "opx/dbar_ext.hpp"
#include "opx/equilibrium.hpp"
#include "opx/errors.hpp"
#include "opx/oracle.hpp"
#include "opx/statphase.hpp"
#include "opx/universality.hpp"

namespace py = pybind11;
using namespace opx;

using EqPtr = std::shared_ptr<EquilibriumMeasure>;

namespace {

py::dict conditions(const ConditionReport& r) {
  py::dict d;
  d["all"] = r.all();
  d["smooth"] = r.smooth;
  d["support"] = r.support;
  d["strict"] = r.strict;
  d["single_interval"] = r.single_interval;
  d["min_interior_psi"] = r.min_interior_psi;
  d["min_exterior_phi"] = r.min_exterior_phi;
  d["min_h"] = r.min_h;
  d["h_alpha_prime_alpha"] = r.h_alpha_prime_alpha;
  d["h_beta_prime_beta"] = r.h_beta_prime_beta;
  return d;
}

// leading terms as true values: A * exp(log_scale) would overflow, so return both
py::tuple pair(const PolyPairEval& p) { return py::make_tuple(p.a11, p.a21, p.log_scale); }

}  // namespace

PYBIND11_MODULE(_opx, m) {
  m.doc() = "Equilibrium measures, orthogonal polynomial asymptotics and numerical checks";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<EquilibriumMeasure, EqPtr>(m, "EquilibriumMeasure")
      .def_property_readonly("alpha", &EquilibriumMeasure::alpha)
      .def_property_readonly("beta", &EquilibriumMeasure::beta)
      .def_property_readonly("ell", &EquilibriumMeasure::ell)
      .def_property_readonly("c", &EquilibriumMeasure::c)
      .def("h", &EquilibriumMeasure::h, py::arg("x"))
      .def("psi", &EquilibriumMeasure::psi, py::arg("x"))
      .def("theta", &EquilibriumMeasure::theta, py::arg("x"))
      .def("phi", &EquilibriumMeasure::phi, py::arg("x"))
      .def("h_beta_prime_beta", &EquilibriumMeasure::h_beta_prime_beta)
      .def("h_alpha_prime_alpha", &EquilibriumMeasure::h_alpha_prime_alpha)
      .def(
          "g",
          [](const EquilibriumMeasure& e, cplx z, const std::string& side) {
            Side s = side == "plus" ? Side::plus : side == "minus" ? Side::minus : Side::automatic;
            return e.g(z, s);
          },
          py::arg("z"), py::arg("side") = "auto")
      .def("verify_conditions",
           [](const EquilibriumMeasure& e) { return conditions(e.verify_conditions()); })
      .def("__repr__", [](const EquilibriumMeasure& e) {
        std::ostringstream s;
        s << "<EquilibriumMeasure " << e.field().id << " c=" << e.c() << " support=[" << e.alpha()
          << ", " << e.beta() << "]>";
        return s.str();
      });

  m.def(
      "solve_equilibrium",
      [](const std::string& field, double c, int quad_order) {
        EquilibriumOptions o;
        o.quad_order = quad_order;
        return EqPtr(std::make_shared<EquilibriumMeasure>(
            EquilibriumMeasure::solve(builtin(field), c, o)));
      },
      py::arg("field"), py::arg("c") = 1.0, py::arg("quad_order") = 256);

  m.def(
      "recurrence",
      [](const std::string& field, int N, int n_max) {
        const Oracle o = Oracle::build(builtin(field), N, n_max);
        py::dict d;
        d["a"] = o.table.a;
        d["b"] = o.table.b;
        d["m0"] = o.table.m0;
        d["gram_residual"] = gram_residual(o.grid, o.table, n_max);
        return d;
      },
      py::arg("field"), py::arg("N"), py::arg("n_max"));

  m.def(
      "airy",
      [](cplx z) {
        const AiryPair a = airy(z);
        return py::make_tuple(a.ai, a.aip);
      },
      py::arg("z"));

  m.def(
      "bulk_axis",
      [](const EqPtr& eq, int n, double x) { return pair(bulk_axis(AsymptoticContext::make(eq, n, n), x)); },
      py::arg("eq"), py::arg("n"), py::arg("x"),
      "Leading-term (a11, a21, log_scale) on the axis with N = n.");
  m.def(
      "edge_poly",
      [](const EqPtr& eq, int n, double zeta) {
        return pair(edge_poly(AsymptoticContext::make(eq, n, n), zeta));
      },
      py::arg("eq"), py::arg("n"), py::arg("zeta"));
  m.def(
      "edge_scales",
      [](const EqPtr& eq) {
        const auto ctx = AsymptoticContext::make(eq, 16, 16);
        return py::make_tuple(ctx.lambda_edge, ctx.w_beta);
      },
      py::arg("eq"), "(lambda, w(beta))");

  m.def("sine_kernel", &sine_kernel_value, py::arg("u"), py::arg("v"));
  m.def("airy_kernel", &airy_kernel_value, py::arg("u"), py::arg("v"));
  m.def("bump", &bump, py::arg("t"));

  m.def(
      "statphase",
      [](const std::string& phase, const std::vector<int>& ns) {
        const DecompReport d = decomposition_check(PhaseFunction::builtin(phase), ns);
        py::dict r;
        r["max_residual"] = d.max_residual;
        r["slopes"] = std::vector<double>{d.slope_left, d.slope_right, d.slope_plus, d.slope_minus};
        r["slopes_ok"] = d.slopes_ok;
        std::vector<cplx> direct;
        for (const auto& w : d.rows) direct.push_back(w.direct);
        r["direct"] = direct;
        return r;
      },
      py::arg("phase"), py::arg("n"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream o, e;
        int code;
        {
          py::gil_scoped_release nogil;
          code = cli::dispatch(args, o, e);
        }
        return py::make_tuple(code, o.str(), e.str());
      },
      py::arg("args"), "Run an opx subcommand; returns (exit_code, stdout, stderr).");
}
