#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reslab/cli.hpp"
#include "reslab/counting.hpp"
#include "reslab/dioph.hpp"
#include "reslab/error.hpp"
#include "reslab/hyperbolic_kernel.hpp"
#include "reslab/specfn.hpp"

namespace py = pybind11;
using namespace reslab;

namespace {

// Row-wise list of dicts; empty cells become None.
py::list table_rows(const OutputTable& t) {
  py::list rows;
  for (const auto& r : t.rows) {
    py::dict d;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      d[py::str(t.columns[i])] = std::visit(
          [](const auto& v) -> py::object {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) return py::none();
            else return py::cast(v);
          },
          r[i]);
    }
    rows.append(d);
  }
  return rows;
}

KernelMethod method_of(const std::string& s) {
  if (s == "auto") return KernelMethod::Auto;
  if (s == "series") return KernelMethod::Series;
  if (s == "euler") return KernelMethod::Euler;
  if (s == "hypergeom") return KernelMethod::Hypergeom;
  throw InvalidArgument("method must be auto, series, euler or hypergeom");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Resonance counting toolkit for hyperbolic manifolds with cusps";

  auto base = py::register_exception<Error>(m, "ReslabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<AngleParse>(m, "AngleParse", base.ptr());
  py::register_exception<EmptyInput>(m, "EmptyInput", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<PoleError>(m, "PoleError", base.ptr());
  py::register_exception<OffDomain>(m, "OffDomain", base.ptr());
  py::register_exception<ExplosionGuard>(m, "ExplosionGuard", base.ptr());
  py::register_exception<PrecisionExhausted>(m, "PrecisionExhausted", base.ptr());

  m.def("gamma", [](Complex z) { return gamma(z); }, py::arg("z"));
  m.def("gauss_2f1", [](Complex a, Complex b, Complex c, Complex z) { return gauss_2f1(a, b, c, z); },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("z"));
  m.def("bessel_i", [](Complex lam, double x) { return bessel_i(lam, x); }, py::arg("lam"), py::arg("x"));
  m.def("bessel_k", [](Complex lam, double x) { return bessel_k(lam, x); }, py::arg("lam"), py::arg("x"));

  m.def(
      "resolvent_kernel_tau",
      [](int n, Complex s, double tau, const std::string& method) {
        auto v = resolvent_kernel_tau(n, s, tau, method_of(method));
        return py::make_tuple(v.value, v.est_rel_err, to_string(v.representation_used));
      },
      py::arg("n"), py::arg("s"), py::arg("tau"), py::arg("method") = "auto",
      "(value, est_rel_err, representation) of the free resolvent kernel at tau = cosh d");
  m.def("residue_kernel_tau", &residue_kernel_tau, py::arg("n"), py::arg("k"), py::arg("tau"));
  m.def("harmonic_dim", &harmonic_dim, py::arg("d"), py::arg("k"));
  m.def(
      "hyperbolic_resonances",
      [](int n, double R) {
        py::list out;
        for (const auto& p : hyperbolic_resonances(n, R).points) out.append(py::make_tuple(p.location, p.multiplicity));
        return out;
      },
      py::arg("n"), py::arg("R"), "[(location, multiplicity)] in |s - n/2| <= R");

  py::class_<Config>(m, "Config")
      .def_readonly("dimension_n", &Config::dimension_n)
      .def_property_readonly("cusp_count", [](const Config& c) { return c.cusps.size(); });
  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));

  m.def("modes", [](const Config& c, int m_max, double b_max) { return table_rows(cmd_modes(c, m_max, b_max)); },
        py::arg("config"), py::arg("m_max") = 4, py::arg("b_max") = 2.0);
  m.def("growth", [](const Config& c, std::vector<double> u) { return table_rows(cmd_lambda(c, std::move(u))); },
        py::arg("config"), py::arg("u_grid"));
  m.def("cusp_resonances", [](const Config& c, double R, double cb) { return table_rows(cmd_resonances(c, R, cb)); },
        py::arg("config"), py::arg("R"), py::arg("c_bound") = 1.0);
  m.def(
      "bound",
      [](const Config& c, std::vector<double> R, double C, bool dio) {
        return table_rows(cmd_bound(c, std::move(R), C, dio));
      },
      py::arg("config"), py::arg("R_grid"), py::arg("C") = 1.0, py::arg("diophantine") = false);
  m.def(
      "worstcase",
      [](int q, int depth, double ell, int bits) { return table_rows(cmd_worstcase({q, depth, ell, bits})); },
      py::arg("q") = 1, py::arg("depth") = 4, py::arg("ell") = 1.0, py::arg("precision_bits") = 65600);

  m.def(
      "verify",
      [](const std::string& suite, double grid_scale, std::uint64_t seed) {
        VerifyOutcome v;
        {
          py::gil_scoped_release release;
          v = cmd_verify({suite, grid_scale, seed, false});
        }
        return py::make_tuple(v.pass, v.json);
      },
      py::arg("suite") = "all", py::arg("grid_scale") = 1.0, py::arg("seed") = 2024,
      "(pass, JSON report text)");
}
