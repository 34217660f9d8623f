#include "wcert/cli.hpp"

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wcert;

namespace {

Signature signature_of(const std::string& algebra, int rank) {
  if (algebra == "weyl") return Signature::weyl();
  if (algebra == "heisenberg") return Signature::heisenberg(rank);
  throw std::invalid_argument("algebra must be 'weyl' or 'heisenberg'");
}

py::tuple run(const std::string& command, const std::string& scenario, bool is_path,
              std::optional<std::uint64_t> seed, const std::string& scale) {
  const auto overrides = ScaleOverrides::parse(scale);
  const Scenario sc = is_path ? load_scenario_file(scenario, overrides, seed)
                              : load_scenario(json::parse(scenario), overrides, seed);
  CommandResult r;
  {
    py::gil_scoped_release release;
    r = run_command(command, sc);
  }
  return py::make_tuple(r.exit_code, r.text, r.report.dump());
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact Whittaker-module orbifold certificates";

  m.attr("EXIT_PASS") = kExitPass;
  m.attr("EXIT_FAIL") = kExitFail;
  m.attr("EXIT_ERROR") = kExitError;

  m.def("commands", &command_names);
  m.def("_run", &run, py::arg("command"), py::arg("scenario"), py::arg("is_path"),
        py::arg("seed") = std::nullopt, py::arg("scale") = "");
  m.def("sha256_hex", [](const std::string& s) { return sha256_hex(s); });

  py::class_<Scalar>(m, "Scalar")
      .def(py::init<long>(), py::arg("value") = 0)
      .def_static("parse", [](const std::string& text, std::uint64_t order) { return Scalar::parse(text, order); },
                  py::arg("text"), py::arg("order") = 1)
      .def_static("zeta", &Scalar::zeta, py::arg("n"), py::arg("k") = 1)
      .def("inverse", &Scalar::inverse)
      .def("is_zero", &Scalar::is_zero)
      .def("is_rational", &Scalar::is_rational)
      .def("to_string", [](const Scalar& s, std::uint64_t order) { return s.to_string(order); }, py::arg("order"))
      .def_property_readonly("order", &Scalar::order)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * py::self)
      .def(py::self / py::self)
      .def(-py::self)
      .def(py::self == py::self)
      .def("__pow__", [](const Scalar& s, long k) { return s.pow(k); })
      .def("__str__", [](const Scalar& s) { return s.to_string(s.order()); })
      .def("__repr__", [](const Scalar& s) { return "Scalar('" + s.to_string(s.order()) + "')"; });

  m.def(
      "normal_form",
      [](const std::string& expr, const std::string& algebra, int rank, std::uint64_t order) {
        const Signature sig = signature_of(algebra, rank);
        return format_expr(normal_form(parse_expr(expr, sig, order), sig), sig, order);
      },
      py::arg("expr"), py::arg("algebra") = "weyl", py::arg("rank") = 1, py::arg("order") = 1,
      "PBW normal form of an operator expression, as text.");

  m.def(
      "commutator",
      [](const std::string& x, const std::string& y, const std::string& algebra, int rank) {
        const Signature sig = signature_of(algebra, rank);
        return sig.commutator_value(sig.parse_mode(x), sig.parse_mode(y));
      },
      py::arg("x"), py::arg("y"), py::arg("algebra") = "weyl", py::arg("rank") = 1);
}
