#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "prpoint/errors.hpp"
#include "prpoint/padic_height.hpp"
#include "prpoint/verify.hpp"

namespace py = pybind11;
using namespace prpoint;

namespace {

PointQ point_arg(const py::object& P) {
  if (py::isinstance<PointQ>(P)) return P.cast<PointQ>();
  return PointQ::parse(P.cast<std::string>());
}

py::dict frobenius_dict(const CurveQ& E, Int p, int M) {
  const FrobeniusData F = kedlaya_frobenius(E, p, M);
  py::dict d;
  d["matrix"] = std::vector<std::vector<PadicNumber>>{{F.F[0][0], F.F[0][1]}, {F.F[1][0], F.F[1][1]}};
  d["trace"] = F.trace;
  d["det"] = F.det;
  if (F.alpha.prime() != 0) {
    const DcrisSplit s = dcris_split(E, F);
    d["alpha"] = s.alpha;
    d["beta"] = s.beta;
    d["s2"] = s.s2;
    d["e2"] = s.e2;
    d["pairing_beta_alpha"] = s.pairing_beta_alpha;
  }
  return d;
}

py::object report(const VerificationReport& r) { return py::module_::import("json").attr("loads")(r.to_json()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings of the prpoint C++ library";

  auto base = py::register_exception<Error>(m, "PrpointError");
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<PrecisionError>(m, "PrecisionError", base.ptr());
  py::register_exception<BadReductionError>(m, "BadReductionError", base.ptr());
  py::register_exception<NotOrdinaryError>(m, "NotOrdinaryError", base.ptr());
  py::register_exception<WrongRankError>(m, "WrongRankError", base.ptr());

  py::class_<PadicNumber>(m, "Padic")
      .def(py::init([](Int p, Int n, int prec) { return PadicNumber(p, n, prec); }), py::arg("p"), py::arg("n"),
           py::arg("prec"))
      .def_property_readonly("prime", &PadicNumber::prime)
      .def_property_readonly("valuation", &PadicNumber::valuation)
      .def_property_readonly("precision", &PadicNumber::precision)
      .def_property_readonly("absolute_precision", &PadicNumber::absolute_precision)
      .def("is_zero", &PadicNumber::is_zero)
      .def("lift", &PadicNumber::lift)
      .def("congruent", &PadicNumber::congruent)
      .def("__add__", [](const PadicNumber& a, const PadicNumber& b) { return a + b; })
      .def("__sub__", [](const PadicNumber& a, const PadicNumber& b) { return a - b; })
      .def("__mul__", [](const PadicNumber& a, const PadicNumber& b) { return a * b; })
      .def("__truediv__", [](const PadicNumber& a, const PadicNumber& b) { return a / b; })
      .def("__neg__", [](const PadicNumber& a) { return -a; })
      .def("__str__", &PadicNumber::to_string)
      .def("__repr__", [](const PadicNumber& a) { return "Padic(" + a.to_string() + ")"; });

  m.def("padic_log", &padic_log);
  m.def("padic_exp", &padic_exp);
  m.def("padic_sqrt", &padic_sqrt);

  py::class_<CurveQ>(m, "Curve")
      .def(py::init([](const std::vector<Int>& a, Int N) {
             if (a.size() != 5) throw InvalidInput("expected five a-invariants");
             return CurveQ({a[0], a[1], a[2], a[3], a[4]}, N);
           }),
           py::arg("ainvs"), py::arg("conductor"))
      .def_static("parse", &CurveQ::parse)
      .def_property_readonly("ainvs", [](const CurveQ& E) {
        return std::vector<Int>(E.ainvs().begin(), E.ainvs().end());
      })
      .def_property_readonly("conductor", &CurveQ::conductor)
      .def("a_p", [](const CurveQ& E, Int p) { return count_points_ap(E, p); })
      .def("count_points", [](const CurveQ& E, Int p) { return count_points(E, p); })
      .def("__repr__", &CurveQ::to_string);

  py::class_<PointQ>(m, "Point")
      .def_static("parse", &PointQ::parse)
      .def_property_readonly("is_infinity", [](const PointQ& P) { return P.infinity; })
      .def("__eq__", &PointQ::operator==)
      .def("__str__", &PointQ::to_string)
      .def("__repr__", [](const PointQ& P) { return "Point(" + P.to_string() + ")"; });

  m.def("search_generator", &search_generator, py::arg("curve"), py::arg("bound") = 1000);
  m.def(
      "hecke_roots",
      [](const CurveQ& E, Int p, int prec) {
        const HeckeRoots r = hecke_roots(E, p, prec);
        return py::make_tuple(r.alpha, r.beta);
      },
      py::arg("curve"), py::arg("p"), py::arg("prec"));
  m.def("frobenius", &frobenius_dict, py::arg("curve"), py::arg("p"), py::arg("prec"));
  m.def(
      "height_alpha", [](const CurveQ& E, const py::object& P, Int p, int M) { return height_alpha(E, point_arg(P), p, M); },
      py::arg("curve"), py::arg("point"), py::arg("p"), py::arg("prec"));
  m.def(
      "log_omega", [](const CurveQ& E, const py::object& P, Int p, int M) { return formal_group_log(E, point_arg(P), p, M); },
      py::arg("curve"), py::arg("point"), py::arg("p"), py::arg("prec"));
  m.def(
      "c_f",
      [](const CurveQ& E, const py::object& P) {
        const CfResult r = compute_c_f(E, point_arg(P));
        return py::make_tuple(r.c.get_str(), r.raw.value);
      },
      py::arg("curve"), py::arg("point"));

  py::class_<Pipeline>(m, "Pipeline")
      .def(py::init([](const CurveQ& E, Int p, int M, const std::string& cache_dir) {
             PipelineOptions o;
             o.cache_dir = cache_dir;
             return std::make_unique<Pipeline>(E, p, M, o);
           }),
           py::arg("curve"), py::arg("p"), py::arg("prec"), py::arg("cache_dir") = "")
      .def("pr_verify",
           [](Pipeline& pipe, bool corrupt) { return report(run_pr_verify(pipe, {corrupt, false})); },
           py::arg("corrupt_delta") = false)
      .def("gz_alpha", [](Pipeline& pipe, bool swap) { return report(run_gz_alpha_check(pipe, {false, swap})); },
           py::arg("swap_roots") = false)
      .def("recover", [](Pipeline& pipe, Int bound) { return report(run_recover(pipe, bound)); },
           py::arg("height_bound") = 1000)
      .def("delta_A", [](Pipeline& pipe) { return pipe.delta(); })
      .def("jets", [](Pipeline& pipe) {
        return py::make_tuple(pipe.alpha_jet().coeffs, pipe.beta_jet().coeffs);
      });
}
