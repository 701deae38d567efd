// Python bindings. Reports come back as plain dicts with the same fields as
// the CLI's json-lines records.

#include "render.hpp"

#include "selfsim/criteria.hpp"
#include "selfsim/detail.hpp"
#include "selfsim/entropy.hpp"
#include "selfsim/errors.hpp"
#include "selfsim/ifs_io.hpp"
#include "selfsim/walk.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace selfsim;

namespace {

py::object to_py(const cli::json& j)
{
  return py::module_::import("json").attr("loads")(j.dump());
}

//! A parsed IFS together with its measure on Sim(R^d).
struct PyIfs
{
  IfsSpec spec;
  SimMeasure mu;

  explicit PyIfs(IfsSpec s)
    : spec(std::move(s))
    , mu(spec.measure())
  {
  }
};

py::dict detail_dict(const DetailValue& v)
{
  py::dict d;
  d["raw"] = v.raw;
  d["value"] = v.value;
  d["error"] = v.error;
  d["sampling_bias"] = v.sampling_bias;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
  m.doc() = "Entropy, separation and detail computations for self-similar measures";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<Unsupported>(m, "Unsupported", PyExc_NotImplementedError);
  py::register_exception<BudgetExceeded>(m, "BudgetExceeded", PyExc_RuntimeError);
  py::register_exception<PreconditionFailed>(m, "PreconditionFailed", PyExc_RuntimeError);

  py::class_<PyIfs>(m, "Ifs")
    .def_static(
      "parse", [](const std::string& text) { return PyIfs(parse_ifs(text)); }, py::arg("text"),
      "Parses the IFS text format.")
    .def_static(
      "load", [](const std::string& path) { return PyIfs(load_ifs(path)); }, py::arg("path"))
    .def_property_readonly("dim", [](const PyIfs& s) { return s.mu.dim(); })
    .def_property_readonly("size", [](const PyIfs& s) { return s.mu.size(); })
    .def_property_readonly("exact", [](const PyIfs& s) { return s.mu.is_exact(); })
    .def("serialize", [](const PyIfs& s) { return serialize_ifs(s.spec); })
    .def(
      "lyapunov",
      [](const PyIfs& s) {
        Lyapunov chi = lyapunov_exponent(s.mu);
        py::dict d;
        d["value"] = chi.value;
        d["lo"] = chi.enclosure.lo();
        d["hi"] = chi.enclosure.hi();
        d["kind"] = to_string(chi.kind);
        return d;
      },
      "chi = sum_i p_i log rho_i with a certified enclosure.")
    .def(
      "entropy",
      [](const PyIfs& s, int level, std::uint64_t budget) {
        EnumerationOptions opt;
        opt.budget = budget;
        return to_py(cli::to_json(entropy_bound(s.mu, level, opt)));
      },
      py::arg("level") = 10, py::arg("budget") = 10000000)
    .def(
      "dimension",
      [](const PyIfs& s, int level) { return to_py(cli::to_json(dimension_estimate(s.mu, level))); },
      py::arg("level") = 10, "min{d, h / |chi|}.")
    .def(
      "criterion",
      [](const PyIfs& s, double C, int level, bool u_part, bool diagnostics, std::size_t samples,
         std::uint64_t seed) {
        CriterionOptions opt;
        opt.C = C;
        opt.entropy_level = level;
        opt.u_part = u_part;
        opt.diagnostics = diagnostics;
        opt.diagnostic_samples = samples;
        opt.seed = seed;
        return to_py(cli::to_json(main_criterion(s.mu, opt)));
      },
      py::arg("C") = 1.0, py::arg("level") = 10, py::arg("u_part") = false,
      py::arg("diagnostics") = false, py::arg("samples") = 2000, py::arg("seed") = 0)
    .def(
      "certify_free",
      [](const PyIfs& s, std::size_t i, std::size_t j) {
        if (i >= s.mu.size() || j >= s.mu.size())
          throw InvalidInput("certify_free: atom index out of range");
        return to_py(cli::to_json(certify_free(s.mu[i].g, s.mu[j].g)));
      },
      py::arg("i") = 0, py::arg("j") = 1)
    .def(
      "sample",
      [](const PyIfs& s, std::size_t count, std::uint64_t seed, long steps) {
        SampleOptions opt;
        opt.seed = seed;
        opt.steps = steps;
        Mat pts;
        {
          py::gil_scoped_release release;
          pts = sample_stationary(s.mu, count, opt).points;
        }
        return Mat(pts.transpose());
      },
      py::arg("count"), py::arg("seed") = 0, py::arg("steps") = 0,
      "Approximate draws from the stationary measure, one row per point.")
    .def(
      "level_measure",
      [](const PyIfs& s, int n) {
        LevelMeasure lm = level_measure(s.mu, n);
        return py::make_tuple(Mat(lm.measure.points.transpose()), lm.measure.mass, lm.w1_bound);
      },
      py::arg("n"), "Atoms and masses of nu_n, and a bound on W1(nu_n, nu).");

  m.def(
    "detail",
    [](const Mat& points, std::vector<double> mass, double r, int k) {
      if (mass.empty())
        mass.assign(static_cast<std::size_t>(points.rows()),
                    1.0 / static_cast<double>(points.rows()));
      DiscreteMeasure dm(points.transpose(), std::move(mass));
      DetailValue v;
      {
        py::gil_scoped_release release;
        v = order_k_detail(dm, r, k);
      }
      return detail_dict(v);
    },
    py::arg("points"), py::arg("mass") = std::vector<double>{}, py::arg("r"), py::arg("k") = 1,
    "Order-k detail of the atomic measure sum_i mass_i delta_(points_i); points is N x d.");

  m.def(
    "bernoulli_criterion",
    [](const std::string& lambda, double C, double epsilon) {
      return to_py(cli::to_json(bernoulli_criterion(parse_algebraic(lambda), C, epsilon)));
    },
    py::arg("lam"), py::arg("C") = 1.0, py::arg("epsilon") = 0.0,
    "lam uses the exact-number syntax, e.g. \"{minpoly: [-1, 1, 1], root: 1}\".");

  m.attr("__version__") = SELFSIM_VERSION;
}
