#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "critpt/calculus.hpp"
#include "critpt/config.hpp"
#include "critpt/drivers.hpp"
#include "critpt/errors.hpp"
#include "critpt/minres.hpp"
#include "critpt/persistence.hpp"
#include "critpt/problems.hpp"
#include "critpt/scalar_newton.hpp"

namespace py = pybind11;
using namespace critpt;

namespace {

py::dict trajectory_dict(const Trajectory& t) {
  py::list iteration, loss, grad_norm_sq, eta, inner, trials, gradient_evals, hvp_evals;
  py::list thetas;
  for (const auto& r : t.records) {
    iteration.append(r.iteration);
    thetas.append(r.theta);
    loss.append(r.loss);
    grad_norm_sq.append(r.grad_norm_sq);
    eta.append(r.eta);
    inner.append(r.inner_iterations);
    trials.append(r.line_search_trials);
    gradient_evals.append(r.gradient_evals);
    hvp_evals.append(r.hvp_evals);
  }
  py::dict d;
  d["iteration"] = iteration;
  d["theta"] = thetas;
  d["loss"] = loss;
  d["grad_norm_sq"] = grad_norm_sq;
  d["eta"] = eta;
  d["inner_iterations"] = inner;
  d["line_search_trials"] = trials;
  d["gradient_evals"] = gradient_evals;
  d["hvp_evals"] = hvp_evals;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Critical-point finding: Newton-MR, gradient-norm descent, spectral classification";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NonConvergenceError>(m, "NonConvergenceError", PyExc_RuntimeError);
  py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);

  // scalar kernels
  py::class_<scalar::ScalarIterate>(m, "ScalarIterate")
      .def_readonly("value", &scalar::ScalarIterate::value)
      .def_readonly("step_index", &scalar::ScalarIterate::step_index)
      .def_readonly("residual", &scalar::ScalarIterate::residual);
  m.def("heron_step", &scalar::heron_step, py::arg("b"), py::arg("a"));
  m.def("reciprocal_step", &scalar::reciprocal_step, py::arg("c"), py::arg("b"));
  m.def(
      "heron_sqrt",
      [](double a, double epsilon, std::size_t max_iterations, bool nested) {
        return scalar::heron_sqrt(a, {epsilon, max_iterations}, nested);
      },
      py::arg("a"), py::arg("epsilon") = 1e-24, py::arg("max_iterations") = 100,
      py::arg("divide_by_newton") = false);
  m.def(
      "newton_reciprocal",
      [](double b, double c0, double epsilon, std::size_t max_iterations) {
        return scalar::newton_reciprocal(b, c0, {epsilon, max_iterations});
      },
      py::arg("b"), py::arg("c0"), py::arg("epsilon") = 1e-14, py::arg("max_iterations") = 100);

  // problems
  py::class_<KnownCriticalPoint>(m, "KnownCriticalPoint")
      .def_readonly("theta", &KnownCriticalPoint::theta)
      .def_readonly("morse_index", &KnownCriticalPoint::morse_index)
      .def_readonly("loss", &KnownCriticalPoint::loss);
  py::class_<Problem>(m, "Problem")
      .def_property_readonly("name", &Problem::name)
      .def_property_readonly("dimension", &Problem::dimension)
      .def_property_readonly("has_hvp", &Problem::has_hvp)
      .def_property_readonly("known_critical_points", &Problem::known_critical_points)
      .def("loss", [](const Problem& p, const ParamVector& t) { return loss(p, t); })
      .def("gradient",
           [](const Problem& p, const ParamVector& t) { return gradient(p, t).vector; })
      .def("hvp", [](const Problem& p, const ParamVector& t, const ParamVector& v) {
        return hvp(p, t, v);
      });
  m.def(
      "make_quadratic",
      [](const Matrix& a, std::optional<ParamVector> b) {
        return problems::make_quadratic({a, b.value_or(ParamVector())});
      },
      py::arg("matrix"), py::arg("offset") = std::nullopt);
  m.def("make_himmelblau", &problems::make_himmelblau);
  m.def(
      "make_linear_autoencoder",
      [](const Matrix& data, int hidden) { return problems::make_linear_autoencoder({data, hidden}); },
      py::arg("data"), py::arg("hidden"));
  m.def("make_surrogate", &problems::make_surrogate, py::arg("problem"));
  m.def("random_orthogonal", &problems::random_orthogonal, py::arg("n"), py::arg("seed"));
  m.def("autoencoder_data", &problems::autoencoder_data, py::arg("eigenvalues"),
        py::arg("basis"), py::arg("n_samples"), py::arg("seed") = 0);

  // calculus
  m.def("dense_hessian", [](const Problem& p, const ParamVector& t) { return dense_hessian(p, t); });
  m.def("fd_gradient_check", &fd_gradient_check, py::arg("problem"), py::arg("theta"),
        py::arg("h") = 1e-5);

  // inner solver
  py::enum_<InnerTermination>(m, "InnerTermination")
      .value("converged", InnerTermination::converged)
      .value("max_iterations", InnerTermination::max_iterations)
      .value("breakdown", InnerTermination::breakdown);
  py::class_<InnerSolveResult>(m, "InnerSolveResult")
      .def_readonly("direction", &InnerSolveResult::direction)
      .def_readonly("final_residual_norm", &InnerSolveResult::final_residual_norm)
      .def_readonly("iterations_used", &InnerSolveResult::iterations_used)
      .def_readonly("termination", &InnerSolveResult::termination)
      .def_readonly("residual_trace", &InnerSolveResult::residual_trace);
  m.def(
      "minres_solve",
      [](const Matrix& h, const ParamVector& g, double tol, int max_iterations) {
        InnerSolveConfig cfg;
        cfg.relative_residual_tol = tol;
        cfg.max_inner_iterations = max_iterations;
        return minres_solve(HvpOperator::from_matrix(h), GradientValue::from(g), cfg);
      },
      py::arg("hessian"), py::arg("gradient"), py::arg("relative_residual_tol") = 1e-4,
      py::arg("max_inner_iterations") = 0);

  // drivers
  py::enum_<CriticalClass>(m, "CriticalClass")
      .value("minimum", CriticalClass::minimum)
      .value("maximum", CriticalClass::maximum)
      .value("saddle", CriticalClass::saddle)
      .value("degenerate", CriticalClass::degenerate)
      .value("unclassified", CriticalClass::unclassified);
  py::enum_<OuterTermination>(m, "OuterTermination")
      .value("converged", OuterTermination::converged)
      .value("max_iterations", OuterTermination::max_iterations)
      .value("stalled", OuterTermination::stalled);
  py::class_<CriticalPointReport>(m, "CriticalPointReport")
      .def_readonly("theta", &CriticalPointReport::theta_final)
      .def_readonly("loss", &CriticalPointReport::loss)
      .def_readonly("grad_norm_sq", &CriticalPointReport::grad_norm_sq)
      .def_readonly("spectrum", &CriticalPointReport::spectrum)
      .def_readonly("morse_index", &CriticalPointReport::morse_index)
      .def_readonly("num_zero", &CriticalPointReport::num_zero)
      .def_readonly("critical_class", &CriticalPointReport::critical_class)
      .def_readonly("converged", &CriticalPointReport::converged);

  py::class_<OuterConfig>(m, "OuterConfig")
      .def(py::init<>())
      .def_readwrite("grad_norm_sq_tol", &OuterConfig::grad_norm_sq_tol)
      .def_readwrite("max_outer_iterations", &OuterConfig::max_outer_iterations)
      .def_readwrite("baseline_step", &OuterConfig::baseline_step)
      .def_readwrite("eps_lambda", &OuterConfig::eps_lambda)
      .def_property(
          "inner_tol", [](const OuterConfig& c) { return c.inner.relative_residual_tol; },
          [](OuterConfig& c, double v) { c.inner.relative_residual_tol = v; })
      .def_property(
          "max_inner_iterations", [](const OuterConfig& c) { return c.inner.max_inner_iterations; },
          [](OuterConfig& c, int v) { c.inner.max_inner_iterations = v; })
      .def_property(
          "eta0", [](const OuterConfig& c) { return c.line_search.eta0; },
          [](OuterConfig& c, double v) { c.line_search.eta0 = v; })
      .def_property(
          "shrink", [](const OuterConfig& c) { return c.line_search.shrink; },
          [](OuterConfig& c, double v) { c.line_search.shrink = v; })
      .def_property(
          "rho", [](const OuterConfig& c) { return c.line_search.rho; },
          [](OuterConfig& c, double v) { c.line_search.rho = v; });

  py::class_<OuterResult>(m, "OuterResult")
      .def_readonly("report", &OuterResult::report)
      .def_readonly("termination", &OuterResult::termination)
      .def_property_readonly("trajectory",
                             [](const OuterResult& r) { return trajectory_dict(r.trajectory); });

  m.def("classify", &classify, py::arg("problem"), py::arg("theta"), py::arg("eps_lambda") = 0.0);
  m.def("newton_mr", &newton_mr, py::arg("problem"), py::arg("theta0"),
        py::arg("config") = OuterConfig{}, py::call_guard<py::gil_scoped_release>());
  m.def("gradient_norm_descent", &gradient_norm_descent, py::arg("problem"), py::arg("theta0"),
        py::arg("config") = OuterConfig{}, py::call_guard<py::gil_scoped_release>());

  m.def(
      "multi_start",
      [](const Problem& p, int count, std::vector<double> lower, std::vector<double> upper,
         std::uint64_t seed, const OuterConfig& outer, const std::string& algorithm) {
        MultiStartConfig cfg;
        cfg.count = count;
        cfg.sampler = {std::move(lower), std::move(upper), seed};
        cfg.outer = outer;
        cfg.algorithm = algorithm == "gnd" ? Algorithm::gradient_norm_descent : Algorithm::newton_mr;
        MultiStartResult r;
        {
          py::gil_scoped_release release;
          r = multi_start(p, cfg);
        }
        py::list clusters;
        for (const auto& c : r.clusters) {
          py::dict d;
          d["report"] = c.representative;
          d["hits"] = c.hits();
          clusters.append(d);
        }
        py::dict out;
        out["clusters"] = clusters;
        out["non_converged"] = r.non_converged;
        out["runs"] = r.runs.size();
        return out;
      },
      py::arg("problem"), py::arg("count"), py::arg("lower"), py::arg("upper"),
      py::arg("seed") = 0, py::arg("config") = OuterConfig{}, py::arg("algorithm") = "newton-mr");

  // config
  m.def("resolve_config", [](const std::string& text) { return dump_config(parse_config(text)); },
        py::arg("text"));
}
