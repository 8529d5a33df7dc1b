// critpt: command-line front end.
//
//   critpt sqrt-demo --a 2 [--epsilon 1e-24] [--nested]
//   critpt run --config run.json
//   critpt report out/summary.json

#include <fstream>
#include <iostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "critpt/config.hpp"
#include "critpt/errors.hpp"
#include "critpt/persistence.hpp"
#include "critpt/scalar_newton.hpp"

namespace {

int sqrt_demo(double a, double epsilon, bool nested) {
  std::vector<critpt::scalar::ScalarIterate> trace;
  int status = 0;
  try {
    critpt::scalar::heron_sqrt(a, {epsilon, 200}, nested, &trace);
  } catch (const critpt::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    status = 1;
  }
  std::cout << "step\tb_t\tresidual\n";
  for (const auto& it : trace) {
    std::cout << it.step_index << '\t' << critpt::format_number(it.value) << '\t'
              << critpt::format_number(it.residual) << '\n';
  }
  return status;
}

int run(const std::string& config_path) {
  std::ifstream is(config_path);
  if (!is) {
    std::cerr << "error: cannot open config " << config_path << '\n';
    return 2;
  }
  std::stringstream buffer;
  buffer << is.rdbuf();
  const critpt::RunConfig cfg = critpt::parse_config(buffer.str());
  const critpt::RunArtifacts art = critpt::execute_run(cfg);
  const auto& s = art.result;
  std::cout << fmt::format("runs {}  converged {}  clusters {}  median outer iterations {}\n",
                           s.runs, s.converged, s.clusters.size(),
                           critpt::format_number(s.median_outer_iterations));
  std::cout << "summary: " << art.summary.string() << '\n';
  return 0;
}

int report(const std::string& summary_path) {
  std::ifstream is(summary_path);
  if (!is) {
    std::cerr << "error: cannot open summary " << summary_path << '\n';
    return 2;
  }
  const auto doc = nlohmann::json::parse(is);
  std::cout << critpt::format_report(critpt::summary_from_json(doc));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Critical-point finding with Newton-MR and gradient-norm descent"};
  app.require_subcommand(1);

  double a = 0.0;
  double epsilon = 1e-24;
  bool nested = false;
  auto* demo = app.add_subcommand("sqrt-demo", "Heron square root, one row per iteration");
  demo->add_option("--a", a, "Number whose square root is computed")->required();
  demo->add_option("--epsilon", epsilon, "Tolerance on (b*b - a)^2 / a^2");
  demo->add_flag("--nested", nested, "Compute each division with a Newton reciprocal");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Run a multi-start critical-point search");
  run_cmd->add_option("--config", config_path, "JSON run configuration")->required();

  std::string summary_path;
  auto* report_cmd = app.add_subcommand("report", "Print a summary as a table");
  report_cmd->add_option("summary", summary_path, "summary.json written by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*demo) return sqrt_demo(a, epsilon, nested);
    if (*run_cmd) return run(config_path);
    if (*report_cmd) return report(summary_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
