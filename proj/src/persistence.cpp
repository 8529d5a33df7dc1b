#include "critpt/persistence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "critpt/errors.hpp"

namespace critpt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double x) {
  if (!std::isfinite(x)) return "null";
  return fmt::format("{:.17g}", x);
}

std::string theta_hash(const ParamVector& theta) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    unsigned char bytes[sizeof(double)];
    const double x = theta[i];
    std::memcpy(bytes, &x, sizeof(double));
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", h);
}

namespace {

void write_vector(std::ostream& os, const ParamVector& v) {
  os << '[';
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << format_number(v[i]);
  }
  os << ']';
}

}  // namespace

void write_trajectory(std::ostream& os, const Trajectory& trajectory, bool wall_time) {
  const auto& rows = trajectory.records;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const TrajectoryRecord& rec = rows[r];
    os << "{\"iteration\":" << rec.iteration;
    const bool full = rec.theta.size() <= kFullThetaCap;
    if (full || r + 1 == rows.size()) {
      os << ",\"theta\":";
      write_vector(os, rec.theta);
    }
    if (!full) os << ",\"theta_hash\":\"" << theta_hash(rec.theta) << '"';
    os << ",\"loss\":" << format_number(rec.loss)
       << ",\"grad_norm_sq\":" << format_number(rec.grad_norm_sq)
       << ",\"eta\":" << format_number(rec.eta)
       << ",\"inner_iterations\":" << rec.inner_iterations
       << ",\"line_search_trials\":" << rec.line_search_trials
       << ",\"fallback\":" << (rec.fallback ? "true" : "false")
       << ",\"gradient_evals\":" << rec.gradient_evals << ",\"hvp_evals\":" << rec.hvp_evals;
    if (wall_time) os << ",\"wall_seconds\":" << format_number(rec.wall_seconds);
    os << "}\n";
  }
}

std::vector<json> read_trajectory(std::istream& is) {
  std::vector<json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(fmt::format("trajectory line {}: {}", number, e.what()));
    }
  }
  return rows;
}

RunSummary summarize(const RunConfig& cfg, const MultiStartResult& result, double wall_seconds) {
  RunSummary s;
  s.problem = cfg.problem.name;
  s.algorithm = std::string(to_string(cfg.run.algorithm));
  s.runs = result.runs.size();
  std::vector<double> iterations;
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const StartRun& run = result.runs[r];
    if (run.converged()) ++s.converged;
    const auto& rows = run.result.trajectory.records;
    if (!rows.empty()) {
      iterations.push_back(rows.back().iteration);
      s.total_gradient_evals += rows.back().gradient_evals;
      s.total_hvp_evals += rows.back().hvp_evals;
    }
    if (!run.error.empty()) s.errors.push_back(fmt::format("run {}: {}", r, run.error));
  }
  s.converged_fraction = s.runs ? static_cast<double>(s.converged) / static_cast<double>(s.runs) : 0.0;
  if (!iterations.empty()) {
    std::sort(iterations.begin(), iterations.end());
    const std::size_t m = iterations.size() / 2;
    s.median_outer_iterations = iterations.size() % 2 ? iterations[m]
                                                      : 0.5 * (iterations[m - 1] + iterations[m]);
  }
  s.wall_seconds = wall_seconds;
  for (const Cluster& c : result.clusters) {
    const CriticalPointReport& rep = c.representative;
    s.clusters.push_back({std::vector<double>(rep.theta_final.data(),
                                              rep.theta_final.data() + rep.theta_final.size()),
                          rep.loss, rep.grad_norm_sq, rep.critical_class, rep.morse_index,
                          rep.num_zero, c.hits()});
  }
  s.non_converged = result.non_converged;
  return s;
}

json to_json(const RunSummary& s) {
  json clusters = json::array();
  for (const ClusterRow& c : s.clusters) {
    clusters.push_back({{"theta", c.theta},
                        {"loss", c.loss},
                        {"grad_norm_sq", c.grad_norm_sq},
                        {"class", std::string(to_string(c.critical_class))},
                        {"morse_index", c.morse_index},
                        {"num_zero", c.num_zero},
                        {"hits", c.hits}});
  }
  return json{{"problem", s.problem},
              {"algorithm", s.algorithm},
              {"runs", s.runs},
              {"converged", s.converged},
              {"converged_fraction", s.converged_fraction},
              {"median_outer_iterations", s.median_outer_iterations},
              {"total_gradient_evals", s.total_gradient_evals},
              {"total_hvp_evals", s.total_hvp_evals},
              {"wall_seconds", s.wall_seconds},
              {"clusters", clusters},
              {"non_converged", s.non_converged},
              {"errors", s.errors}};
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  s.problem = j.at("problem").get<std::string>();
  s.algorithm = j.at("algorithm").get<std::string>();
  s.runs = j.at("runs").get<std::size_t>();
  s.converged = j.at("converged").get<std::size_t>();
  s.converged_fraction = j.at("converged_fraction").get<double>();
  s.median_outer_iterations = j.at("median_outer_iterations").get<double>();
  s.total_gradient_evals = j.at("total_gradient_evals").get<std::uint64_t>();
  s.total_hvp_evals = j.at("total_hvp_evals").get<std::uint64_t>();
  s.wall_seconds = j.value("wall_seconds", 0.0);
  for (const json& c : j.at("clusters")) {
    s.clusters.push_back({c.at("theta").get<std::vector<double>>(), c.at("loss").get<double>(),
                          c.at("grad_norm_sq").get<double>(),
                          critical_class_from_string(c.at("class").get<std::string>()),
                          c.at("morse_index").get<int>(), c.value("num_zero", 0),
                          c.at("hits").get<std::size_t>()});
  }
  s.non_converged = j.value("non_converged", std::vector<std::size_t>{});
  s.errors = j.value("errors", std::vector<std::string>{});
  return s;
}

std::string format_report(const RunSummary& s) {
  std::string out = fmt::format("{:<13} {:>24} {:>24} {:>11} {:>8}\n", "class", "loss",
                                "grad_norm_sq", "morse_index", "hits");
  if (s.clusters.empty()) {
    out += "no converged runs\n";
    return out;
  }
  std::vector<const ClusterRow*> rows;
  for (const auto& c : s.clusters) rows.push_back(&c);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ClusterRow* a, const ClusterRow* b) { return a->loss < b->loss; });
  for (const ClusterRow* c : rows) {
    out += fmt::format("{:<13} {:>24} {:>24} {:>11} {:>8}\n", to_string(c->critical_class),
                       format_number(c->loss), format_number(c->grad_norm_sq), c->morse_index,
                       c->hits);
  }
  return out;
}

RunArtifacts execute_run(const RunConfig& cfg) {
  RunArtifacts art;
  const char* env = std::getenv(kOutputDirEnv);
  art.directory = (env && *env) ? fs::path(env) : fs::path(cfg.output_dir);
  const fs::path traj_dir = art.directory / "trajectories";
  fs::create_directories(traj_dir);

  art.config_echo = art.directory / "config.json";
  {
    std::ofstream os(art.config_echo);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", art.config_echo.string()));
    os << dump_config(cfg);
  }

  const Problem problem = build_problem(cfg.problem);
  const auto start = std::chrono::steady_clock::now();
  const MultiStartResult result = multi_start(problem, cfg.run);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const fs::path path = traj_dir / fmt::format("run_{:05d}.jsonl", r);
    std::ofstream os(path);
    if (!os) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
    write_trajectory(os, result.runs[r].result.trajectory, cfg.record_wall_time);
    if (!os) throw std::runtime_error(fmt::format("failed writing {}", path.string()));
    art.trajectories.push_back(path);
  }

  art.result = summarize(cfg, result, wall);
  art.summary = art.directory / "summary.json";
  std::ofstream os(art.summary);
  if (!os) throw std::runtime_error(fmt::format("cannot write {}", art.summary.string()));
  os << to_json(art.result).dump(2) << '\n';
  if (!os) throw std::runtime_error(fmt::format("failed writing {}", art.summary.string()));
  return art;
}

}  // namespace critpt
