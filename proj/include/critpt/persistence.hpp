#pragma once

// On-disk artifacts of a run: one JSON-lines trajectory per start, a summary document,
// and the resolved config echo. Also the fixed-width report printed from a summary.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "critpt/config.hpp"
#include "critpt/drivers.hpp"

namespace critpt {

/// Points with at most this many coordinates are stored in full on every trajectory row.
inline constexpr Eigen::Index kFullThetaCap = 64;

/// %.17g, or null for non-finite values.
std::string format_number(double x);

/// FNV-1a over the IEEE-754 bytes of the coordinates, as 16 hex digits.
std::string theta_hash(const ParamVector& theta);

void write_trajectory(std::ostream& os, const Trajectory& trajectory, bool wall_time);
std::vector<nlohmann::json> read_trajectory(std::istream& is);

struct ClusterRow {
  std::vector<double> theta;
  double loss = 0.0;
  double grad_norm_sq = 0.0;
  CriticalClass critical_class = CriticalClass::unclassified;
  int morse_index = 0;
  int num_zero = 0;
  std::size_t hits = 0;
};

struct RunSummary {
  std::string problem;
  std::string algorithm;
  std::size_t runs = 0;
  std::size_t converged = 0;
  double converged_fraction = 0.0;
  double median_outer_iterations = 0.0;
  std::uint64_t total_gradient_evals = 0;
  std::uint64_t total_hvp_evals = 0;
  double wall_seconds = 0.0;
  std::vector<ClusterRow> clusters;
  std::vector<std::size_t> non_converged;
  std::vector<std::string> errors;  // "run <i>: <message>" for runs that threw
};

RunSummary summarize(const RunConfig& cfg, const MultiStartResult& result, double wall_seconds);

nlohmann::json to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);

/// Fixed-width table sorted by ascending loss: class, loss, |grad L|^2, morse index, hits.
std::string format_report(const RunSummary& s);

struct RunArtifacts {
  std::filesystem::path directory;
  std::vector<std::filesystem::path> trajectories;
  std::filesystem::path summary;
  std::filesystem::path config_echo;
  RunSummary result;
};

/// Runs every start and writes the artifacts. The output directory comes from
/// CRITPT_OUTPUT_DIR when set, else from the config.
RunArtifacts execute_run(const RunConfig& cfg);

}  // namespace critpt
