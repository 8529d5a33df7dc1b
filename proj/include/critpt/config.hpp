#pragma once

// Run configuration: a JSON document with every omitted field filled by a documented
// default. The fully resolved document is echoed next to every run's outputs.

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "critpt/drivers.hpp"
#include "critpt/problem.hpp"

namespace critpt {

inline constexpr const char* kOutputDirEnv = "CRITPT_OUTPUT_DIR";

/// Problem name plus its resolved parameters (every default spelled out).
struct ProblemConfig {
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct RunConfig {
  ProblemConfig problem;
  MultiStartConfig run;
  std::string output_dir = "critpt-out";
  bool record_wall_time = false;
};

const std::vector<std::string>& problem_names();
const std::vector<std::string>& algorithm_names();

/// Throws ConfigError with line/column context on malformed JSON and with the field
/// name on a violated constraint.
RunConfig parse_config(std::string_view text);

nlohmann::json to_json(const RunConfig& cfg);
std::string dump_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

Problem build_problem(const ProblemConfig& cfg);

}  // namespace critpt
