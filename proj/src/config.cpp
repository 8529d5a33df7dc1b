#include "critpt/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "critpt/errors.hpp"
#include "critpt/problems.hpp"

namespace critpt {

using nlohmann::json;

namespace {

// Reads fields out of one JSON object, remembering which keys were consumed so
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(fmt::format("'{}' must be an object", where()));
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() || it->is_null() ? nullptr : &*it;
  }

  double real(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) throw ConfigError(fmt::format("'{}' must be a number", field(key)));
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) {
      throw ConfigError(fmt::format("'{}' must be an integer", field(key)));
    }
    const auto value = v->get<std::int64_t>();
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max()) {
      throw ConfigError(fmt::format("'{}' is out of range", field(key)));
    }
    return static_cast<int>(value);
  }

  std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (v->is_number_unsigned()) return v->get<std::uint64_t>();
    throw ConfigError(fmt::format("'{}' must be an unsigned 64-bit integer", field(key)));
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(fmt::format("'{}' must be true or false", field(key)));
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) throw ConfigError(fmt::format("'{}' must be a string", field(key)));
    return v->get<std::string>();
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (v->is_number()) return {v->get<double>()};
    if (!v->is_array() || v->empty()) {
      throw ConfigError(fmt::format("'{}' must be a number or a non-empty array", field(key)));
    }
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) throw ConfigError(fmt::format("'{}' entries must be numbers", field(key)));
      out.push_back(e.get<double>());
    }
    return out;
  }

  Section child(const std::string& key) {
    const json* v = get(key);
    static const json empty = json::object();
    return Section(v ? *v : empty, field(key));
  }

  void reject_unknown() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) {
        throw ConfigError(fmt::format("unknown field '{}'", field(key)));
      }
    }
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

 private:
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(fmt::format("field '{}': {}", field, message));
}

Matrix matrix_from_json(const json& node, const std::string& field) {
  require(node.is_array() && !node.empty(), field, "must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(node.size());
  require(node[0].is_array() && !node[0].empty(), field, "rows must be non-empty arrays");
  const auto cols = static_cast<Eigen::Index>(node[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = node[static_cast<std::size_t>(i)];
    require(row.is_array() && static_cast<Eigen::Index>(row.size()) == cols, field,
            "rows must all have the same length");
    for (Eigen::Index j = 0; j < cols; ++j) {
      const json& e = row[static_cast<std::size_t>(j)];
      require(e.is_number(), field, "entries must be numbers");
      m(i, j) = e.get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

// Fills defaults and validates problem parameters; returns the resolved parameter object.
json resolve_problem_params(const std::string& name, Section& s) {
  json out = json::object();
  if (name == "himmelblau") {
    return out;
  }
  if (name == "quadratic") {
    const json* matrix = s.get("matrix");
    require(matrix != nullptr, s.field("matrix"), "is required for the quadratic problem");
    const Matrix a = matrix_from_json(*matrix, s.field("matrix"));
    require(a.rows() == a.cols(), s.field("matrix"), "must be square");
    std::vector<double> offset = s.reals("offset", std::vector<double>(a.rows(), 0.0));
    require(static_cast<Eigen::Index>(offset.size()) == a.rows(), s.field("offset"),
            "must have one entry per matrix row");
    out["matrix"] = matrix_to_json(a);
    out["offset"] = offset;
    return out;
  }
  // linear-autoencoder
  const int hidden = s.integer("hidden", 1);
  if (const json* data = s.get("data")) {
    const Matrix x = matrix_from_json(*data, s.field("data"));
    require(hidden >= 1 && hidden < x.rows(), s.field("hidden"),
            "must satisfy 1 <= hidden < number of data rows");
    out["data"] = matrix_to_json(x);
    out["hidden"] = hidden;
    return out;
  }
  const std::vector<double> eigenvalues = s.reals("eigenvalues", {4.0, 2.0, 1.0});
  const auto n = static_cast<int>(eigenvalues.size());
  require(n >= 2, s.field("eigenvalues"), "needs at least two entries");
  for (double l : eigenvalues) {
    require(l > 0.0 && std::isfinite(l), s.field("eigenvalues"), "entries must be positive");
  }
  require(hidden >= 1 && hidden < n, s.field("hidden"),
          "must satisfy 1 <= hidden < number of eigenvalues");
  const int samples = s.integer("samples", n);
  require(samples >= n, s.field("samples"), "must be at least the number of eigenvalues");
  out["eigenvalues"] = eigenvalues;
  out["hidden"] = hidden;
  out["samples"] = samples;
  out["basis_seed"] = s.unsigned64("basis_seed", 0);
  out["data_seed"] = s.unsigned64("data_seed", 1);
  return out;
}

std::vector<double> default_bounds(const std::string& problem, bool upper) {
  if (problem == "himmelblau") return {upper ? 6.0 : -6.0};
  return {upper ? 1.0 : -1.0};
}

}  // namespace

const std::vector<std::string>& problem_names() {
  static const std::vector<std::string> names{"quadratic", "himmelblau", "linear-autoencoder"};
  return names;
}

const std::vector<std::string>& algorithm_names() {
  static const std::vector<std::string> names{"newton-mr", "gnd"};
  return names;
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(fmt::format("config parse error at line {}, column {}: {}", line, column,
                                  e.what()));
  }

  Section root(doc, "");
  RunConfig cfg;

  // problem: either a bare name or {"name": ..., <params>}
  const json* problem = root.get("problem");
  require(problem != nullptr, "problem", "is required");
  const json problem_obj = problem->is_string() ? json{{"name", *problem}} : *problem;
  Section ps(problem_obj, "problem");
  cfg.problem.name = ps.string("name", "");
  const auto& pnames = problem_names();
  if (std::find(pnames.begin(), pnames.end(), cfg.problem.name) == pnames.end()) {
    throw ConfigError(fmt::format("field 'problem.name': unknown problem '{}'; valid names: {{{}}}",
                                  cfg.problem.name, fmt::join(pnames, ", ")));
  }
  cfg.problem.params = resolve_problem_params(cfg.problem.name, ps);
  ps.reject_unknown();

  const std::string algorithm = root.string("algorithm", "newton-mr");
  if (algorithm == "newton-mr") {
    cfg.run.algorithm = Algorithm::newton_mr;
  } else if (algorithm == "gnd") {
    cfg.run.algorithm = Algorithm::gradient_norm_descent;
  } else {
    throw ConfigError(fmt::format("field 'algorithm': unknown algorithm '{}'; valid names: {{{}}}",
                                  algorithm, fmt::join(algorithm_names(), ", ")));
  }

  OuterConfig& outer = cfg.run.outer;
  {
    Section s = root.child("outer");
    outer.grad_norm_sq_tol = s.real("grad_norm_sq_tol", outer.grad_norm_sq_tol);
    require(outer.grad_norm_sq_tol > 0.0, s.field("grad_norm_sq_tol"), "must be positive");
    outer.max_outer_iterations = s.integer("max_outer_iterations", outer.max_outer_iterations);
    require(outer.max_outer_iterations >= 0, s.field("max_outer_iterations"), "must be >= 0");
    outer.baseline_step = s.real("baseline_step", outer.baseline_step);
    require(outer.baseline_step > 0.0, s.field("baseline_step"), "must be positive");
    outer.eps_lambda = s.real("eps_lambda", outer.eps_lambda);
    require(outer.eps_lambda >= 0.0, s.field("eps_lambda"),
            "must be positive (0 selects the relative default)");
    outer.divergence_factor = s.real("divergence_factor", outer.divergence_factor);
    require(outer.divergence_factor > 1.0, s.field("divergence_factor"), "must exceed 1");
    s.reject_unknown();
  }
  {
    Section s = root.child("inner");
    InnerSolveConfig& in = outer.inner;
    in.relative_residual_tol = s.real("relative_residual_tol", in.relative_residual_tol);
    require(in.relative_residual_tol > 0.0 && in.relative_residual_tol < 1.0,
            s.field("relative_residual_tol"), "relative_residual_tol must lie in (0,1)");
    in.max_inner_iterations = s.integer("max_inner_iterations", in.max_inner_iterations);
    require(in.max_inner_iterations >= 0, s.field("max_inner_iterations"),
            "must be positive (0 selects min(2n, 200))");
    in.breakdown_tol = s.real("breakdown_tol", in.breakdown_tol);
    require(in.breakdown_tol > 0.0, s.field("breakdown_tol"), "must be positive");
    s.reject_unknown();
  }
  {
    Section s = root.child("line_search");
    LineSearchConfig& ls = outer.line_search;
    ls.eta0 = s.real("eta0", ls.eta0);
    require(ls.eta0 > 0.0, s.field("eta0"), "eta0 must be positive");
    ls.shrink = s.real("shrink", ls.shrink);
    require(ls.shrink > 0.0 && ls.shrink < 1.0, s.field("shrink"), "shrink must lie in (0,1)");
    ls.rho = s.real("rho", ls.rho);
    require(ls.rho > 0.0 && ls.rho < 1.0, s.field("rho"), "rho must lie in (0,1)");
    ls.max_backtracks = s.integer("max_backtracks", ls.max_backtracks);
    require(ls.max_backtracks >= 1, s.field("max_backtracks"), "must be at least 1");
    s.reject_unknown();
  }
  {
    Section s = root.child("multi_start");
    MultiStartConfig& ms = cfg.run;
    ms.count = s.integer("count", ms.count);
    require(ms.count >= 1, s.field("count"), "must be at least 1");
    ms.sampler.lower = s.reals("lower", default_bounds(cfg.problem.name, false));
    ms.sampler.upper = s.reals("upper", default_bounds(cfg.problem.name, true));
    require(ms.sampler.lower.size() == ms.sampler.upper.size(), s.field("upper"),
            "must have as many entries as 'lower'");
    for (std::size_t i = 0; i < ms.sampler.lower.size(); ++i) {
      require(ms.sampler.lower[i] <= ms.sampler.upper[i], s.field("upper"),
              "must be >= the matching lower bound");
    }
    ms.sampler.seed = s.unsigned64("seed", ms.sampler.seed);
    ms.cluster_radius_rel = s.real("cluster_radius_rel", ms.cluster_radius_rel);
    require(ms.cluster_radius_rel > 0.0, s.field("cluster_radius_rel"), "must be positive");
    ms.threads = s.integer("threads", ms.threads);
    require(ms.threads >= 0, s.field("threads"), "must be >= 0 (0 uses every core)");
    s.reject_unknown();
  }
  {
    Section s = root.child("output");
    cfg.output_dir = s.string("directory", cfg.output_dir);
    require(!cfg.output_dir.empty(), s.field("directory"), "must not be empty");
    cfg.record_wall_time = s.boolean("wall_time", cfg.record_wall_time);
    s.reject_unknown();
  }
  root.reject_unknown();

  // Catch problem-level constraints (symmetry, distinct covariance spectrum) and bound
  // sizes now rather than at run time.
  const Problem built = build_problem(cfg.problem);
  for (const auto* bounds : {&cfg.run.sampler.lower, &cfg.run.sampler.upper}) {
    require(bounds->size() == 1 || static_cast<Eigen::Index>(bounds->size()) == built.dimension(),
            "multi_start.lower/upper",
            fmt::format("needs 1 or {} entries", built.dimension()));
  }
  return cfg;
}

json to_json(const RunConfig& cfg) {
  const OuterConfig& o = cfg.run.outer;
  json problem = cfg.problem.params;
  problem["name"] = cfg.problem.name;
  return json{
      {"problem", problem},
      {"algorithm", std::string(to_string(cfg.run.algorithm))},
      {"outer",
       {{"grad_norm_sq_tol", o.grad_norm_sq_tol},
        {"max_outer_iterations", o.max_outer_iterations},
        {"baseline_step", o.baseline_step},
        {"eps_lambda", o.eps_lambda},
        {"divergence_factor", o.divergence_factor}}},
      {"inner",
       {{"relative_residual_tol", o.inner.relative_residual_tol},
        {"max_inner_iterations", o.inner.max_inner_iterations},
        {"breakdown_tol", o.inner.breakdown_tol}}},
      {"line_search",
       {{"eta0", o.line_search.eta0},
        {"shrink", o.line_search.shrink},
        {"rho", o.line_search.rho},
        {"max_backtracks", o.line_search.max_backtracks}}},
      {"multi_start",
       {{"count", cfg.run.count},
        {"lower", cfg.run.sampler.lower},
        {"upper", cfg.run.sampler.upper},
        {"seed", cfg.run.sampler.seed},
        {"cluster_radius_rel", cfg.run.cluster_radius_rel},
        {"threads", cfg.run.threads}}},
      {"output", {{"directory", cfg.output_dir}, {"wall_time", cfg.record_wall_time}}},
  };
}

std::string dump_config(const RunConfig& cfg) { return to_json(cfg).dump(2) + "\n"; }

bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

Problem build_problem(const ProblemConfig& cfg) {
  const json& p = cfg.params;
  if (cfg.name == "himmelblau") return problems::make_himmelblau();
  if (cfg.name == "quadratic") {
    problems::QuadraticSpec spec;
    spec.matrix = matrix_from_json(p.at("matrix"), "problem.matrix");
    const auto offset = p.at("offset").get<std::vector<double>>();
    spec.offset = make_param(offset);
    try {
      return problems::make_quadratic(spec);
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("field 'problem.matrix': {}", e.what()));
    }
  }
  if (cfg.name == "linear-autoencoder") {
    problems::LinearAutoencoderSpec spec;
    spec.hidden = p.at("hidden").get<int>();
    if (p.contains("data")) {
      spec.data = matrix_from_json(p.at("data"), "problem.data");
    } else {
      const auto eigenvalues = p.at("eigenvalues").get<std::vector<double>>();
      const auto n = static_cast<Eigen::Index>(eigenvalues.size());
      const Matrix basis = problems::random_orthogonal(n, p.at("basis_seed").get<std::uint64_t>());
      spec.data = problems::autoencoder_data(eigenvalues, basis, p.at("samples").get<int>(),
                                             p.at("data_seed").get<std::uint64_t>());
    }
    try {
      return problems::make_linear_autoencoder(spec);
    } catch (const DomainError& e) {
      throw ConfigError(fmt::format("field 'problem': {}", e.what()));
    }
  }
  throw ConfigError(fmt::format("unknown problem '{}'", cfg.name));
}

}  // namespace critpt
