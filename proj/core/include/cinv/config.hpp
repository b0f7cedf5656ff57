#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "cinv/feasibility.hpp"
#include "cinv/geometry.hpp"
#include "cinv/scenario.hpp"
#include "cinv/system_family.hpp"

namespace cinv {

struct RunOptions {
  ScenarioOptions scenario;
  MinorOptions minor;
  // Tolerance for admissibility re-checks and Monte Carlo.
  double admissibility_tol = 1e-8;
  int horizon = 50;
  int monte_carlo_draws = 10000;
  std::uint64_t monte_carlo_seed = 1;
  std::uint64_t init_seed = 2;
};

/**
 * A parsed problem description. Schema (all matrices are arrays of rows):
 *
 *   {
 *     "system":    {"network": {"edges", "floating", "inputs", "nominal_weights"}}
 *                | {"affine": {"A0", "Ak", "B0", "Bk", "nominal"?}}
 *                | {"table": {"entries": [{"key"?, "A", "B"}, ...]}},
 *     "state_set": polytope,  "input_set": polytope,
 *     "scenarios": {"uniform": {"lower", "upper"} | {"relative": [lo, hi]},
 *                   "count": K, "seed": s}
 *                | {"file": "samples.csv"},
 *     "beta": 1e-6,
 *     "options": {...}
 *   }
 *
 * where polytope is {"facets", "vertices", "rhs"?}, {"box": {"lower", "upper"}}
 * or {"cross": {"plus", "minus"}}. Relative paths resolve against base_dir.
 */
struct ProblemConfig {
  SystemFamily family;
  Polytope state_set;
  Polytope input_set;
  ScenarioSet scenarios;
  double beta = 1e-6;
  RunOptions options;
};

/// Throws Error(ConfigError) on schema problems; module errors propagate.
ProblemConfig parse_config(const nlohmann::json& doc,
                           const std::string& base_dir = ".");
ProblemConfig load_config(const std::string& path);

Polytope parse_polytope(const nlohmann::json& node);
SystemFamily parse_system(const nlohmann::json& node);

Eigen::MatrixXd json_to_matrix(const nlohmann::json& node);
Eigen::VectorXd json_to_vector(const nlohmann::json& node);
nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);

}  // namespace cinv
