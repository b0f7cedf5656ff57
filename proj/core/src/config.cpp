#include "cinv/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace cinv {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

const json& require(const json& node, const char* key, const std::string& where) {
  if (!node.is_object() || !node.contains(key)) {
    config_error(where + ": missing \"" + key + "\"");
  }
  return node.at(key);
}

template <typename T>
T get_or(const json& node, const char* key, T fallback) {
  if (!node.is_object() || !node.contains(key)) return fallback;
  try {
    return node.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("option \"") + key + "\": " + e.what());
  }
}

std::vector<Eigen::MatrixXd> matrix_list(const json& node, const std::string& where) {
  if (!node.is_array()) config_error(where + " must be an array of matrices");
  std::vector<Eigen::MatrixXd> out;
  for (const auto& m : node) out.push_back(json_to_matrix(m));
  return out;
}

std::vector<int> int_list(const json& node, const std::string& where) {
  if (!node.is_array()) config_error(where + " must be an array");
  std::vector<int> out;
  for (const auto& v : node) {
    if (!v.is_number_integer()) config_error(where + " entries must be integers");
    out.push_back(v.get<int>());
  }
  return out;
}

RunOptions parse_options(const json& node) {
  RunOptions o;
  if (node.is_null()) return o;
  if (!node.is_object()) config_error("\"options\" must be an object");
  static const std::set<std::string> known = {
      "feas_tol",          "pivot_tol",        "max_iterations", "pivot_rule",
      "solution_tol",      "cuts_per_round",   "det_tol",        "minor_tol",
      "enumeration_cap",   "admissibility_tol", "horizon",       "monte_carlo_draws",
      "monte_carlo_seed",  "init_seed"};
  for (const auto& [key, value] : node.items()) {
    if (!known.count(key)) config_error("unknown option \"" + key + "\"");
  }
  o.scenario.lp.feas_tol = get_or(node, "feas_tol", o.scenario.lp.feas_tol);
  o.scenario.lp.pivot_tol = get_or(node, "pivot_tol", o.scenario.lp.pivot_tol);
  o.scenario.lp.max_iterations =
      get_or(node, "max_iterations", o.scenario.lp.max_iterations);
  const std::string rule = get_or<std::string>(node, "pivot_rule", "bland");
  if (rule == "bland") {
    o.scenario.lp.pivot_rule = PivotRule::Bland;
  } else if (rule == "dantzig") {
    o.scenario.lp.pivot_rule = PivotRule::Dantzig;
  } else {
    config_error("pivot_rule must be \"bland\" or \"dantzig\"");
  }
  o.scenario.solution_tol = get_or(node, "solution_tol", o.scenario.solution_tol);
  o.scenario.cuts_per_round = get_or(node, "cuts_per_round", o.scenario.cuts_per_round);
  o.minor.det_tol = get_or(node, "det_tol", o.minor.det_tol);
  o.minor.tol = get_or(node, "minor_tol", o.minor.tol);
  o.minor.enumeration_cap = get_or(node, "enumeration_cap", o.minor.enumeration_cap);
  o.admissibility_tol = get_or(node, "admissibility_tol", o.admissibility_tol);
  o.horizon = get_or(node, "horizon", o.horizon);
  o.monte_carlo_draws = get_or(node, "monte_carlo_draws", o.monte_carlo_draws);
  o.monte_carlo_seed = get_or(node, "monte_carlo_seed", o.monte_carlo_seed);
  o.init_seed = get_or(node, "init_seed", o.init_seed);
  if (o.horizon < 1) config_error("horizon must be >= 1");
  if (o.monte_carlo_draws < 1) config_error("monte_carlo_draws must be >= 1");
  if (o.scenario.cuts_per_round < 1) config_error("cuts_per_round must be >= 1");
  return o;
}

ScenarioSet parse_scenarios(const json& node, const SystemFamily& family,
                            const std::string& base_dir) {
  if (node.contains("file")) {
    std::filesystem::path p = node.at("file").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    return load_scenarios_csv(p.string());
  }
  const json& uni = require(node, "uniform", "scenarios");
  UniformBox box;
  if (uni.contains("relative")) {
    const Eigen::VectorXd rel = json_to_vector(uni.at("relative"));
    if (rel.size() != 2) config_error("uniform.relative must be [low, high]");
    if (!family.nominal()) {
      config_error("uniform.relative needs a nominal parameter");
    }
    box.lower = rel(0) * *family.nominal();
    box.upper = rel(1) * *family.nominal();
    for (Eigen::Index k = 0; k < box.lower.size(); ++k) {
      if (box.lower(k) > box.upper(k)) std::swap(box.lower(k), box.upper(k));
    }
  } else {
    box.lower = json_to_vector(require(uni, "lower", "scenarios.uniform"));
    box.upper = json_to_vector(require(uni, "upper", "scenarios.uniform"));
  }
  const int count = require(node, "count", "scenarios").get<int>();
  const auto seed = get_or<std::uint64_t>(node, "seed", 0);
  return sample_uniform(box, count, seed);
}

}  // namespace

Eigen::MatrixXd json_to_matrix(const json& node) {
  if (!node.is_array() || node.empty()) config_error("expected a non-empty matrix");
  const std::size_t rows = node.size();
  if (!node.front().is_array()) config_error("matrix rows must be arrays");
  const std::size_t cols = node.front().size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].is_array() || node[i].size() != cols) {
      config_error("matrix rows differ in length");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!node[i][j].is_number()) config_error("matrix entries must be numbers");
      m(i, j) = node[i][j].get<double>();
    }
  }
  return m;
}

Eigen::VectorXd json_to_vector(const json& node) {
  if (!node.is_array()) config_error("expected an array of numbers");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number()) config_error("vector entries must be numbers");
    v(i) = node[i].get<double>();
  }
  return v;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Polytope parse_polytope(const json& node) {
  if (node.contains("box")) {
    const json& box = node.at("box");
    return make_box(json_to_vector(require(box, "lower", "box")),
                    json_to_vector(require(box, "upper", "box")));
  }
  if (node.contains("cross")) {
    const json& c = node.at("cross");
    return make_cross_polytope(json_to_vector(require(c, "plus", "cross")),
                               json_to_vector(require(c, "minus", "cross")));
  }
  const Eigen::MatrixXd F = json_to_matrix(require(node, "facets", "polytope"));
  // Vertices are listed one per row in the file; stored column-wise.
  const Eigen::MatrixXd V =
      json_to_matrix(require(node, "vertices", "polytope")).transpose();
  if (node.contains("rhs")) {
    return validate_polytope(F, json_to_vector(node.at("rhs")), V);
  }
  return validate_polytope(F, V);
}

SystemFamily parse_system(const json& node) {
  if (node.contains("network")) {
    const json& net = node.at("network");
    Graph g;
    g.floating = int_list(require(net, "floating", "network"), "network.floating");
    g.inputs = int_list(require(net, "inputs", "network"), "network.inputs");
    for (const auto& e : require(net, "edges", "network")) {
      const auto pair = int_list(e, "network.edges");
      if (pair.size() != 2) config_error("each edge is a pair of node labels");
      g.edges.emplace_back(pair[0], pair[1]);
    }
    g.nominal_weights = json_to_vector(require(net, "nominal_weights", "network"));
    g.node_count = get_or<int>(net, "node_count",
                               static_cast<int>(g.floating.size() + g.inputs.size()));
    return build_network_family(g);
  }
  if (node.contains("affine")) {
    const json& a = node.at("affine");
    AffineModel model;
    model.A0 = json_to_matrix(require(a, "A0", "affine"));
    model.B0 = json_to_matrix(require(a, "B0", "affine"));
    model.Ak = a.contains("Ak") ? matrix_list(a.at("Ak"), "affine.Ak")
                                : std::vector<Eigen::MatrixXd>{};
    model.Bk = a.contains("Bk") ? matrix_list(a.at("Bk"), "affine.Bk")
                                : std::vector<Eigen::MatrixXd>{};
    SystemFamily f = make_affine_family(std::move(model));
    if (a.contains("nominal")) return f.with_nominal(json_to_vector(a.at("nominal")));
    return f.with_nominal(Eigen::VectorXd::Zero(f.param_dim()));
  }
  if (node.contains("table")) {
    TableModel model;
    for (const auto& entry : require(node.at("table"), "entries", "table")) {
      if (entry.contains("key")) model.keys.push_back(json_to_vector(entry.at("key")));
      model.A.push_back(json_to_matrix(require(entry, "A", "table entry")));
      model.B.push_back(json_to_matrix(require(entry, "B", "table entry")));
    }
    if (!model.keys.empty() && model.keys.size() != model.A.size()) {
      config_error("either every table entry has a key or none does");
    }
    return make_table_family(std::move(model));
  }
  config_error("system must be one of \"network\", \"affine\", \"table\"");
}

ProblemConfig parse_config(const json& doc, const std::string& base_dir) {
  if (!doc.is_object()) config_error("config root must be an object");
  try {
    SystemFamily family = parse_system(require(doc, "system", "config"));
    Polytope S = parse_polytope(require(doc, "state_set", "config"));
    Polytope U = parse_polytope(require(doc, "input_set", "config"));
    if (S.dim() != family.state_dim()) {
      config_error("state_set dimension " + std::to_string(S.dim()) +
                   " differs from system state dimension " +
                   std::to_string(family.state_dim()));
    }
    if (U.dim() != family.input_dim()) {
      config_error("input_set dimension " + std::to_string(U.dim()) +
                   " differs from system input dimension " +
                   std::to_string(family.input_dim()));
    }
    ScenarioSet scenarios =
        parse_scenarios(require(doc, "scenarios", "config"), family, base_dir);
    if (scenarios.param_dim() != family.param_dim()) {
      config_error("scenarios have length " + std::to_string(scenarios.param_dim()) +
                   ", system expects " + std::to_string(family.param_dim()));
    }
    const double beta = get_or(doc, "beta", 1e-6);
    if (!(beta > 0.0 && beta < 1.0)) config_error("beta must lie in (0, 1)");
    RunOptions options =
        parse_options(doc.contains("options") ? doc.at("options") : json());
    return ProblemConfig{std::move(family), std::move(S), std::move(U),
                         std::move(scenarios), beta, options};
  } catch (const json::exception& e) {
    config_error(e.what());
  }
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error(path + ": " + e.what());
  }
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(doc, dir.empty() ? "." : dir.string());
}

}  // namespace cinv
