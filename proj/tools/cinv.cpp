// Command-line front end: certify, simulate, epsilon, feasibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cinv/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigHelp = R"(Problem configuration (JSON; matrices are arrays of rows):
  system      {"network": {"edges": [[i,j],...], "floating": [...], "inputs": [...],
                           "nominal_weights": [...], "node_count"?: n}}
            | {"affine": {"A0", "Ak": [...], "B0", "Bk": [...], "nominal"?}}
            | {"table": {"entries": [{"key"?: [...], "A", "B"}, ...]}}
  state_set   polytope: {"facets", "vertices" (one per row), "rhs"?}
            | {"box": {"lower", "upper"}} | {"cross": {"plus", "minus"}}
  input_set   polytope, as above
  scenarios   {"uniform": {"lower", "upper"} | {"relative": [lo, hi]},
               "count": K, "seed": s}  |  {"file": "samples.csv"}
  beta        confidence parameter in (0, 1)
  options     feas_tol, pivot_tol, max_iterations, pivot_rule ("bland"|"dantzig"),
              solution_tol, cuts_per_round, det_tol, minor_tol, enumeration_cap,
              admissibility_tol, horizon, monte_carlo_draws, monte_carlo_seed,
              init_seed
Exit codes: 0 certified / feasible, 2 infeasible, 1 error.)";

void emit(const json& doc, const std::optional<std::string>& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path) {
    std::ofstream out(*path);
    if (!out) throw cinv::Error(cinv::ErrorCode::ConfigError, "cannot write " + *path);
    out << text;
  } else {
    std::cout << text;
  }
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cinv::Error(cinv::ErrorCode::ConfigError, "cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw cinv::Error(cinv::ErrorCode::ConfigError, path + ": " + e.what());
  }
}

Eigen::VectorXd parse_vector(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw cinv::Error(cinv::ErrorCode::InvalidArguments, "bad number '" + item + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
}

cinv::InitialStates parse_init(const std::string& text) {
  if (text == "vertices") return cinv::VertexStarts{};
  if (text.rfind("random:", 0) == 0) {
    const int count = std::stoi(text.substr(7));
    if (count < 1) {
      throw cinv::Error(cinv::ErrorCode::InvalidArguments, "random:N needs N >= 1");
    }
    return cinv::RandomStarts{count};
  }
  // Explicit points separated by ';', coordinates by ','.
  std::vector<Eigen::VectorXd> points;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) points.push_back(parse_vector(item));
  return points;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based verification of controlled invariance for sampled "
               "linear system families"};
  app.footer(kConfigHelp);
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::string> report_path;

  auto* certify = app.add_subcommand("certify", "Synthesize a policy and certify it");
  bool analyze = false;
  std::optional<int> estimate;
  std::optional<double> beta;
  certify->add_option("--config", config_path, "Problem configuration")->required();
  certify->add_flag("--analyze", analyze, "Add minor-enumeration diagnostics");
  certify->add_option("--estimate", estimate, "Monte Carlo draws for the violation estimate")
      ->check(CLI::PositiveNumber);
  certify->add_option("--beta", beta, "Override the confidence parameter");
  certify->add_option("--report", report_path, "Write the JSON report here");

  auto* simulate = app.add_subcommand("simulate", "Run the vertex control law");
  std::string policy_path;
  std::optional<int> sample;
  bool nominal = false;
  std::optional<std::string> delta_text;
  std::string init = "vertices";
  std::optional<int> horizon;
  std::optional<std::string> out_dir;
  simulate->add_option("--config", config_path, "Problem configuration")->required();
  simulate->add_option("--policy", policy_path, "Policy JSON or certify report")->required();
  auto* sample_opt =
      simulate->add_option("--sample", sample, "Training sample (1-based)")->check(CLI::PositiveNumber);
  auto* nominal_opt = simulate->add_flag("--nominal", nominal, "Use the nominal parameter");
  auto* delta_opt =
      simulate->add_option("--delta", delta_text, "Explicit parameter, comma separated");
  sample_opt->excludes(nominal_opt)->excludes(delta_opt);
  nominal_opt->excludes(delta_opt);
  simulate->add_option("--init", init,
                       "vertices | random:N | x1,x2,...;y1,y2,... (default vertices)");
  simulate->add_option("--horizon", horizon, "Steps per trajectory")->check(CLI::PositiveNumber);
  simulate->add_option("--out", out_dir, "Directory for trajectory CSVs and summary.json");

  auto* epsilon = app.add_subcommand("epsilon", "Evaluate the violation bound");
  epsilon->set_help_flag("--help", "Print this help message and exit");
  int K = 0;
  double eps_beta = 0.0;
  std::optional<int> h;
  bool table = false;
  epsilon->add_option("--K", K, "Number of samples")->required();
  epsilon->add_option("--beta", eps_beta, "Confidence parameter")->required();
  auto* h_opt = epsilon->add_option("--h", h, "Support size");
  auto* table_opt = epsilon->add_flag("--table", table, "Every h = 0..K");
  h_opt->excludes(table_opt);

  auto* feasibility =
      app.add_subcommand("feasibility", "Minor-enumeration feasibility diagnostics");
  std::optional<int> feas_sample;
  feasibility->add_option("--config", config_path, "Problem configuration")->required();
  feasibility->add_option("--sample", feas_sample, "Only this sample (1-based)")
      ->check(CLI::PositiveNumber);
  feasibility->add_option("--report", report_path, "Write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cinv::kError;
  }

  try {
    if (*certify) {
      cinv::ProblemConfig config = cinv::load_config(config_path);
      cinv::CertifyOptions opt;
      opt.analyze = analyze;
      opt.estimate_draws = estimate;
      opt.beta = beta;
      const cinv::CertifyResult result = cinv::run_certify(config, opt);
      emit(result.report, report_path);
      return result.exit_code;
    }
    if (*simulate) {
      const cinv::ProblemConfig config = cinv::load_config(config_path);
      const cinv::AffinePolicy policy = cinv::policy_from_json(read_json(policy_path));
      cinv::SimulateOptions opt;
      if (sample) {
        opt.parameter = cinv::TrainingSample{*sample - 1};
      } else if (delta_text) {
        opt.parameter = parse_vector(*delta_text);
      } else {
        opt.parameter = cinv::NominalSample{};
      }
      opt.initial = parse_init(init);
      opt.horizon = horizon;
      const cinv::SimulateResult result = cinv::run_simulate(config, policy, opt);
      if (out_dir) {
        fs::create_directories(*out_dir);
        for (std::size_t k = 0; k < result.trajectories.size(); ++k) {
          char name[32];
          std::snprintf(name, sizeof name, "trajectory_%04zu.csv", k);
          std::ofstream csv(fs::path(*out_dir) / name);
          cinv::write_trajectory_csv(csv, result.trajectories[k]);
        }
        emit(result.summary, (fs::path(*out_dir) / "summary.json").string());
      } else {
        emit(result.summary, std::nullopt);
      }
      return cinv::kCertified;
    }
    if (*epsilon) {
      // Without --h the whole table is printed.
      emit(cinv::epsilon_report(K, eps_beta, table ? std::nullopt : h), std::nullopt);
      return cinv::kCertified;
    }
    if (*feasibility) {
      const cinv::ProblemConfig config = cinv::load_config(config_path);
      std::optional<int> index;
      if (feas_sample) index = *feas_sample - 1;
      const cinv::FeasibilityReport result = cinv::run_feasibility(config, index);
      emit(result.report, report_path);
      return result.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cinv::kError;
  }
  return cinv::kError;
}
