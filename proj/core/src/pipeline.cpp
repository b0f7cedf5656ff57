#include "cinv/pipeline.hpp"

namespace cinv {

using nlohmann::json;

json policy_to_json(const AffinePolicy& p) {
  json gains = json::array();
  json offsets = json::array();
  for (int i = 0; i < p.vertex_count(); ++i) {
    gains.push_back(matrix_to_json(p.gains[i]));
    offsets.push_back(vector_to_json(p.offsets[i]));
  }
  return json{{"schema", kReportSchema},
              {"vertex_count", p.vertex_count()},
              {"input_dim", p.input_dim()},
              {"param_dim", p.param_dim()},
              {"gains", std::move(gains)},
              {"offsets", std::move(offsets)},
              {"policy_fingerprint", hex_fingerprint(fingerprint(p))},
              {"scenario_fingerprint", hex_fingerprint(p.scenario_fingerprint)}};
}

AffinePolicy policy_from_json(const json& node) {
  const json& src = node.contains("policy") ? node.at("policy") : node;
  if (!src.is_object() || !src.contains("gains") || !src.contains("offsets")) {
    throw Error(ErrorCode::MissingPolicy, "no policy object found");
  }
  AffinePolicy p;
  const int m = src.value("input_dim", 0);
  const int ell = src.value("param_dim", 0);
  for (const auto& g : src.at("gains")) {
    // Gains with zero columns serialise as rows of empty arrays.
    if (ell == 0 || g.empty() || g.front().empty()) {
      p.gains.push_back(Eigen::MatrixXd::Zero(m, ell));
    } else {
      p.gains.push_back(json_to_matrix(g));
    }
  }
  for (const auto& d : src.at("offsets")) p.offsets.push_back(json_to_vector(d));
  if (p.gains.size() != p.offsets.size()) {
    throw Error(ErrorCode::MissingPolicy, "gain and offset counts differ");
  }
  if (src.contains("scenario_fingerprint")) {
    p.scenario_fingerprint = std::stoull(
        src.at("scenario_fingerprint").get<std::string>(), nullptr, 16);
  }
  return p;
}

json witness_to_json(const MinorWitness& w) {
  return json{{"vertex", w.vertex},
              {"sample", w.sample},
              {"input_rows", w.input_rows},
              {"state_rows", w.state_rows},
              {"determinant", w.determinant},
              {"point", vector_to_json(w.point)}};
}

namespace {

json infeasibility_to_json(const InfeasibilityReport& r) {
  return json{{"sample", r.sample},
              {"vertex", r.vertex},
              {"row", r.row},
              {"violation", r.violation},
              {"message", r.message}};
}

json multisample_to_json(const MultisampleResult& r) {
  json out{{"passed", r.passed}, {"samples_checked", r.per_sample.size()}};
  if (r.first_failure) {
    const auto [vertex, sample] = *r.first_failure;
    out["first_failure"] = {{"vertex", vertex}, {"sample", sample}};
    for (const auto& v : r.per_sample.back().vertices) {
      if (v.vertex == vertex) out["first_failure"]["reason"] = v.failure;
    }
  } else {
    out["first_failure"] = nullptr;
  }
  json witnesses = json::array();
  if (!r.per_sample.empty()) {
    for (const auto& v : r.per_sample.front().vertices) {
      if (v.witness) witnesses.push_back(witness_to_json(*v.witness));
    }
  }
  out["witnesses"] = std::move(witnesses);
  out["note"] = r.passed
                    ? "every sample admits vertex inputs; this is necessary, "
                      "not sufficient, for a feasible affine policy"
                    : "a sample without admissible vertex inputs rules out "
                      "every affine policy";
  return out;
}

json base_report(const ProblemConfig& config, double beta) {
  json report{{"schema", kReportSchema},
              {"K", config.scenarios.size()},
              {"beta", beta},
              {"state_dim", config.family.state_dim()},
              {"input_dim", config.family.input_dim()},
              {"param_dim", config.family.param_dim()},
              {"vertex_count", config.state_set.vertex_count()},
              {"scenario_fingerprint",
               hex_fingerprint(fingerprint(config.scenarios))}};
  json seeds{{"monte_carlo", config.options.monte_carlo_seed},
             {"initial_states", config.options.init_seed}};
  if (config.scenarios.seed) seeds["scenarios"] = *config.scenarios.seed;
  report["seeds"] = std::move(seeds);
  if (config.family.nominal()) {
    const SystemMatrices nominal = config.family.instantiate(*config.family.nominal());
    const SpectralEstimate rho = spectral_radius_estimate(nominal.A);
    report["diagnostics"] = {{"nominal_spectral_radius", rho.radius},
                             {"spectral_estimate_converged", rho.converged}};
  }
  return report;
}

std::optional<Distribution> validation_distribution(const ProblemConfig& config) {
  if (const auto* table = std::get_if<TableModel>(&config.family.model())) {
    return FiniteSupport{table->keys};
  }
  if (const auto* box = std::get_if<UniformBox>(&config.scenarios.distribution)) {
    return *box;
  }
  return std::nullopt;
}

}  // namespace

CertifyResult run_certify(const ProblemConfig& config, const CertifyOptions& options) {
  const double beta = options.beta.value_or(config.beta);
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::InvalidArguments, "beta must lie in (0, 1)");
  }
  const auto& f = config.family;
  const auto& S = config.state_set;
  const auto& U = config.input_set;
  const auto& sc = config.scenarios;
  const auto& opt = config.options;

  CertifyResult result;
  result.report = base_report(config, beta);
  json& report = result.report;

  const PolicySolution solution = solve_affine_policy(f, S, U, sc, opt.scenario);
  if (!solution.feasible()) {
    report["status"] = "infeasible";
    report["infeasibility"] = infeasibility_to_json(*solution.infeasibility);
    if (options.analyze) {
      report["feasibility_analysis"] =
          multisample_to_json(multisample_necessary(f, S, U, sc, opt.minor));
    }
    result.exit_code = kInfeasible;
    return result;
  }

  SupportSubsample support = greedy_support_subsample(f, S, U, sc, opt.scenario);
  const Certificate cert =
      build_certificate(sc.size(), support.size(), beta, support.policy, sc);

  int consistency_failures = 0;
  for (const auto& delta : sc.samples) {
    if (!is_admissible(f, S, U, delta, evaluate_policy(support.policy, delta),
                       opt.admissibility_tol)) {
      ++consistency_failures;
    }
  }

  report["status"] = "certified";
  report["s_K"] = cert.support_size;
  report["support"] = support.indices;
  report["epsilon"] = cert.epsilon;
  report["invariance_probability"] = cert.invariance_probability;
  report["vacuous"] = cert.vacuous;
  report["statement"] = cert.statement;
  report["policy_fingerprint"] = hex_fingerprint(cert.policy_fingerprint);
  report["consistency_failures"] = consistency_failures;
  report["policy"] = policy_to_json(support.policy);

  if (options.estimate_draws) {
    const auto dist = validation_distribution(config);
    if (!dist) {
      throw Error(ErrorCode::DistributionUnavailable,
                  "scenarios were read from a file; no distribution to sample");
    }
    const ViolationEstimate est =
        estimate_violation(f, S, U, support.policy, *dist, *options.estimate_draws,
                           opt.monte_carlo_seed, opt.admissibility_tol);
    json failures = json::array();
    for (const auto& d : est.failures) failures.push_back(vector_to_json(d));
    report["violation_estimate"] = {{"rate", est.rate},
                                    {"standard_error", est.standard_error},
                                    {"draws", est.draws},
                                    {"failure_count", est.failure_count},
                                    {"seed", est.seed},
                                    {"within_epsilon", est.rate <= cert.epsilon},
                                    {"failures", std::move(failures)}};
  }
  if (options.analyze) {
    report["feasibility_analysis"] =
        multisample_to_json(multisample_necessary(f, S, U, sc, opt.minor));
  }

  result.exit_code = kCertified;
  result.policy = support.policy;
  result.certificate = cert;
  result.support = std::move(support);
  return result;
}

SimulateResult run_simulate(const ProblemConfig& config, const AffinePolicy& policy,
                            const SimulateOptions& options) {
  const auto& f = config.family;
  const auto& S = config.state_set;
  if (policy.vertex_count() != S.vertex_count() ||
      policy.input_dim() != f.input_dim() || policy.param_dim() != f.param_dim()) {
    throw Error(ErrorCode::MissingPolicy,
                "policy shape does not match the configured problem");
  }

  Eigen::VectorXd delta;
  std::string source;
  if (std::holds_alternative<NominalSample>(options.parameter)) {
    if (!f.nominal()) {
      throw Error(ErrorCode::InvalidArguments, "system has no nominal parameter");
    }
    delta = *f.nominal();
    source = "nominal";
  } else if (const auto* t = std::get_if<TrainingSample>(&options.parameter)) {
    if (t->index < 0 || t->index >= config.scenarios.size()) {
      throw Error(ErrorCode::InvalidArguments, "training sample index out of range");
    }
    delta = config.scenarios.samples[t->index];
    source = "training:" + std::to_string(t->index);
  } else {
    delta = std::get<Eigen::VectorXd>(options.parameter);
    source = "explicit";
  }

  std::vector<Eigen::VectorXd> starts;
  if (std::holds_alternative<VertexStarts>(options.initial)) {
    for (int i = 0; i < S.vertex_count(); ++i) starts.push_back(S.vertex(i));
  } else if (const auto* r = std::get_if<RandomStarts>(&options.initial)) {
    starts = random_points_in(S, r->count, config.options.init_seed);
  } else {
    starts = std::get<std::vector<Eigen::VectorXd>>(options.initial);
  }
  const int horizon = options.horizon.value_or(config.options.horizon);

  SimulateResult result;
  json per = json::array();
  double worst = 0.0;
  int exits = 0;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    Trajectory traj = simulate_closed_loop(f, delta, S, policy, starts[k], horizon);
    worst = std::max(worst, traj.max_gauge());
    if (traj.first_exit) ++exits;
    per.push_back({{"index", k},
                   {"x0", vector_to_json(starts[k])},
                   {"max_gauge", traj.max_gauge()},
                   {"final_gauge", traj.gauge(traj.gauge.size() - 1)},
                   {"first_exit", traj.first_exit ? json(*traj.first_exit) : json()}});
    result.trajectories.push_back(std::move(traj));
  }
  result.summary = {{"schema", kReportSchema},
                    {"parameter", source},
                    {"delta", vector_to_json(delta)},
                    {"horizon", horizon},
                    {"trajectory_count", starts.size()},
                    {"max_gauge", worst},
                    {"exits", exits},
                    {"policy_fingerprint", hex_fingerprint(fingerprint(policy))},
                    {"trajectories", std::move(per)}};
  if (std::holds_alternative<RandomStarts>(options.initial)) {
    result.summary["seed"] = config.options.init_seed;
  }
  return result;
}

FeasibilityReport run_feasibility(const ProblemConfig& config,
                                  std::optional<int> sample) {
  const auto& sc = config.scenarios;
  FeasibilityReport out;
  out.report = {{"schema", kReportSchema}};
  MultisampleResult result;
  if (sample) {
    if (*sample < 0 || *sample >= sc.size()) {
      throw Error(ErrorCode::InvalidArguments, "sample index out of range");
    }
    ScenarioSet one;
    one.samples = {sc.samples[*sample]};
    one.distribution = sc.distribution;
    result = multisample_necessary(config.family, config.state_set,
                                   config.input_set, one, config.options.minor, false);
    if (result.first_failure) result.first_failure->second = *sample;
    for (auto& r : result.per_sample) {
      for (auto& v : r.vertices) {
        if (v.witness) v.witness->sample = *sample;
      }
    }
    out.report["sample"] = *sample;
  } else {
    result = multisample_necessary(config.family, config.state_set,
                                   config.input_set, sc, config.options.minor, false);
  }
  out.report["feasibility_analysis"] = multisample_to_json(result);
  json failing = json::array();
  for (std::size_t j = 0; j < result.per_sample.size(); ++j) {
    if (!result.per_sample[j].feasible) {
      failing.push_back(sample ? *sample : static_cast<int>(j));
    }
  }
  out.report["failing_samples"] = std::move(failing);
  out.exit_code = result.passed ? kCertified : kInfeasible;
  return out;
}

json epsilon_report(int K, double beta, std::optional<int> h) {
  json out{{"schema", kReportSchema}, {"K", K}, {"beta", beta}};
  if (h) {
    const double eps = epsilon_even_split(*h, K, beta);
    out["h"] = *h;
    out["epsilon"] = eps;
    out["invariance_probability"] = 1.0 - eps;
  } else {
    out["epsilon"] = epsilon_table(K, beta);
  }
  return out;
}

}  // namespace cinv
