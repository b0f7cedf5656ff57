#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "cinv/certificate.hpp"
#include "cinv/closed_loop.hpp"
#include "cinv/config.hpp"

namespace cinv {

inline constexpr int kReportSchema = 1;

enum ExitCode : int { kCertified = 0, kError = 1, kInfeasible = 2 };

nlohmann::json policy_to_json(const AffinePolicy& p);
/// Accepts a bare policy object or a certify report containing "policy".
AffinePolicy policy_from_json(const nlohmann::json& node);

struct CertifyOptions {
  bool analyze = false;
  std::optional<int> estimate_draws;
  std::optional<double> beta;
};

struct CertifyResult {
  int exit_code = kError;
  nlohmann::json report;
  std::optional<AffinePolicy> policy;
  std::optional<SupportSubsample> support;
  std::optional<Certificate> certificate;
};

/// Policy synthesis -> greedy support subsample -> certificate, plus an
/// optional Monte Carlo estimate and minor-enumeration diagnostics.
CertifyResult run_certify(const ProblemConfig& config,
                          const CertifyOptions& options = {});

struct NominalSample {};
struct TrainingSample {
  int index = 0;  // 0-based
};
using SimulationParameter =
    std::variant<NominalSample, TrainingSample, Eigen::VectorXd>;

struct VertexStarts {};
struct RandomStarts {
  int count = 0;
};
using InitialStates =
    std::variant<VertexStarts, RandomStarts, std::vector<Eigen::VectorXd>>;

struct SimulateOptions {
  SimulationParameter parameter = NominalSample{};
  InitialStates initial = VertexStarts{};
  std::optional<int> horizon;
};

struct SimulateResult {
  std::vector<Trajectory> trajectories;
  nlohmann::json summary;
};

/// Throws MissingPolicy when the policy does not fit the configured sets.
SimulateResult run_simulate(const ProblemConfig& config, const AffinePolicy& policy,
                            const SimulateOptions& options = {});

struct FeasibilityReport {
  int exit_code = kError;
  nlohmann::json report;
};

/// Minor-enumeration diagnostics for every sample, or for one (0-based).
FeasibilityReport run_feasibility(const ProblemConfig& config,
                                  std::optional<int> sample = std::nullopt);

/// eps(h) for one h, or the whole table when h is empty.
nlohmann::json epsilon_report(int K, double beta, std::optional<int> h);

nlohmann::json witness_to_json(const MinorWitness& w);

}  // namespace cinv
