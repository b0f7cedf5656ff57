#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cinv {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArguments,
  // geometry
  RankDeficientFacets,
  VertexOutsideFacets,
  UnsupportedFacet,
  OriginNotInterior,
  DecompositionInfeasible,
  // lp
  NumericalBreakdown,
  MaxIterationsExceeded,
  // system families
  InvalidGraph,
  NoFloatingNodes,
  NoInputNodes,
  UnknownSample,
  ConvergenceFailure,
  // scenario engine
  InfeasibleOnSubsample,
  // certificate
  MismatchedFingerprints,
  // feasibility analysis
  EnumerationCapExceeded,
  DimensionPrecondition,
  // closed loop
  DistributionUnavailable,
  // cli / config
  ConfigError,
  MissingPolicy,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable code. Every module reports failures
/// through this type; "infeasible" LP or scenario outcomes are results, not
/// errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cinv
