#include "cinv/error.hpp"

namespace cinv {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArguments: return "InvalidArguments";
    case ErrorCode::RankDeficientFacets: return "RankDeficientFacets";
    case ErrorCode::VertexOutsideFacets: return "VertexOutsideFacets";
    case ErrorCode::UnsupportedFacet: return "UnsupportedFacet";
    case ErrorCode::OriginNotInterior: return "OriginNotInterior";
    case ErrorCode::DecompositionInfeasible: return "DecompositionInfeasible";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::MaxIterationsExceeded: return "MaxIterationsExceeded";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::NoFloatingNodes: return "NoFloatingNodes";
    case ErrorCode::NoInputNodes: return "NoInputNodes";
    case ErrorCode::UnknownSample: return "UnknownSample";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::InfeasibleOnSubsample: return "InfeasibleOnSubsample";
    case ErrorCode::MismatchedFingerprints: return "MismatchedFingerprints";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::DimensionPrecondition: return "DimensionPrecondition";
    case ErrorCode::DistributionUnavailable: return "DistributionUnavailable";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::MissingPolicy: return "MissingPolicy";
  }
  return "Unknown";
}

}  // namespace cinv
