#include "pap/error.hpp"

namespace pap {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnsupportedFamily: return "UnsupportedFamily";
    case ErrorCode::NotPermutationInvariant: return "NotPermutationInvariant";
    case ErrorCode::CombinatorialBlowup: return "CombinatorialBlowup";
    case ErrorCode::Unavailable: return "Unavailable";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::ParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::RequiresHRep: return "RequiresHRep";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::StrategyUnavailable: return "StrategyUnavailable";
    case ErrorCode::StructuralInequalityUnverified: return "StructuralInequalityUnverified";
    case ErrorCode::IterationCapExceeded: return "IterationCapExceeded";
    case ErrorCode::LpInfeasible: return "LpInfeasible";
  }
  return "Unknown";
}

}  // namespace pap
