// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#include "ksorbit/error.hpp"

namespace ks {

const char* error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kSingularBlock: return "SingularBlock";
    case ErrorCode::kDivisionByZeroInterval: return "DivisionByIntervalContainingZero";
    case ErrorCode::kStepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::kNoPeriodicityDetected: return "NoPeriodicityDetected";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kSingularLinearSystem: return "SingularLinearSystem";
    case ErrorCode::kMaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::kDegenerateSeed: return "DegenerateSeed";
    case ErrorCode::kStepUnderflow: return "StepUnderflow";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
    case ErrorCode::kNoImprovement: return "NoImprovement";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kEigensolverFailure: return "EigensolverFailure";
  }
  return "Unknown";
}

}  // namespace ks
