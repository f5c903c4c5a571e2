// Copyright 2026 The ksorbit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace ks {

// Stable error identifiers; the C API maps these one-to-one onto KS_ERR_*.
enum class ErrorCode : int {
  kOk = 0,
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kSingularBlock = 3,
  kDivisionByZeroInterval = 4,
  kStepSizeUnderflow = 5,
  kNoPeriodicityDetected = 6,
  kInsufficientSamples = 7,
  kSingularLinearSystem = 8,
  kMaxIterExceeded = 9,
  kDegenerateSeed = 10,
  kStepUnderflow = 11,
  kValidationFailed = 12,
  kNoImprovement = 13,
  kParseError = 14,
  kIoError = 15,
  kEigensolverFailure = 16,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace ks
