#pragma once

#include <stdexcept>
#include <string>

namespace stiefel {

// Numeric values are part of the C ABI (see stiefel_ekf.h) and must not change.
enum class ErrorCode : int {
  kOk = 0,
  kDimension = 1,
  kNonFinite = 2,
  kSingularProjection = 3,
  kNotOnManifold = 4,
  kNotTangent = 5,
  kBaseMismatch = 6,
  kOutOfInjectivityRadius = 7,
  kDomain = 8,
  kMeanNotFound = 9,
  kInsufficientSample = 10,
  kUnreliableRegime = 11,
  kExtrapolation = 12,
  kAbortedTrajectory = 13,
  kMeasurementFailed = 14,
  kVarianceOverflow = 15,
  kConfig = 16,
  kIo = 17,
  kInternal = 18,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace stiefel
