#include "stiefel/error.hpp"

namespace stiefel {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kOk: return "ok";
    case ErrorCode::kDimension: return "dimension";
    case ErrorCode::kNonFinite: return "non-finite";
    case ErrorCode::kSingularProjection: return "singular-projection";
    case ErrorCode::kNotOnManifold: return "not-on-manifold";
    case ErrorCode::kNotTangent: return "not-tangent";
    case ErrorCode::kBaseMismatch: return "base-mismatch";
    case ErrorCode::kOutOfInjectivityRadius: return "out-of-injectivity-radius";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kMeanNotFound: return "mean-not-found";
    case ErrorCode::kInsufficientSample: return "insufficient-sample";
    case ErrorCode::kUnreliableRegime: return "unreliable-regime";
    case ErrorCode::kExtrapolation: return "extrapolation";
    case ErrorCode::kAbortedTrajectory: return "aborted-trajectory";
    case ErrorCode::kMeasurementFailed: return "measurement-failed";
    case ErrorCode::kVarianceOverflow: return "variance-overflow";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kInternal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace stiefel
