#pragma once

// Extended Kalman filter for St(n,k)-valued measurements. The mean moves
// along the orthogonal flow exp_M(tA), the scalar variance is carried both as
// the ambient variance of the lifted normal and as the intrinsic variance on
// the manifold, linked through eta.

#include <memory>
#include <optional>
#include <vector>

#include "stiefel/eta_table.hpp"
#include "stiefel/geometry.hpp"
#include "stiefel/sde.hpp"

namespace stiefel {

struct Belief {
  StiefelPoint mean;
  double ambient_variance = 0.0;    // sigma^2 of the lifted normal
  double intrinsic_variance = 0.0;  // P, scalar variance on the manifold
};

enum class LogFailurePolicy {
  kHardError,   // raise kOutOfInjectivityRadius
  kSkipUpdate,  // keep the prediction and flag the epoch
};

struct FilterConfig {
  SystemModel model;
  std::shared_ptr<const EtaTable> eta;
  LogFailurePolicy log_failure = LogFailurePolicy::kHardError;

  void validate() const;
};

/// N(mu_0, sigma_0^2 id) with P = eta(sigma_0^2).
Belief initial_belief(const FilterConfig& config);

/// mean <- exp_M(tA) mean, sigma^2 <- sigma^2 + t nu^2, P <- eta(sigma^2).
/// Throws kVarianceOverflow when sigma^2 leaves the eta table.
Belief predict(const Belief& belief, double t, const FilterConfig& config);

struct UpdateResult {
  Belief belief;
  double gain = 0.0;
  bool skipped = false;
};

/// K = sigma^2 / (sigma^2 + xi^2) (0 when sigma^2 = 0), mean <- exp(K log(z)),
/// P <- (1 - K) P, sigma^2 <- eta^{-1}(P).
UpdateResult update(const Belief& predicted, const StiefelPoint& z, const FilterConfig& config);

struct FilterStep {
  double time = 0.0;
  Belief belief;
  double gain = 0.0;
  bool measured = false;
  bool skipped = false;
};

/// Predict across each gap, then update, for every measurement. The first
/// entry is `initial` at time 0; if `end_time` lies past the last measurement
/// a final prediction-only entry is appended.
std::vector<FilterStep> run_filter(const FilterConfig& config, const MeasurementSeries& measurements,
                                   const Belief& initial, std::optional<double> end_time = {});

}  // namespace stiefel
