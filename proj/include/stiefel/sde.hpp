#pragma once

// Exact discretization of dX = A X dt + nu dB with antisymmetric A, and
// projected noisy measurements of the simulated state.

#include <cstddef>
#include <span>
#include <vector>

#include "stiefel/geometry.hpp"
#include "stiefel/rng.hpp"

namespace stiefel {

struct SystemModel {
  ManifoldDims dims;
  Matrix drift;                     // n x n, antisymmetric
  double process_noise = 0.0;       // nu^2
  double measurement_noise = 0.0;   // xi^2
  Matrix initial_mean;              // n x k, on St(n,k)
  double initial_variance = 0.0;    // sigma_0^2

  /// Throws kConfig / kDimension / kNotOnManifold on an inconsistent model.
  void validate() const;
  StiefelPoint initial_point() const { return StiefelPoint(initial_mean); }
};

enum class MeasurementNoiseMode {
  kAmbient,  // Z = pr(pr(X) + W), W ~ N(0, xi^2 I) in R^{n x k}
  kTangent,  // Z = exp_{pr(X)}(eps), eps ~ N(0, xi^2 id) on the tangent space
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<StiefelPoint> projected;
};

struct MeasurementSeries {
  std::vector<double> times;
  std::vector<std::size_t> indices;  // into the trajectory grid
  std::vector<StiefelPoint> values;
  std::size_t redraws = 0;
};

/// exp_M(t A).
Matrix discretize_drift(const Matrix& drift, double t);

/// X_0 ~ N(mu_0, sigma_0^2 id), X_j = exp_M(dt A) X_{j-1} + V_j with
/// V_j ~ N(0, dt nu^2 id). Throws kAbortedTrajectory naming the step when a
/// state loses rank.
Trajectory simulate_trajectory(const SystemModel& model, double dt, int steps, Rng& rng);

/// Measurements at trajectory grid indices. A draw that cannot be projected is
/// redrawn once, then kMeasurementFailed is raised.
MeasurementSeries simulate_measurements(const Trajectory& trajectory, const SystemModel& model,
                                        std::span<const std::size_t> indices, Rng& rng,
                                        MeasurementNoiseMode mode = MeasurementNoiseMode::kAmbient);

/// Grid indices round(j * steps / count), j = 1..count: `count` evenly spaced
/// epochs ending at the last grid point.
std::vector<std::size_t> evenly_spaced_indices(int steps, int count);

}  // namespace stiefel
