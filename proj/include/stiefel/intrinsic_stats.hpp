#pragma once

// Intrinsic statistics of points on St(n,k): Frechet mean, tangent-space
// sample covariance, and the variance-transfer function eta mapping the
// ambient isotropic variance of a normal to the intrinsic scalar variance of
// its polar projection.

#include <cstddef>
#include <span>

#include "stiefel/geometry.hpp"

namespace stiefel {

struct FrechetOptions {
  int max_iterations = 200;
  /// Stop when ||sum_i log_Y(Y_i)|| / N drops below this.
  double tolerance = 1e-9;
  /// Every point must lie within this distance of the initial guess.
  double ball_radius = 0.5 * kSafetyRadius;
};

struct FrechetResult {
  StiefelPoint mean;
  double residual;
  int iterations;
};

/// Fixed-point iteration Y <- exp_Y(mean_i log_Y(Y_i)) started from the polar
/// projection of the arithmetic mean.
FrechetResult frechet_mean_detailed(std::span<const StiefelPoint> points,
                                    const FrechetOptions& options = {});
StiefelPoint frechet_mean(std::span<const StiefelPoint> points, const FrechetOptions& options = {});

struct IntrinsicMoments {
  StiefelPoint mean;
  TangentBasis basis;
  Matrix covariance;       // d x d in `basis`
  double scalar_variance;  // trace(covariance) / d
};

IntrinsicMoments intrinsic_moments(std::span<const StiefelPoint> points,
                                   const FrechetOptions& options = {});

/// eta on the 2-sphere by adaptive Gauss-Kronrod quadrature of the projected
/// normal density. Divided by the manifold dimension 2 so it matches the Monte
/// Carlo estimator.
double eta_closed_form_s2(double sigma2);

/// The same quantity for the projected normal conditioned on lying within
/// geodesic distance `radius` of the mean: what eta_monte_carlo estimates
/// when it redraws samples beyond the safety radius.
double eta_s2_within(double sigma2, double radius = kSafetyRadius);

struct EtaEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};

struct EtaMonteCarloOptions {
  /// Draws whose logarithm fails (beyond the safety radius) are redrawn; more
  /// than this fraction of `draws` raises kUnreliableRegime.
  double max_rejection_fraction = 0.01;
};

/// Monte Carlo eta: draw X ~ N(I_{n,k}, sigma2 id), project, take the log at
/// I_{n,k} and average sum_j <V, B_j>^2 / d over `draws` accepted samples.
EtaEstimate eta_monte_carlo(ManifoldDims dims, double sigma2, std::size_t draws, Rng& rng,
                            const EtaMonteCarloOptions& options = {});

}  // namespace stiefel
