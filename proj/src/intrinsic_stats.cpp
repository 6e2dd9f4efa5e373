#include "stiefel/intrinsic_stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "stiefel/error.hpp"

namespace stiefel {

namespace {

void require_common_manifold(std::span<const StiefelPoint> points) {
  if (points.empty()) fail(ErrorCode::kInsufficientSample, "sample is empty");
  const ManifoldDims dims = points.front().dims();
  for (const auto& p : points) {
    if (p.dims() != dims) fail(ErrorCode::kDimension, "sample points live on different manifolds");
  }
}

}  // namespace

FrechetResult frechet_mean_detailed(std::span<const StiefelPoint> points,
                                    const FrechetOptions& options) {
  require_common_manifold(points);
  const auto count = static_cast<double>(points.size());

  Matrix arithmetic = Matrix::Zero(points.front().n(), points.front().k());
  for (const auto& p : points) arithmetic += p.value();
  StiefelPoint current = project(arithmetic / count);

  LogOptions ball;
  ball.radius = options.ball_radius;
  for (const auto& p : points) {
    try {
      (void)log_map(current, p, ball);
    } catch (const Error& e) {
      fail(ErrorCode::kDomain, std::string("sample is not contained in the averaging ball: ") + e.what());
    }
  }

  for (int iter = 0;; ++iter) {
    Matrix step = Matrix::Zero(current.n(), current.k());
    for (const auto& p : points) step += log_map(current, p).value();
    step /= count;
    const TangentVector mean_log(current, std::move(step));
    const double residual = norm(mean_log);
    if (residual < options.tolerance) return {current, residual, iter};
    if (iter >= options.max_iterations) {
      fail(ErrorCode::kMeanNotFound, "Frechet iteration did not converge in " +
                                         std::to_string(options.max_iterations) +
                                         " iterations (residual " + std::to_string(residual) + ")");
    }
    current = StiefelPoint::reorthonormalized(exp_map(current, mean_log).value());
  }
}

StiefelPoint frechet_mean(std::span<const StiefelPoint> points, const FrechetOptions& options) {
  return frechet_mean_detailed(points, options).mean;
}

IntrinsicMoments intrinsic_moments(std::span<const StiefelPoint> points,
                                   const FrechetOptions& options) {
  if (points.size() < 2) {
    fail(ErrorCode::kInsufficientSample, "intrinsic_moments needs at least two points");
  }
  StiefelPoint mean = frechet_mean(points, options);
  TangentBasis basis = tangent_basis(mean);
  const auto d = static_cast<Eigen::Index>(basis.vectors.size());
  Matrix cov = Matrix::Zero(d, d);
  for (const auto& p : points) {
    const Vector c = basis.coordinates(log_map(mean, p));
    cov.noalias() += c * c.transpose();
  }
  cov /= static_cast<double>(points.size() - 1);
  const double scalar = d > 0 ? cov.trace() / static_cast<double>(d) : 0.0;
  return {std::move(mean), std::move(basis), std::move(cov), scalar};
}

namespace {

// Integral over [0, upper] of phi^power times the density of the polar angle
// phi of pr(X), X ~ N(e_3, sigma2 I_3), up to the factor (2 pi)^{-1/2}.
double polar_angle_moment(double sigma2, int power, double upper) {
  const double sigma = std::sqrt(sigma2);
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  const double tail = std::exp(-0.5 / sigma2);
  // With t = cos(phi)/sigma the ratio Phi(t)/phi_N(t) is folded into
  // exp(-sin^2(phi) / (2 sigma2)) so nothing overflows for small sigma.
  auto integrand = [&](double phi) {
    const double t = std::cos(phi) / sigma;
    const double cdf = 0.5 * std::erfc(-t / std::numbers::sqrt2);
    const double s = std::sin(phi);
    const double bracket = t * tail + (1.0 + t * t) * sqrt_2pi * cdf * std::exp(-0.5 * s * s / sigma2);
    return std::pow(phi, power) * bracket * s;
  };
  using Quadrature = boost::math::quadrature::gauss_kronrod<double, 61>;
  constexpr unsigned kMaxDepth = 20;
  constexpr double kRelTol = 1e-12;
  // The mass concentrates in phi = O(sigma); integrate that window separately.
  const double split = std::min(upper, 40.0 * sigma);
  double total = Quadrature::integrate(integrand, 0.0, split, kMaxDepth, kRelTol);
  if (split < upper) {
    // Negligible next to the window; a relative tolerance would chase round-off here.
    constexpr unsigned kTailDepth = 6;
    total += Quadrature::integrate(integrand, split, upper, kTailDepth, kRelTol);
  }
  return total;
}

void require_positive_variance(double sigma2, const char* who) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorCode::kDomain, std::string(who) + " needs sigma2 > 0");
}

}  // namespace

double eta_closed_form_s2(double sigma2) {
  require_positive_variance(sigma2, "eta_closed_form_s2");
  // 2 pi (azimuth) * (2 pi)^{-3/2} / d with d = 2.
  return polar_angle_moment(sigma2, 2, std::numbers::pi) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
}

double eta_s2_within(double sigma2, double radius) {
  require_positive_variance(sigma2, "eta_s2_within");
  if (!(radius > 0.0)) fail(ErrorCode::kDomain, "eta_s2_within needs radius > 0");
  const double upper = std::min(radius, std::numbers::pi);
  return polar_angle_moment(sigma2, 2, upper) / polar_angle_moment(sigma2, 0, upper) / 2.0;
}

EtaEstimate eta_monte_carlo(ManifoldDims dims, double sigma2, std::size_t draws, Rng& rng,
                            const EtaMonteCarloOptions& options) {
  dims.validate();
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) fail(ErrorCode::kDomain, "eta_monte_carlo needs sigma2 > 0");
  if (draws < 2) fail(ErrorCode::kDomain, "eta_monte_carlo needs at least two draws");
  const int d = dims.dimension();
  if (d == 0) return {0.0, 0.0, draws, 0};

  const StiefelPoint mu = StiefelPoint::identity(dims.n, dims.k);
  const TangentBasis basis = tangent_basis(mu);
  const double sd = std::sqrt(sigma2);
  const auto budget = static_cast<std::size_t>(std::floor(options.max_rejection_fraction * static_cast<double>(draws)));

  EtaEstimate out;
  // Welford accumulation of the per-draw statistic sum_j <V,B_j>^2 / d.
  double mean = 0.0;
  double m2 = 0.0;
  while (out.accepted < draws) {
    const Matrix x = mu.value() + sd * rng.normal_matrix(dims.n, dims.k);
    double stat = 0.0;
    try {
      const TangentVector v = log_map(mu, project(x));
      stat = basis.coordinates(v).squaredNorm() / d;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOutOfInjectivityRadius && e.code() != ErrorCode::kSingularProjection) throw;
      if (++out.rejected > budget) {
        fail(ErrorCode::kUnreliableRegime,
             "more than " + std::to_string(options.max_rejection_fraction * 100.0) +
                 "% of draws fell outside the logarithm's safety radius at sigma2=" +
                 std::to_string(sigma2));
      }
      continue;
    }
    ++out.accepted;
    const double delta = stat - mean;
    mean += delta / static_cast<double>(out.accepted);
    m2 += delta * (stat - mean);
  }
  out.estimate = mean;
  const double var = m2 / static_cast<double>(out.accepted - 1);
  out.std_error = std::sqrt(var / static_cast<double>(out.accepted));
  return out;
}

}  // namespace stiefel
