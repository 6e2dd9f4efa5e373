#pragma once

// The Stiefel manifold St(n,k) = { X in R^{n x k} : X^T X = I_k } under the
// canonical metric <V,W>_X = tr(V^T (I - X X^T / 2) W).

#include <cmath>
#include <numbers>
#include <vector>

#include "stiefel/linalg.hpp"
#include "stiefel/rng.hpp"

namespace stiefel {

inline constexpr double kPointTolerance = 1e-8;
inline constexpr double kTangentTolerance = 1e-8;

/// Lower bound on the injectivity radius under the canonical metric. The
/// logarithm refuses to return anything longer than this.
inline const double kSafetyRadius = std::sqrt(4.0 / 5.0) * std::numbers::pi;

struct ManifoldDims {
  int n = 0;
  int k = 0;

  /// nk - k(k+1)/2
  int dimension() const { return n * k - k * (k + 1) / 2; }
  void validate() const;
  friend bool operator==(const ManifoldDims&, const ManifoldDims&) = default;
};

class StiefelPoint {
 public:
  /// Validates X^T X = I_k within `tolerance` (Frobenius).
  explicit StiefelPoint(Matrix value, double tolerance = kPointTolerance);

  /// The n x k matrix with I_k on top and zeros below.
  static StiefelPoint identity(int n, int k);

  /// Re-orthonormalizes with one polar projection before validating; for
  /// points that went through long chains of exponentials.
  static StiefelPoint reorthonormalized(const Matrix& value);

  int n() const { return static_cast<int>(value_.rows()); }
  int k() const { return static_cast<int>(value_.cols()); }
  ManifoldDims dims() const { return {n(), k()}; }
  const Matrix& value() const { return value_; }

  /// ||X^T X - I_k||_F
  double orthonormality_error() const;

 private:
  Matrix value_;
};

class TangentVector {
 public:
  /// Validates V^T X + X^T V = 0 within `tolerance`.
  TangentVector(StiefelPoint base, Matrix value, double tolerance = kTangentTolerance);

  static TangentVector zero(const StiefelPoint& base);

  const StiefelPoint& base() const { return base_; }
  const Matrix& value() const { return value_; }

  TangentVector scaled(double factor) const;

 private:
  struct Unchecked {};
  TangentVector(StiefelPoint base, Matrix value, Unchecked);
  friend TangentVector operator+(const TangentVector&, const TangentVector&);

  StiefelPoint base_;
  Matrix value_;
};

TangentVector operator+(const TangentVector& a, const TangentVector& b);

/// Orthonormal basis of T_X St under the canonical metric. Order: the
/// k(k-1)/2 directions X*Omega_ij (Omega_ij = e_i e_j^T - e_j e_i^T, i < j),
/// then the (n-k)k directions Xperp * E_ij in row-major (i, j) order.
struct TangentBasis {
  StiefelPoint base;
  std::vector<TangentVector> vectors;

  /// Coefficients <v, B_i> in basis order.
  Vector coordinates(const TangentVector& v) const;
  TangentVector combine(const Vector& coordinates) const;
};

StiefelPoint project(const Matrix& x);

double inner(const TangentVector& v, const TangentVector& w);
double norm(const TangentVector& v);

StiefelPoint exp_map(const StiefelPoint& x, const TangentVector& v);

struct LogOptions {
  int max_iterations = 100;
  double tolerance = 1e-10;
  double radius = kSafetyRadius;
};

/// Riemannian logarithm. Throws kOutOfInjectivityRadius when the iteration
/// does not converge or the result is longer than options.radius.
TangentVector log_map(const StiefelPoint& x, const StiefelPoint& y, const LogOptions& options = {});

double distance(const StiefelPoint& x, const StiefelPoint& y, const LogOptions& options = {});

TangentBasis tangent_basis(const StiefelPoint& x);

TangentVector random_tangent(const StiefelPoint& x, double scalar_variance, Rng& rng);

/// Orthogonal projection of an ambient matrix onto T_X St:
/// X skew(X^T W) + (I - X X^T) W.
TangentVector tangent_project(const StiefelPoint& x, const Matrix& w);

namespace detail {
// The general matrix-algebraic routes, bypassing the closed-form sphere
// shortcuts used for k = 1. Exposed for cross-checking.
Matrix exp_map_general(const Matrix& x, const Matrix& v);
Matrix log_map_general(const Matrix& x, const Matrix& y, const LogOptions& options, int* iterations);
}  // namespace detail

}  // namespace stiefel
