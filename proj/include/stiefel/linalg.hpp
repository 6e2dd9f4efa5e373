#pragma once

// Dense small-matrix kernels shared by the geometry, statistics and filter code.
// Everything here is a pure function of its arguments.

#include <Eigen/Dense>

namespace stiefel {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Relative rank tolerance for the polar projection: the smallest singular
/// value must exceed this fraction of the largest.
inline constexpr double kPolarRankTolerance = 1e-12;

/// Throws kNonFinite if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

/// Matrix exponential by scaling and squaring with a degree-13 Pade core.
Matrix matrix_exp(const Matrix& a);

/// Principal matrix logarithm of a real orthogonal matrix, returned as the
/// exactly skew-symmetric part. Throws kDomain when an eigenvalue sits at -1
/// (the logarithm has no real principal branch there).
Matrix orthogonal_log(const Matrix& q);

/// Orthogonal factor U*V^T of the thin SVD X = U*D*V^T.
Matrix polar_orthogonal(const Matrix& x);

struct ThinQr {
  Matrix q;  // n x k, orthonormal columns
  Matrix r;  // k x k, upper triangular, nonnegative diagonal
};

/// Householder thin QR with the sign convention diag(R) >= 0.
ThinQr qr_thin(const Matrix& x);

/// Columns n-k.. of a deterministic orthonormal completion of span(X)^perp.
Matrix orthogonal_complement(const Matrix& x);

inline Matrix skew_part(const Matrix& m) { return 0.5 * (m - m.transpose()); }
inline Matrix sym_part(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace stiefel
