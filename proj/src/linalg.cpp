#include "stiefel/linalg.hpp"

#include <cmath>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "stiefel/error.hpp"

namespace stiefel {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) fail(ErrorCode::kNonFinite, std::string(what) + " has non-finite entries");
}

Matrix matrix_exp(const Matrix& a) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::kDimension, "matrix_exp needs a square matrix, got " + std::to_string(a.rows()) +
                                    "x" + std::to_string(a.cols()));
  }
  require_finite(a, "matrix_exp input");
  if (a.size() == 0) return a;
  return a.exp();
}

Matrix orthogonal_log(const Matrix& q) {
  if (q.rows() != q.cols()) fail(ErrorCode::kDimension, "orthogonal_log needs a square matrix");
  require_finite(q, "orthogonal_log input");
  const Eigen::Index m = q.rows();
  if (m == 0) return q;

  // q is normal, so its real Schur form is block diagonal up to roundoff: 1x1
  // blocks are +-1 and 2x2 blocks are plane rotations.
  Eigen::RealSchur<Matrix> schur(q);
  const Matrix& t = schur.matrixT();
  const Matrix& z = schur.matrixU();
  Matrix log_t = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < m;) {
    if (i + 1 < m && t(i + 1, i) != 0.0) {
      const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
      const double s = 0.5 * (t(i + 1, i) - t(i, i + 1));
      const double angle = std::atan2(s, c);
      log_t(i + 1, i) = angle;
      log_t(i, i + 1) = -angle;
      i += 2;
    } else {
      if (t(i, i) < 0.0) {
        fail(ErrorCode::kDomain, "orthogonal_log: eigenvalue -1 has no real principal logarithm");
      }
      ++i;
    }
  }
  return skew_part(z * log_t * z.transpose());
}

Matrix polar_orthogonal(const Matrix& x) {
  if (x.rows() < x.cols() || x.cols() == 0) {
    fail(ErrorCode::kDimension, "polar projection needs n >= k >= 1, got " +
                                    std::to_string(x.rows()) + "x" + std::to_string(x.cols()));
  }
  require_finite(x, "polar projection input");
  if (x.cols() == 1) {
    const double norm = x.norm();
    if (!(norm > 0.0)) fail(ErrorCode::kSingularProjection, "cannot project the zero vector");
    return x / norm;
  }
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > kPolarRankTolerance * sv(0))) {
    fail(ErrorCode::kSingularProjection, "matrix is rank deficient (sigma_min/sigma_max = " +
                                             std::to_string(sv(sv.size() - 1) / sv(0)) + ")");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

ThinQr qr_thin(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (n < k) {
    fail(ErrorCode::kDimension, "qr_thin needs n >= k, got " + std::to_string(n) + "x" +
                                    std::to_string(k));
  }
  require_finite(x, "qr_thin input");
  Eigen::HouseholderQR<Matrix> qr(x);
  ThinQr out;
  out.q = qr.householderQ() * Matrix::Identity(n, k);
  out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

Matrix orthogonal_complement(const Matrix& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (n < k) fail(ErrorCode::kDimension, "orthogonal_complement needs n >= k");
  if (n == k) return Matrix(n, 0);
  // Column-pivoted QR of the projector I - X X^T applied to e_1..e_n; the
  // leading n-k columns of Q span the complement of span(X).
  const Matrix projector = Matrix::Identity(n, n) - x * x.transpose();
  Eigen::ColPivHouseholderQR<Matrix> qr(projector);
  Matrix basis = qr.householderQ() * Matrix::Identity(n, n - k);
  // Fix signs so the largest-magnitude entry of every column is positive.
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) *= -1.0;
  }
  return basis;
}

}  // namespace stiefel
