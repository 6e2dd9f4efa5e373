#include "stiefel/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "stiefel/error.hpp"

namespace stiefel {

namespace {

bool same_matrix(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all();
}

void require_same_base(const TangentVector& v, const TangentVector& w) {
  if (!same_matrix(v.base().value(), w.base().value())) {
    fail(ErrorCode::kBaseMismatch, "tangent vectors live at different base points");
  }
}

// Thin QR of P = (I - X X^T) V with a Q whose columns are orthonormal and
// orthogonal to span(X) even when P is rank deficient. Obtained from the
// Householder QR of [X P] (needs n >= 2k): P = Q2 R22 because X^T P = 0.
ThinQr complement_qr(const Matrix& x, const Matrix& p) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  Matrix stacked(n, 2 * k);
  stacked << x, p;
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Matrix q_full = qr.householderQ() * Matrix::Identity(n, 2 * k);
  ThinQr out;
  out.q = q_full.rightCols(k);
  out.r = qr.matrixQR().block(k, k, k, k).triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (out.r(i, i) < 0.0) {
      out.r.row(i) *= -1.0;
      out.q.col(i) *= -1.0;
    }
  }
  return out;
}

// Rotation generator G for the completion update V <- V diag(I, exp(G)).
// Solves S G + G S = -C with S = I/2 - B B^T / 12, the second-order
// correction from the Baker-Campbell-Hausdorff expansion of
// log(exp(L) exp(diag(0, G))); S = I/2 would give the plain G = -C step.
Matrix sylvester_step(const Matrix& b, const Matrix& c) {
  const Eigen::Index k = c.rows();
  const Matrix s = 0.5 * Matrix::Identity(k, k) - (b * b.transpose()) / 12.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s);
  const Matrix& u = eig.eigenvectors();
  const Vector& lambda = eig.eigenvalues();
  Matrix rhs = -(u.transpose() * c * u);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      const double denom = lambda(i) + lambda(j);
      // S stays positive definite while ||B|| < sqrt(6); fall back to the
      // plain step otherwise.
      rhs(i, j) = denom > 1e-3 ? rhs(i, j) / denom : rhs(i, j);
    }
  }
  return skew_part(u * rhs * u.transpose());
}

Matrix pad_rows(const Matrix& m, Eigen::Index rows) {
  Matrix out = Matrix::Zero(rows, m.cols());
  out.topRows(m.rows()) = m;
  return out;
}

}  // namespace

void ManifoldDims::validate() const {
  if (k < 1 || n < k) {
    fail(ErrorCode::kDimension,
         "St(n,k) needs n >= k >= 1, got n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
}

StiefelPoint::StiefelPoint(Matrix value, double tolerance) : value_(std::move(value)) {
  if (value_.cols() < 1 || value_.rows() < value_.cols()) {
    fail(ErrorCode::kDimension, "Stiefel point needs n >= k >= 1, got " +
                                    std::to_string(value_.rows()) + "x" +
                                    std::to_string(value_.cols()));
  }
  require_finite(value_, "Stiefel point");
  const double err = orthonormality_error();
  if (!(err <= tolerance)) {
    fail(ErrorCode::kNotOnManifold,
         "columns are not orthonormal (||X^T X - I|| = " + std::to_string(err) + ")");
  }
}

StiefelPoint StiefelPoint::identity(int n, int k) {
  ManifoldDims{n, k}.validate();
  return StiefelPoint(Matrix::Identity(n, k));
}

StiefelPoint StiefelPoint::reorthonormalized(const Matrix& value) {
  return StiefelPoint(polar_orthogonal(value));
}

double StiefelPoint::orthonormality_error() const {
  return (value_.transpose() * value_ - Matrix::Identity(value_.cols(), value_.cols())).norm();
}

TangentVector::TangentVector(StiefelPoint base, Matrix value, double tolerance)
    : base_(std::move(base)), value_(std::move(value)) {
  if (value_.rows() != base_.value().rows() || value_.cols() != base_.value().cols()) {
    fail(ErrorCode::kDimension, "tangent vector shape does not match its base point");
  }
  require_finite(value_, "tangent vector");
  const Matrix xtv = base_.value().transpose() * value_;
  const double err = (xtv + xtv.transpose()).norm();
  if (!(err <= tolerance * std::max(1.0, value_.norm()))) {
    fail(ErrorCode::kNotTangent,
         "V^T X + X^T V = " + std::to_string(err) + " exceeds tangency tolerance");
  }
}

TangentVector::TangentVector(StiefelPoint base, Matrix value, Unchecked)
    : base_(std::move(base)), value_(std::move(value)) {}

TangentVector TangentVector::zero(const StiefelPoint& base) {
  return TangentVector(base, Matrix::Zero(base.n(), base.k()), Unchecked{});
}

TangentVector TangentVector::scaled(double factor) const {
  return TangentVector(base_, factor * value_, Unchecked{});
}

TangentVector operator+(const TangentVector& a, const TangentVector& b) {
  require_same_base(a, b);
  return TangentVector(a.base_, a.value_ + b.value_, TangentVector::Unchecked{});
}

Vector TangentBasis::coordinates(const TangentVector& v) const {
  Vector c(static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t i = 0; i < vectors.size(); ++i) c(static_cast<Eigen::Index>(i)) = inner(v, vectors[i]);
  return c;
}

TangentVector TangentBasis::combine(const Vector& coordinates) const {
  if (coordinates.size() != static_cast<Eigen::Index>(vectors.size())) {
    fail(ErrorCode::kDimension, "coordinate vector length does not match basis size");
  }
  Matrix sum = Matrix::Zero(base.n(), base.k());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    sum += coordinates(static_cast<Eigen::Index>(i)) * vectors[i].value();
  }
  return TangentVector(base, std::move(sum));
}

StiefelPoint project(const Matrix& x) { return StiefelPoint(polar_orthogonal(x)); }

double inner(const TangentVector& v, const TangentVector& w) {
  require_same_base(v, w);
  const Matrix& x = v.base().value();
  // tr(V^T W) - 1/2 tr((X^T V)^T (X^T W))
  const Matrix xtv = x.transpose() * v.value();
  const Matrix xtw = x.transpose() * w.value();
  return (v.value().array() * w.value().array()).sum() - 0.5 * (xtv.array() * xtw.array()).sum();
}

double norm(const TangentVector& v) { return std::sqrt(std::max(0.0, inner(v, v))); }

namespace detail {

Matrix exp_map_general(const Matrix& x, const Matrix& v) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (n < 2 * k) {
    // Isometric embedding St(n,k) -> St(2k,k) by zero rows; geodesics of
    // points in the image stay in the image.
    return exp_map_general(pad_rows(x, 2 * k), pad_rows(v, 2 * k)).topRows(n);
  }
  const Matrix xtv = x.transpose() * v;
  const ThinQr qr = complement_qr(x, v - x * xtv);
  Matrix block(2 * k, 2 * k);
  block << xtv, -qr.r.transpose(), qr.r, Matrix::Zero(k, k);
  const Matrix e = matrix_exp(block);
  return x * e.topLeftCorner(k, k) + qr.q * e.bottomLeftCorner(k, k);
}

Matrix log_map_general(const Matrix& x, const Matrix& y, const LogOptions& options, int* iterations) {
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (n < 2 * k) {
    return log_map_general(pad_rows(x, 2 * k), pad_rows(y, 2 * k), options, iterations).topRows(n);
  }
  const Matrix m = x.transpose() * y;
  const ThinQr qr = complement_qr(x, y - x * m);
  const Matrix& nblock = qr.r;

  // Orthogonal completion of [M; N] to V in SO(2k).
  Matrix mn(2 * k, k);
  mn << m, nblock;
  Eigen::HouseholderQR<Matrix> completion(mn);
  const Matrix q_full = completion.householderQ() * Matrix::Identity(2 * k, 2 * k);
  const Matrix x0 = q_full.topRightCorner(k, k);
  const Matrix y0 = q_full.bottomRightCorner(k, k);

  // Procrustes preprocessing: rotate the completion so its lower-right block
  // is symmetric positive semidefinite, which starts the iteration close to
  // the fixed point.
  Eigen::JacobiSVD<Matrix> svd(y0, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix phi = svd.matrixV() * svd.matrixU().transpose();
  Matrix vmat(2 * k, 2 * k);
  vmat << m, x0 * phi, nblock, y0 * phi;
  if (vmat.determinant() < 0.0) {
    Matrix flip = Matrix::Identity(k, k);
    flip(k - 1, k - 1) = -1.0;
    phi = svd.matrixV() * flip * svd.matrixU().transpose();
    vmat.rightCols(k) << x0 * phi, y0 * phi;
  }

  Matrix log_v;
  int iter = 0;
  for (;; ++iter) {
    try {
      log_v = orthogonal_log(vmat);
    } catch (const Error&) {
      fail(ErrorCode::kOutOfInjectivityRadius, "logarithm hit the cut locus");
    }
    const Matrix c = log_v.bottomRightCorner(k, k);
    if (c.norm() < options.tolerance) break;
    if (iter >= options.max_iterations) {
      fail(ErrorCode::kOutOfInjectivityRadius,
           "logarithm did not converge in " + std::to_string(options.max_iterations) +
               " iterations (residual " + std::to_string(c.norm()) + ")");
    }
    vmat.rightCols(k) = vmat.rightCols(k) * matrix_exp(sylvester_step(log_v.bottomLeftCorner(k, k), c));
  }
  if (iterations != nullptr) *iterations = iter;
  return x * log_v.topLeftCorner(k, k) + qr.q * log_v.bottomLeftCorner(k, k);
}

}  // namespace detail

StiefelPoint exp_map(const StiefelPoint& x, const TangentVector& v) {
  if (!same_matrix(x.value(), v.base().value())) {
    fail(ErrorCode::kBaseMismatch, "exp_map: tangent vector is not attached to the base point");
  }
  if (x.k() == 1) {
    // Great circle: x cos|v| + v sin|v|/|v|.
    const double theta = v.value().norm();
    if (theta == 0.0) return x;
    Matrix y = std::cos(theta) * x.value() + (std::sin(theta) / theta) * v.value();
    return StiefelPoint(std::move(y));
  }
  if (v.value().isZero(0.0)) return x;
  return StiefelPoint(detail::exp_map_general(x.value(), v.value()));
}

TangentVector log_map(const StiefelPoint& x, const StiefelPoint& y, const LogOptions& options) {
  if (x.n() != y.n() || x.k() != y.k()) {
    fail(ErrorCode::kDimension, "log_map: points live on different manifolds");
  }
  Matrix v;
  if (x.k() == 1) {
    const Matrix& xv = x.value();
    const double c = std::clamp(xv.col(0).dot(y.value().col(0)), -1.0, 1.0);
    const Matrix w = y.value() - c * xv;
    const double s = w.norm();
    const double theta = std::atan2(s, c);
    if (s == 0.0 && c < 0.0) {
      fail(ErrorCode::kOutOfInjectivityRadius, "log_map: antipodal points");
    }
    v = s == 0.0 ? Matrix::Zero(xv.rows(), 1) : Matrix((theta / s) * w);
  } else {
    v = detail::log_map_general(x.value(), y.value(), options, nullptr);
  }
  TangentVector out(x, std::move(v));
  const double length = norm(out);
  if (!(length <= options.radius)) {
    fail(ErrorCode::kOutOfInjectivityRadius,
         "log_map: distance " + std::to_string(length) + " exceeds the safety radius " +
             std::to_string(options.radius));
  }
  return out;
}

double distance(const StiefelPoint& x, const StiefelPoint& y, const LogOptions& options) {
  return norm(log_map(x, y, options));
}

TangentBasis tangent_basis(const StiefelPoint& x) {
  const int n = x.n();
  const int k = x.k();
  TangentBasis basis{x, {}};
  basis.vectors.reserve(static_cast<std::size_t>(x.dims().dimension()));
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      Matrix omega = Matrix::Zero(k, k);
      omega(i, j) = 1.0;
      omega(j, i) = -1.0;
      basis.vectors.emplace_back(x, x.value() * omega);
    }
  }
  const Matrix perp = orthogonal_complement(x.value());
  for (int i = 0; i < n - k; ++i) {
    for (int j = 0; j < k; ++j) {
      Matrix b = Matrix::Zero(n, k);
      b.col(j) = perp.col(i);
      basis.vectors.emplace_back(x, std::move(b));
    }
  }
  return basis;
}

TangentVector random_tangent(const StiefelPoint& x, double scalar_variance, Rng& rng) {
  if (!(scalar_variance >= 0.0) || !std::isfinite(scalar_variance)) {
    fail(ErrorCode::kDomain, "random_tangent: variance must be finite and >= 0");
  }
  const TangentBasis basis = tangent_basis(x);
  const double sd = std::sqrt(scalar_variance);
  Vector c(static_cast<Eigen::Index>(basis.vectors.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = sd * rng.normal();
  return basis.combine(c);
}

TangentVector tangent_project(const StiefelPoint& x, const Matrix& w) {
  if (w.rows() != x.n() || w.cols() != x.k()) {
    fail(ErrorCode::kDimension, "tangent_project: shape mismatch");
  }
  const Matrix& xv = x.value();
  const Matrix xtw = xv.transpose() * w;
  return TangentVector(x, xv * skew_part(xtw) + (w - xv * xtw));
}

}  // namespace stiefel
