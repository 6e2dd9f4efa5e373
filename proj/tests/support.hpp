#pragma once

#include "stiefel/geometry.hpp"
#include "stiefel/rng.hpp"

namespace testing {

using stiefel::Matrix;

inline stiefel::StiefelPoint random_point(int n, int k, stiefel::Rng& rng) {
  return stiefel::project(rng.normal_matrix(n, k));
}

// Tangent vector with canonical norm drawn uniformly in [0, max_norm].
inline stiefel::TangentVector random_tangent_up_to(const stiefel::StiefelPoint& x, double max_norm,
                                                   stiefel::Rng& rng) {
  auto v = stiefel::tangent_project(x, rng.normal_matrix(x.n(), x.k()));
  std::uniform_real_distribution<double> u(0.0, max_norm);
  return v.scaled(u(rng.engine()) / stiefel::norm(v));
}

inline Matrix sphere_point(double a, double b, double c) {
  Matrix m(3, 1);
  m << a, b, c;
  return m;
}

}  // namespace testing
