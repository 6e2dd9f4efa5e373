#include "stiefel/sde.hpp"

#include <cmath>
#include <string>

#include "stiefel/error.hpp"

namespace stiefel {

void SystemModel::validate() const {
  dims.validate();
  if (drift.rows() != dims.n || drift.cols() != dims.n) {
    fail(ErrorCode::kDimension, "drift must be n x n");
  }
  require_finite(drift, "drift");
  const double asym = (drift + drift.transpose()).norm();
  if (!(asym < 1e-10)) {
    fail(ErrorCode::kConfig, "drift is not antisymmetric (||A + A^T|| = " + std::to_string(asym) + ")");
  }
  for (double v : {process_noise, measurement_noise, initial_variance}) {
    if (!(v >= 0.0) || !std::isfinite(v)) fail(ErrorCode::kConfig, "variances must be finite and >= 0");
  }
  if (initial_mean.rows() != dims.n || initial_mean.cols() != dims.k) {
    fail(ErrorCode::kDimension, "initial mean must be n x k");
  }
  (void)initial_point();
}

Matrix discretize_drift(const Matrix& drift, double t) { return matrix_exp(t * drift); }

Trajectory simulate_trajectory(const SystemModel& model, double dt, int steps, Rng& rng) {
  model.validate();
  if (!(dt > 0.0)) fail(ErrorCode::kDomain, "simulate_trajectory needs dt > 0");
  if (steps < 1) fail(ErrorCode::kDomain, "simulate_trajectory needs steps >= 1");
  const int n = model.dims.n;
  const int k = model.dims.k;
  const Matrix transition = discretize_drift(model.drift, dt);
  const double step_sd = std::sqrt(dt * model.process_noise);

  Trajectory traj;
  const auto count = static_cast<std::size_t>(steps) + 1;
  traj.times.reserve(count);
  traj.states.reserve(count);
  traj.projected.reserve(count);

  Matrix state = model.initial_mean + std::sqrt(model.initial_variance) * rng.normal_matrix(n, k);
  for (int j = 0; j <= steps; ++j) {
    if (j > 0) state = transition * state + step_sd * rng.normal_matrix(n, k);
    try {
      traj.projected.push_back(project(state));
    } catch (const Error& e) {
      fail(ErrorCode::kAbortedTrajectory, "step " + std::to_string(j) + ": " + e.what());
    }
    traj.times.push_back(static_cast<double>(j) * dt);
    traj.states.push_back(state);
  }
  return traj;
}

MeasurementSeries simulate_measurements(const Trajectory& trajectory, const SystemModel& model,
                                        std::span<const std::size_t> indices, Rng& rng,
                                        MeasurementNoiseMode mode) {
  model.validate();
  const double sd = std::sqrt(model.measurement_noise);
  MeasurementSeries out;
  for (std::size_t idx : indices) {
    if (idx >= trajectory.projected.size()) {
      fail(ErrorCode::kDomain, "measurement index " + std::to_string(idx) + " is off the trajectory grid");
    }
    if (!out.indices.empty() && idx <= out.indices.back()) {
      fail(ErrorCode::kDomain, "measurement indices must be strictly increasing");
    }
    const StiefelPoint& truth = trajectory.projected[idx];
    if (sd == 0.0) {
      out.values.push_back(truth);
      out.indices.push_back(idx);
      out.times.push_back(trajectory.times[idx]);
      continue;
    }
    for (int attempt = 0;; ++attempt) {
      try {
        if (mode == MeasurementNoiseMode::kAmbient) {
          out.values.push_back(project(truth.value() + sd * rng.normal_matrix(model.dims.n, model.dims.k)));
        } else {
          out.values.push_back(exp_map(truth, random_tangent(truth, model.measurement_noise, rng)));
        }
        break;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kSingularProjection || attempt >= 1) {
          fail(ErrorCode::kMeasurementFailed,
               "measurement at index " + std::to_string(idx) + ": " + e.what());
        }
        ++out.redraws;
      }
    }
    out.indices.push_back(idx);
    out.times.push_back(trajectory.times[idx]);
  }
  return out;
}

std::vector<std::size_t> evenly_spaced_indices(int steps, int count) {
  if (steps < 1 || count < 0 || count > steps) {
    fail(ErrorCode::kDomain, "evenly_spaced_indices needs 0 <= count <= steps");
  }
  std::vector<std::size_t> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int j = 1; j <= count; ++j) {
    out.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(j) * steps / count)));
  }
  return out;
}

}  // namespace stiefel
