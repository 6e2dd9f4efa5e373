#include <doctest.h>

#include <cmath>

#include "stiefel/config.hpp"
#include "stiefel/error.hpp"
#include "stiefel/intrinsic_stats.hpp"
#include "stiefel/sde.hpp"

using namespace stiefel;

namespace {

SystemModel quiet(SystemModel m) {
  m.process_noise = 0.0;
  m.measurement_noise = 0.0;
  m.initial_variance = 0.0;
  return m;
}

}  // namespace

TEST_CASE("drift flow is a one-parameter group of rotations") {
  const auto model = stiefel42_reference_config().model();
  CHECK((discretize_drift(model.drift, 0.0) - Matrix::Identity(4, 4)).norm() < 1e-15);
  const Matrix ft = discretize_drift(model.drift, 0.3);
  const Matrix fs = discretize_drift(model.drift, 0.45);
  CHECK((discretize_drift(model.drift, 0.75) - ft * fs).norm() < 1e-10);
  const StiefelPoint moved(ft * model.initial_mean);
  CHECK(moved.orthonormality_error() < 1e-12);
}

TEST_CASE("noise-free trajectory is the orthogonal flow") {
  for (const auto& cfg : {sphere_reference_config(), stiefel42_reference_config()}) {
    const auto model = quiet(cfg.model());
    Rng rng(51);
    const auto traj = simulate_trajectory(model, cfg.dt(), cfg.steps, rng);
    REQUIRE(traj.states.size() == static_cast<std::size_t>(cfg.steps + 1));
    for (std::size_t j = 0; j < traj.states.size(); j += 97) {
      const Matrix exact = discretize_drift(model.drift, traj.times[j]) * model.initial_mean;
      CHECK((traj.states[j] - exact).norm() < 1e-10);
      CHECK(StiefelPoint(traj.states[j]).orthonormality_error() < 1e-10);
    }
  }
}

TEST_CASE("zero drift and zero noise keeps the state constant") {
  auto model = quiet(stiefel42_reference_config().model());
  model.drift.setZero();
  Rng rng(52);
  const auto traj = simulate_trajectory(model, 0.01, 50, rng);
  for (const auto& s : traj.states) CHECK(s == model.initial_mean);
}

TEST_CASE("ensemble variance grows as sigma_0^2 + t nu^2") {
  auto model = sphere_reference_config().model();
  model.drift.setZero();
  model.initial_variance = 0.1;
  model.process_noise = 1.0;
  const int runs = 10000;
  const int steps = 50;
  const double dt = 0.01;
  // Coordinate (0,0) at the last step, all runs.
  double sum = 0, sum_sq = 0;
  for (int r = 0; r < runs; ++r) {
    Rng rng(derive_seed(53, 0, r));
    const auto traj = simulate_trajectory(model, dt, steps, rng);
    const double x = traj.states.back()(0, 0) - model.initial_mean(0, 0);
    sum += x;
    sum_sq += x * x;
  }
  const double var = sum_sq / runs - (sum / runs) * (sum / runs);
  const double expected = 0.1 + steps * dt * 1.0;
  CHECK(std::abs(var - expected) < 3 * expected * std::sqrt(2.0 / runs));
}

TEST_CASE("exact measurements when xi^2 = 0") {
  auto model = sphere_reference_config().model();
  model.measurement_noise = 0.0;
  Rng rng(54);
  const auto traj = simulate_trajectory(model, 0.0005, 2000, rng);
  const auto idx = evenly_spaced_indices(2000, 20);
  const auto meas = simulate_measurements(traj, model, idx, rng);
  for (std::size_t m = 0; m < idx.size(); ++m) {
    CHECK(meas.values[m].value() == traj.projected[idx[m]].value());
  }
}

TEST_CASE("measurement schedule") {
  const auto idx = evenly_spaced_indices(2000, 20);
  REQUIRE(idx.size() == 20);
  CHECK(idx.front() == 100);
  CHECK(idx.back() == 2000);
  const auto cfg = sphere_reference_config();
  CHECK(idx.back() * cfg.dt() == doctest::Approx(1.0));
}

TEST_CASE("measurement scatter follows eta") {
  auto model = sphere_reference_config().model();
  model.measurement_noise = 0.1;
  model.process_noise = 0.0;
  model.initial_variance = 0.0;
  Rng rng(55);
  const auto traj = simulate_trajectory(model, 0.01, 1, rng);
  const std::vector<std::size_t> idx{1};
  std::vector<StiefelPoint> zs;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) zs.push_back(simulate_measurements(traj, model, idx, rng).values[0]);
  FrechetOptions wide;
  wide.ball_radius = kSafetyRadius;
  const auto m = intrinsic_moments(zs, wide);
  const double eta = eta_closed_form_s2(0.1);
  CHECK(std::abs(m.scalar_variance - eta) < 3 * 1.2 * eta / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("tangent measurement noise has the requested intrinsic variance") {
  auto model = quiet(stiefel42_reference_config().model());
  model.measurement_noise = 0.05;
  Rng rng(56);
  const auto traj = simulate_trajectory(model, 0.01, 1, rng);
  const std::vector<std::size_t> idx{1};
  double sum = 0;
  const int draws = 4000;
  for (int i = 0; i < draws; ++i) {
    const auto z = simulate_measurements(traj, model, idx, rng, MeasurementNoiseMode::kTangent).values[0];
    const double d = distance(traj.projected[1], z);
    sum += d * d;
  }
  // E ||eps||^2 = d xi^2 with d = 5.
  const double mean = sum / draws;
  CHECK(std::abs(mean - 0.25) < 3 * 0.25 * std::sqrt(2.0 / (5.0 * draws)));
}

TEST_CASE("simulation is reproducible from the seed") {
  const auto cfg = stiefel42_reference_config();
  Rng a(57), b(57);
  const auto ta = simulate_trajectory(cfg.model(), cfg.dt(), 200, a);
  const auto tb = simulate_trajectory(cfg.model(), cfg.dt(), 200, b);
  for (std::size_t j = 0; j < ta.states.size(); ++j) CHECK(ta.states[j] == tb.states[j]);
}

TEST_CASE("model validation") {
  auto model = sphere_reference_config().model();
  model.drift(0, 1) += 0.1;
  CHECK_THROWS_AS(model.validate(), Error);
  model = sphere_reference_config().model();
  model.process_noise = -1;
  CHECK_THROWS_AS(model.validate(), Error);
  model = sphere_reference_config().model();
  model.initial_mean(2, 0) = 2.0;
  CHECK_THROWS_AS(model.validate(), Error);

  Rng rng(58);
  const auto traj = simulate_trajectory(sphere_reference_config().model(), 0.01, 10, rng);
  const std::vector<std::size_t> bad{3, 3};
  CHECK_THROWS_AS(simulate_measurements(traj, sphere_reference_config().model(), bad, rng), Error);
}
