#include <doctest.h>

#include <cmath>
#include <memory>

#include "stiefel/config.hpp"
#include "stiefel/ekf.hpp"
#include "stiefel/error.hpp"
#include "support.hpp"

using namespace stiefel;
using testing::sphere_point;

namespace {

std::shared_ptr<const EtaTable> sphere_eta() {
  static const auto table = std::make_shared<EtaTable>(build_eta_table({3, 1}, EtaGridSpec{}, 0, 1));
  return table;
}

std::shared_ptr<const EtaTable> st42_eta() {
  EtaGridSpec grid;
  grid.min = 1e-6;
  grid.max = 1.0;
  grid.nodes = 12;
  static const auto table = std::make_shared<EtaTable>(build_eta_table({4, 2}, grid, 2000, 1));
  return table;
}

FilterConfig sphere_filter(double nu2, double xi2, double sigma02) {
  auto model = sphere_reference_config().model(nu2, xi2);
  model.initial_variance = sigma02;
  return {model, sphere_eta(), LogFailurePolicy::kHardError};
}

}  // namespace

TEST_CASE("predict with t = 0 changes nothing") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  const auto b = initial_belief(cfg);
  const auto p = predict(b, 0.0, cfg);
  CHECK(p.mean.value() == b.mean.value());
  CHECK(p.ambient_variance == b.ambient_variance);
  CHECK(p.intrinsic_variance == b.intrinsic_variance);
}

TEST_CASE("predict hand arithmetic") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  const auto b = initial_belief(cfg);
  CHECK(b.intrinsic_variance == doctest::Approx(eta_closed_form_s2(0.1)).epsilon(1e-3));
  const auto p = predict(b, 0.05, cfg);
  CHECK(p.ambient_variance == doctest::Approx(0.15).epsilon(1e-15));
  const Matrix expected = discretize_drift(cfg.model.drift, 0.05) * b.mean.value();
  CHECK((p.mean.value() - expected).norm() < 1e-14);
}

TEST_CASE("predict with nu^2 = 0 only rotates") {
  const auto cfg = sphere_filter(0.0, 0.1, 0.1);
  const auto b = initial_belief(cfg);
  const auto p = predict(b, 0.3, cfg);
  CHECK(p.ambient_variance == b.ambient_variance);
  CHECK(p.intrinsic_variance == b.intrinsic_variance);
  CHECK((p.mean.value() - b.mean.value()).norm() > 0.01);
}

TEST_CASE("predict beyond the table is a variance overflow") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  try {
    predict(initial_belief(cfg), 5.0, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVarianceOverflow);
  }
}

TEST_CASE("gain 0.6 places the mean 60% along the geodesic") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const StiefelPoint z = project(pred.mean.value() + sphere_point(0.3, -0.2, 0.0));
  const auto r = update(pred, z, cfg);
  CHECK(r.gain == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(distance(pred.mean, r.belief.mean) == doctest::Approx(0.6 * distance(pred.mean, z)).epsilon(1e-10));
  CHECK(distance(r.belief.mean, z) == doctest::Approx(0.4 * distance(pred.mean, z)).epsilon(1e-10));
  CHECK(r.belief.intrinsic_variance == doctest::Approx(0.4 * pred.intrinsic_variance).epsilon(1e-14));
  CHECK(eta_forward(*cfg.eta, r.belief.ambient_variance) ==
        doctest::Approx(r.belief.intrinsic_variance).epsilon(1e-12));
}

TEST_CASE("gain on St(4,2)") {
  auto model = stiefel42_reference_config().model(1.0, 0.1);
  const FilterConfig cfg{model, st42_eta(), LogFailurePolicy::kHardError};
  Rng rng(61);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const auto z = exp_map(pred.mean, testing::random_tangent_up_to(pred.mean, 1.0, rng));
  const auto r = update(pred, z, cfg);
  CHECK(distance(pred.mean, r.belief.mean) == doctest::Approx(r.gain * distance(pred.mean, z)).epsilon(1e-8));
}

TEST_CASE("perfect measurement: xi^2 = 0") {
  const auto cfg = sphere_filter(1.0, 0.0, 0.1);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const StiefelPoint z(sphere_point(0, 1, 0));
  const auto r = update(pred, z, cfg);
  CHECK(r.gain == 1.0);
  CHECK(r.belief.mean.value() == z.value());
  CHECK(r.belief.intrinsic_variance == 0.0);
  CHECK(r.belief.ambient_variance == 0.0);
}

TEST_CASE("uninformative measurement: huge xi^2") {
  const auto cfg = sphere_filter(1.0, 1e12, 0.1);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const auto r = update(pred, StiefelPoint(sphere_point(0, 1, 0)), cfg);
  CHECK(r.gain < 1e-12);
  CHECK(distance(r.belief.mean, pred.mean) < 1e-12);
}

TEST_CASE("no uncertainty: K = 0 and pure prediction") {
  const auto cfg = sphere_filter(0.0, 0.1, 0.0);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const auto r = update(pred, StiefelPoint(sphere_point(0, 1, 0)), cfg);
  CHECK(r.gain == 0.0);
  CHECK(r.belief.mean.value() == pred.mean.value());
}

TEST_CASE("far measurement: hard error or skip") {
  auto cfg = sphere_filter(1.0, 0.1, 0.1);
  const auto pred = predict(initial_belief(cfg), 0.05, cfg);
  const StiefelPoint antipode(-pred.mean.value());
  try {
    update(pred, antipode, cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOutOfInjectivityRadius);
  }
  cfg.log_failure = LogFailurePolicy::kSkipUpdate;
  const auto r = update(pred, antipode, cfg);
  CHECK(r.skipped);
  CHECK(r.belief.mean.value() == pred.mean.value());
}

TEST_CASE("first-order agreement with the Euclidean Kalman update") {
  // Tiny variances and a measurement 1e-3 away: the geodesic step is the
  // straight-line Kalman step, brought back onto the sphere.
  const auto cfg = sphere_filter(1e-3, 1e-3, 1e-3);
  Rng rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pred = predict(initial_belief(cfg), 0.05, cfg);
    const auto v = tangent_project(pred.mean, rng.normal_matrix(3, 1));
    const auto z = exp_map(pred.mean, v.scaled(1e-3 / norm(v)));
    const auto r = update(pred, z, cfg);
    const Matrix euclid = project(pred.mean.value() + r.gain * (z.value() - pred.mean.value())).value();
    const double step = (z.value() - pred.mean.value()).norm();
    CHECK((r.belief.mean.value() - euclid).norm() / step < 1e-4);
    CHECK(r.gain == doctest::Approx(pred.ambient_variance / (pred.ambient_variance + 1e-3)));
  }
}

TEST_CASE("run_filter with no measurements is pure prediction") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  const auto track = run_filter(cfg, MeasurementSeries{}, initial_belief(cfg), 1.0);
  REQUIRE(track.size() == 2);
  CHECK(track[0].time == 0.0);
  CHECK(!track[1].measured);
  CHECK(track[1].belief.ambient_variance == doctest::Approx(1.1));
}

TEST_CASE("one measurement is one predict and one update") {
  const auto cfg = sphere_filter(1.0, 0.1, 0.1);
  MeasurementSeries m;
  m.times = {0.05};
  m.indices = {100};
  m.values = {project(sphere_point(0.2, 0.1, 1.0))};
  const auto track = run_filter(cfg, m, initial_belief(cfg));
  REQUIRE(track.size() == 2);
  const auto manual = update(predict(initial_belief(cfg), 0.05, cfg), m.values[0], cfg);
  CHECK(track[1].belief.mean.value() == manual.belief.mean.value());
  CHECK(track[1].gain == manual.gain);
  CHECK(track[1].measured);
}

TEST_CASE("filter beats raw measurements on the reference sphere problem") {
  const auto xc = sphere_reference_config();
  const FilterConfig cfg{xc.model(), sphere_eta(), LogFailurePolicy::kHardError};
  const auto idx = evenly_spaced_indices(xc.steps, xc.measurements);
  double meas = 0, filt = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(63, 0, seed));
    const auto traj = simulate_trajectory(cfg.model, xc.dt(), xc.steps, rng);
    const auto ms = simulate_measurements(traj, cfg.model, idx, rng);
    const auto track = run_filter(cfg, ms, initial_belief(cfg));
    for (std::size_t m = 0; m < idx.size(); ++m) {
      meas += distance(traj.projected[idx[m]], ms.values[m]);
      filt += distance(traj.projected[idx[m]], track[m + 1].belief.mean);
    }
  }
  CHECK(filt < meas);
}

TEST_CASE("filter config validation") {
  FilterConfig cfg = sphere_filter(1.0, 0.1, 0.1);
  cfg.eta = st42_eta();
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.eta = nullptr;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
