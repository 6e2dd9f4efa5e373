#include "stiefel/ekf.hpp"

#include <string>

#include "stiefel/error.hpp"

namespace stiefel {

void FilterConfig::validate() const {
  model.validate();
  if (!eta) fail(ErrorCode::kConfig, "filter needs an eta table");
  if (eta->manifold != model.dims) {
    fail(ErrorCode::kConfig, "eta table is for St(" + std::to_string(eta->manifold.n) + "," +
                                 std::to_string(eta->manifold.k) + "), model is St(" +
                                 std::to_string(model.dims.n) + "," + std::to_string(model.dims.k) + ")");
  }
}

namespace {

double eta_or_overflow(const EtaTable& table, double sigma2) {
  try {
    return eta_forward(table, sigma2);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kExtrapolation) throw;
    fail(ErrorCode::kVarianceOverflow,
         "ambient variance " + std::to_string(sigma2) + " is beyond the eta table (max " +
             std::to_string(table.grid.back()) + ")");
  }
}

}  // namespace

Belief initial_belief(const FilterConfig& config) {
  config.validate();
  const double s = config.model.initial_variance;
  return {config.model.initial_point(), s, eta_or_overflow(*config.eta, s)};
}

Belief predict(const Belief& belief, double t, const FilterConfig& config) {
  if (!(t >= 0.0)) fail(ErrorCode::kDomain, "predict needs t >= 0");
  if (t == 0.0) return belief;
  const Matrix rotated = discretize_drift(config.model.drift, t) * belief.mean.value();
  StiefelPoint mean(rotated);
  if (mean.orthonormality_error() > 1e-12) mean = StiefelPoint::reorthonormalized(rotated);
  const double s = belief.ambient_variance + t * config.model.process_noise;
  return {std::move(mean), s, eta_or_overflow(*config.eta, s)};
}

UpdateResult update(const Belief& predicted, const StiefelPoint& z, const FilterConfig& config) {
  const double s = predicted.ambient_variance;
  const double xi2 = config.model.measurement_noise;
  const double gain = s == 0.0 ? 0.0 : s / (s + xi2);

  if (gain == 0.0) return {predicted, 0.0, false};
  if (gain == 1.0) return {{z, 0.0, 0.0}, 1.0, false};

  TangentVector innovation = TangentVector::zero(predicted.mean);
  try {
    innovation = log_map(predicted.mean, z);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kOutOfInjectivityRadius ||
        config.log_failure == LogFailurePolicy::kHardError) {
      throw;
    }
    return {predicted, 0.0, true};
  }

  StiefelPoint mean = exp_map(predicted.mean, innovation.scaled(gain));
  if (mean.orthonormality_error() > 1e-12) mean = StiefelPoint::reorthonormalized(mean.value());
  const double p = (1.0 - gain) * predicted.intrinsic_variance;
  const double sigma2 = eta_inverse(*config.eta, p);
  return {{std::move(mean), sigma2, p}, gain, false};
}

std::vector<FilterStep> run_filter(const FilterConfig& config, const MeasurementSeries& measurements,
                                   const Belief& initial, std::optional<double> end_time) {
  config.validate();
  if (measurements.times.size() != measurements.values.size()) {
    fail(ErrorCode::kDimension, "measurement times and values differ in length");
  }
  std::vector<FilterStep> track;
  track.reserve(measurements.times.size() + 2);
  track.push_back({0.0, initial, 0.0, false, false});
  Belief current = initial;
  double now = 0.0;
  for (std::size_t m = 0; m < measurements.times.size(); ++m) {
    const double t = measurements.times[m];
    if (m > 0 ? !(t > now) : !(t >= now)) {
      fail(ErrorCode::kDomain, "measurement times must be strictly increasing and >= 0");
    }
    const Belief predicted = predict(current, t - now, config);
    UpdateResult result = update(predicted, measurements.values[m], config);
    current = std::move(result.belief);
    now = t;
    track.push_back({t, current, result.gain, true, result.skipped});
  }
  if (end_time && *end_time > now) {
    current = predict(current, *end_time - now, config);
    track.push_back({*end_time, current, 0.0, false, false});
  }
  return track;
}

}  // namespace stiefel
