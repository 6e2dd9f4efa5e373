#pragma once

// Experiment harness: single filtered runs, SNR sweeps and eta-table builds.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "stiefel/config.hpp"

namespace stiefel {

const char* library_version();

struct RealizationResult {
  Trajectory trajectory;
  MeasurementSeries measurements;
  std::vector<FilterStep> track;
  std::vector<double> measurement_errors;  // per epoch, d(pr(X_t), Z)
  std::vector<double> filter_errors;       // per epoch, d(pr(X_t), mu^K)
  std::size_t skipped_updates = 0;

  double mean_measurement_error() const;
  double mean_filter_error() const;
};

/// One seeded realization: simulate, measure, filter, score. Errors are
/// geodesic distances under the canonical metric with the safety-radius guard
/// lifted (they are diagnostics, not filter steps).
RealizationResult run_realization(const ExperimentConfig& config, const FilterConfig& filter,
                                  std::uint64_t seed);

/// Loads the configured eta cache if it exists and matches the manifold;
/// otherwise builds the table (and writes the cache when a path is set).
std::shared_ptr<const EtaTable> resolve_eta_table(const ExperimentConfig& config);

struct SingleRunResult {
  RealizationResult realization;
  std::vector<std::string> files;
  std::string summary;
};

SingleRunResult run_single(const ExperimentConfig& config);

struct SweepCell {
  double process_noise = 0.0;
  double measurement_noise = 0.0;
  double snr_db = 0.0;      // 10 log10(nu^2 / xi^2)
  double snr_eta_db = 0.0;  // 10 log10(eta(nu^2) / xi^2), NaN beyond the table
  double measurement_error = 0.0;
  double measurement_se = 0.0;
  double filter_error = 0.0;
  double filter_se = 0.0;
  int completed = 0;
  int aborted = 0;
  std::size_t skipped_updates = 0;
  bool valid = true;
};

struct SnrSweepResult {
  ManifoldDims dims;
  std::vector<SweepCell> cells;  // row-major over (process noise, divisor)
  std::vector<std::string> files;
  std::string summary;
};

SnrSweepResult run_snr_sweep(const ExperimentConfig& config);
std::string sweep_csv(const SnrSweepResult& result, const ExperimentConfig& config);

struct EtaBuildResult {
  EtaTable table;
  std::vector<std::string> files;
  std::string summary;
};

EtaBuildResult run_eta_build(const ExperimentConfig& config);

}  // namespace stiefel
