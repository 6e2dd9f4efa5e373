#pragma once

// Declarative experiment configuration. JSON document, schema version 1; see
// docs/FORMATS.md. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "stiefel/ekf.hpp"
#include "stiefel/eta_table.hpp"
#include "stiefel/sde.hpp"

namespace stiefel {

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentMode { kSingleRun, kSnrSweep, kEtaTable };

struct SweepSettings {
  std::vector<double> process_noise_ladder{0.1, 0.2, 0.5, 1.0};
  /// xi^2 = nu^2 / divisor for every divisor.
  std::vector<double> snr_divisors{1.0, 2.8, 4.6, 6.4, 8.2, 10.0};
  double max_abort_fraction = 0.05;
};

struct EtaSettings {
  /// Cache file: loaded when present, written after a build otherwise.
  std::string table_path;
  EtaGridSpec grid;
  std::uint64_t draws = 200000;
  double max_rejection_fraction = 0.01;
  EtaMethod method = EtaMethod::kAuto;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  ExperimentMode mode = ExperimentMode::kSingleRun;
  ManifoldDims dims;
  Matrix drift;
  double process_noise = 1.0;
  double measurement_noise = 0.1;
  double initial_variance = 0.1;
  Matrix initial_mean;
  int steps = 2000;
  int measurements = 20;
  double duration = 1.0;
  int repetitions = 100;
  std::uint64_t seed = 1;
  std::string output_dir;
  int workers = 1;
  MeasurementNoiseMode noise_mode = MeasurementNoiseMode::kAmbient;
  LogFailurePolicy log_failure = LogFailurePolicy::kHardError;
  SweepSettings sweep;
  EtaSettings eta;

  void validate() const;
  SystemModel model() const;
  SystemModel model(double process_noise, double measurement_noise) const;
  double dt() const { return duration / steps; }
};

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Fully resolved configuration (every key, defaults included), compact JSON.
std::string config_to_json(const ExperimentConfig& config);

/// Replaces one top-level or dotted key ("eta.draws") with a JSON value and
/// re-validates.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& json_value);

/// Applies every override, then validates once.
void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides);

const char* to_string(ExperimentMode mode);
const char* to_string(MeasurementNoiseMode mode);
const char* to_string(LogFailurePolicy policy);
MeasurementNoiseMode parse_noise_mode(const std::string& text);
EtaMethod parse_eta_method(const std::string& text);

/// Parameter sets of the two reference experiments (S^2 and St(4,2)).
ExperimentConfig sphere_reference_config();
ExperimentConfig stiefel42_reference_config();

}  // namespace stiefel
