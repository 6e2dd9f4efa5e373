#include "stiefel/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stiefel/error.hpp"

namespace stiefel {

using nlohmann::json;

const char* to_string(ExperimentMode mode) {
  switch (mode) {
    case ExperimentMode::kSingleRun: return "single-run";
    case ExperimentMode::kSnrSweep: return "snr-sweep";
    case ExperimentMode::kEtaTable: return "eta-table";
  }
  return "?";
}

const char* to_string(MeasurementNoiseMode mode) {
  return mode == MeasurementNoiseMode::kAmbient ? "ambient-noise" : "tangent-noise";
}

const char* to_string(LogFailurePolicy policy) {
  return policy == LogFailurePolicy::kHardError ? "hard-error" : "skip-update";
}

MeasurementNoiseMode parse_noise_mode(const std::string& text) {
  if (text == "ambient-noise") return MeasurementNoiseMode::kAmbient;
  if (text == "tangent-noise") return MeasurementNoiseMode::kTangent;
  fail(ErrorCode::kConfig, "noise mode must be ambient-noise or tangent-noise, got '" + text + "'");
}

namespace {

const char* to_string(EtaMethod m) {
  switch (m) {
    case EtaMethod::kAuto: return "auto";
    case EtaMethod::kQuadrature: return "quadrature";
    case EtaMethod::kMonteCarlo: return "monte-carlo";
  }
  return "?";
}

ExperimentMode parse_mode(const std::string& s) {
  if (s == "single-run") return ExperimentMode::kSingleRun;
  if (s == "snr-sweep") return ExperimentMode::kSnrSweep;
  if (s == "eta-table") return ExperimentMode::kEtaTable;
  fail(ErrorCode::kConfig, "mode must be single-run, snr-sweep or eta-table, got '" + s + "'");
}

LogFailurePolicy parse_policy(const std::string& s) {
  if (s == "hard-error") return LogFailurePolicy::kHardError;
  if (s == "skip-update") return LogFailurePolicy::kSkipUpdate;
  fail(ErrorCode::kConfig, "log_failure_policy must be hard-error or skip-update, got '" + s + "'");
}

EtaMethod parse_method(const std::string& s) {
  if (s == "auto") return EtaMethod::kAuto;
  if (s == "quadrature") return EtaMethod::kQuadrature;
  if (s == "monte-carlo") return EtaMethod::kMonteCarlo;
  fail(ErrorCode::kConfig, "eta.method must be auto, quadrature or monte-carlo, got '" + s + "'");
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) fail(ErrorCode::kConfig, where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) fail(ErrorCode::kConfig, "unknown key '" + where + key + "'");
  }
}

Matrix matrix_from_json(const json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail(ErrorCode::kConfig, name + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      fail(ErrorCode::kConfig, name + " rows must all have the same length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(row);
  }
  return rows;
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

json to_json_value(const ExperimentConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  j["mode"] = to_string(c.mode);
  j["manifold"] = {{"n", c.dims.n}, {"k", c.dims.k}};
  j["drift"] = matrix_to_json(c.drift);
  j["process_noise"] = c.process_noise;
  j["measurement_noise"] = c.measurement_noise;
  j["initial_variance"] = c.initial_variance;
  j["initial_mean"] = matrix_to_json(c.initial_mean);
  j["steps"] = c.steps;
  j["measurements"] = c.measurements;
  j["duration"] = c.duration;
  j["repetitions"] = c.repetitions;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["workers"] = c.workers;
  j["noise_mode"] = to_string(c.noise_mode);
  j["log_failure_policy"] = to_string(c.log_failure);
  j["sweep"] = {{"process_noise_ladder", c.sweep.process_noise_ladder},
                {"snr_divisors", c.sweep.snr_divisors},
                {"max_abort_fraction", c.sweep.max_abort_fraction}};
  j["eta"] = {{"table", c.eta.table_path},
              {"grid_min", c.eta.grid.min},
              {"grid_max", c.eta.grid.max},
              {"nodes", c.eta.grid.nodes},
              {"log_spaced", c.eta.grid.log_spaced},
              {"draws", c.eta.draws},
              {"max_rejection_fraction", c.eta.max_rejection_fraction},
              {"method", to_string(c.eta.method)}};
  return j;
}

ExperimentConfig from_json_value(const json& j) {
  reject_unknown(j,
                 {"schema_version", "mode", "manifold", "drift", "process_noise", "measurement_noise",
                  "initial_variance", "initial_mean", "steps", "measurements", "duration", "repetitions",
                  "seed", "output_dir", "workers", "noise_mode", "log_failure_policy", "sweep", "eta"},
                 "");
  ExperimentConfig c;
  read_opt(j, "schema_version", c.schema_version);
  if (c.schema_version != kConfigSchemaVersion) {
    fail(ErrorCode::kConfig, "unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (j.contains("mode")) c.mode = parse_mode(j.at("mode").get<std::string>());
  if (!j.contains("manifold") || !j.contains("drift") || !j.contains("initial_mean")) {
    fail(ErrorCode::kConfig, "manifold, drift and initial_mean are required");
  }
  const json& man = j.at("manifold");
  reject_unknown(man, {"n", "k"}, "manifold.");
  c.dims = {man.at("n").get<int>(), man.at("k").get<int>()};
  c.drift = matrix_from_json(j.at("drift"), "drift");
  c.initial_mean = matrix_from_json(j.at("initial_mean"), "initial_mean");
  read_opt(j, "process_noise", c.process_noise);
  read_opt(j, "measurement_noise", c.measurement_noise);
  read_opt(j, "initial_variance", c.initial_variance);
  read_opt(j, "steps", c.steps);
  read_opt(j, "measurements", c.measurements);
  read_opt(j, "duration", c.duration);
  read_opt(j, "repetitions", c.repetitions);
  read_opt(j, "seed", c.seed);
  read_opt(j, "output_dir", c.output_dir);
  read_opt(j, "workers", c.workers);
  if (j.contains("noise_mode")) c.noise_mode = parse_noise_mode(j.at("noise_mode").get<std::string>());
  if (j.contains("log_failure_policy")) c.log_failure = parse_policy(j.at("log_failure_policy").get<std::string>());
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    reject_unknown(s, {"process_noise_ladder", "snr_divisors", "max_abort_fraction"}, "sweep.");
    read_opt(s, "process_noise_ladder", c.sweep.process_noise_ladder);
    read_opt(s, "snr_divisors", c.sweep.snr_divisors);
    read_opt(s, "max_abort_fraction", c.sweep.max_abort_fraction);
  }
  if (j.contains("eta")) {
    const json& e = j.at("eta");
    reject_unknown(e,
                   {"table", "grid_min", "grid_max", "nodes", "log_spaced", "draws",
                    "max_rejection_fraction", "method"},
                   "eta.");
    read_opt(e, "table", c.eta.table_path);
    read_opt(e, "grid_min", c.eta.grid.min);
    read_opt(e, "grid_max", c.eta.grid.max);
    read_opt(e, "nodes", c.eta.grid.nodes);
    read_opt(e, "log_spaced", c.eta.grid.log_spaced);
    read_opt(e, "draws", c.eta.draws);
    read_opt(e, "max_rejection_fraction", c.eta.max_rejection_fraction);
    if (e.contains("method")) c.eta.method = parse_method(e.at("method").get<std::string>());
  }
  c.validate();
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  dims.validate();
  if (drift.rows() != dims.n || drift.cols() != dims.n) fail(ErrorCode::kConfig, "drift must be n x n");
  if (initial_mean.rows() != dims.n || initial_mean.cols() != dims.k) {
    fail(ErrorCode::kConfig, "initial_mean must be n x k");
  }
  (void)model();
  if (steps < 1) fail(ErrorCode::kConfig, "steps must be >= 1");
  if (measurements < 0 || measurements > steps) fail(ErrorCode::kConfig, "measurements must lie in [0, steps]");
  if (!(duration > 0.0)) fail(ErrorCode::kConfig, "duration must be > 0");
  if (repetitions < 1) fail(ErrorCode::kConfig, "repetitions must be >= 1");
  if (workers < 1) fail(ErrorCode::kConfig, "workers must be >= 1");
  for (double v : sweep.process_noise_ladder) {
    if (!(v > 0.0)) fail(ErrorCode::kConfig, "sweep.process_noise_ladder entries must be > 0");
  }
  for (double d : sweep.snr_divisors) {
    if (!(d > 0.0)) fail(ErrorCode::kConfig, "sweep.snr_divisors entries must be > 0");
  }
  if (!(sweep.max_abort_fraction >= 0.0 && sweep.max_abort_fraction <= 1.0)) {
    fail(ErrorCode::kConfig, "sweep.max_abort_fraction must lie in [0, 1]");
  }
  (void)eta.grid.nodes_vector();
  if (eta.draws < 2) fail(ErrorCode::kConfig, "eta.draws must be >= 2");
  if (!(eta.max_rejection_fraction >= 0.0 && eta.max_rejection_fraction <= 1.0)) {
    fail(ErrorCode::kConfig, "eta.max_rejection_fraction must lie in [0, 1]");
  }
}

SystemModel ExperimentConfig::model() const { return model(process_noise, measurement_noise); }

SystemModel ExperimentConfig::model(double nu2, double xi2) const {
  SystemModel m{dims, drift, nu2, xi2, initial_mean, initial_variance};
  m.validate();
  return m;
}

ExperimentConfig parse_config(const std::string& json_text) {
  try {
    return from_json_value(json::parse(json_text));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("malformed config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const ExperimentConfig& config) { return to_json_value(config).dump(); }

void apply_overrides(ExperimentConfig& config,
                     const std::vector<std::pair<std::string, std::string>>& overrides) {
  json j = to_json_value(config);
  for (const auto& [key, json_value] : overrides) {
    try {
      std::string path = key;
      std::replace(path.begin(), path.end(), '.', '/');
      const json::json_pointer ptr("/" + path);
      if (!j.contains(ptr)) fail(ErrorCode::kConfig, "unknown key '" + key + "'");
      j[ptr] = json::parse(json_value);
    } catch (const json::exception& e) {
      fail(ErrorCode::kConfig, "override " + key + ": " + e.what());
    }
  }
  config = from_json_value(j);
}

void apply_override(ExperimentConfig& config, const std::string& key, const std::string& json_value) {
  apply_overrides(config, {{key, json_value}});
}

ExperimentConfig sphere_reference_config() {
  ExperimentConfig c;
  c.dims = {3, 1};
  c.drift.resize(3, 3);
  c.drift << 0.0, 0.263, 0.036,
             -0.263, 0.0, -0.653,
             -0.036, 0.653, 0.0;
  c.initial_mean.resize(3, 1);
  c.initial_mean << 0.0, 0.0, 1.0;
  c.process_noise = 1.0;
  c.measurement_noise = 0.1;
  c.initial_variance = 0.1;
  c.validate();
  return c;
}

ExperimentConfig stiefel42_reference_config() {
  ExperimentConfig c;
  c.dims = {4, 2};
  c.drift.resize(4, 4);
  c.drift << 0.0, 0.173, 0.267, -0.288,
             -0.173, 0.0, -0.279, 0.122,
             -0.267, 0.279, 0.0, 0.316,
             0.288, -0.122, -0.316, 0.0;
  c.initial_mean = Matrix::Identity(4, 2);
  c.process_noise = 1.0;
  c.measurement_noise = 0.1;
  c.initial_variance = 0.1;
  c.validate();
  return c;
}

EtaMethod parse_eta_method(const std::string& text) { return parse_method(text); }

}  // namespace stiefel
