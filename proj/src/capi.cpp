#include "stiefel_ekf.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include "stiefel/error.hpp"
#include "stiefel/experiment.hpp"

using namespace stiefel;

struct sekf_config {
  ExperimentConfig config;
  std::string json;
};

struct sekf_report {
  std::string summary;
  std::vector<std::string> files;
  std::vector<SweepCell> cells;
  bool has_errors = false;
  double measurement_error = 0.0;
  double filter_error = 0.0;
};

struct sekf_point {
  StiefelPoint point;
};

struct sekf_eta_table {
  std::shared_ptr<const EtaTable> table;
};

struct sekf_filter {
  FilterConfig config;
  Belief belief;
  double gain = 0.0;
  bool skipped = false;
};

namespace {

thread_local std::string last_error;

sekf_status set_error(sekf_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <typename F>
sekf_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return SEKF_OK;
  } catch (const Error& e) {
    return set_error(static_cast<sekf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(SEKF_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(SEKF_INTERNAL, e.what());
  } catch (...) {
    return set_error(SEKF_INTERNAL, "unknown exception");
  }
}

Matrix from_row_major(int rows, int cols, const double* data) {
  if (rows <= 0 || cols <= 0) fail(ErrorCode::kDimension, "matrix dimensions must be positive");
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[static_cast<std::size_t>(i) * cols + j];
  return m;
}

void to_row_major(const Matrix& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

sekf_report* make_report() { return new sekf_report(); }

}  // namespace

extern "C" {

const char* sekf_version(void) { return library_version(); }

const char* sekf_status_string(sekf_status status) {
  if (status == SEKF_INVALID_ARGUMENT) return "invalid-argument";
  if (status < SEKF_OK || status > SEKF_INTERNAL) return "unknown";
  return to_string(static_cast<ErrorCode>(status));
}

const char* sekf_last_error(void) { return last_error.c_str(); }

sekf_status sekf_config_load(const char* path, sekf_config** out) {
  if (!path || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new sekf_config{load_config(path), {}}; });
}

sekf_status sekf_config_parse(const char* json, sekf_config** out) {
  if (!json || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new sekf_config{parse_config(json), {}}; });
}

sekf_status sekf_config_reference(const char* name, sekf_config** out) {
  if (!name || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const std::string n(name);
    if (n == "s2") {
      *out = new sekf_config{sphere_reference_config(), {}};
    } else if (n == "st42") {
      *out = new sekf_config{stiefel42_reference_config(), {}};
    } else {
      fail(ErrorCode::kConfig, "unknown reference configuration '" + n + "'");
    }
  });
}

sekf_status sekf_config_set(sekf_config* config, const char* key, const char* json_value) {
  if (!config || !key || !json_value) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    ExperimentConfig copy = config->config;
    apply_override(copy, key, json_value);
    config->config = std::move(copy);
  });
}

sekf_status sekf_config_set_many(sekf_config* config, const char* const* keys,
                                 const char* const* json_values, size_t count) {
  if (!config || (count > 0 && (!keys || !json_values))) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  for (size_t i = 0; i < count; ++i) {
    if (!keys[i] || !json_values[i]) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  }
  return guarded([&] {
    std::vector<std::pair<std::string, std::string>> overrides;
    for (size_t i = 0; i < count; ++i) overrides.emplace_back(keys[i], json_values[i]);
    ExperimentConfig copy = config->config;
    apply_overrides(copy, overrides);
    config->config = std::move(copy);
  });
}

sekf_status sekf_config_set_seed(sekf_config* config, uint64_t seed) {
  if (!config) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  config->config.seed = seed;
  return SEKF_OK;
}

sekf_status sekf_config_set_output_dir(sekf_config* config, const char* dir) {
  if (!config || !dir) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { config->config.output_dir = dir; });
}

sekf_status sekf_config_set_workers(sekf_config* config, int workers) {
  if (!config) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  if (workers < 1) return set_error(SEKF_CONFIG, "config: workers must be at least 1");
  config->config.workers = workers;
  return SEKF_OK;
}

sekf_status sekf_config_set_noise_mode(sekf_config* config, const char* mode) {
  if (!config || !mode) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { config->config.noise_mode = parse_noise_mode(mode); });
}

sekf_status sekf_config_to_json(sekf_config* config, const char** out) {
  if (!config || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    config->json = config_to_json(config->config);
    *out = config->json.c_str();
  });
}

void sekf_config_free(sekf_config* config) { delete config; }

sekf_status sekf_run_single(const sekf_config* config, sekf_report** out) {
  if (!config || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto result = run_single(config->config);
    auto* report = make_report();
    report->summary = std::move(result.summary);
    report->files = std::move(result.files);
    report->has_errors = true;
    report->measurement_error = result.realization.mean_measurement_error();
    report->filter_error = result.realization.mean_filter_error();
    *out = report;
  });
}

sekf_status sekf_run_sweep(const sekf_config* config, sekf_report** out) {
  if (!config || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto result = run_snr_sweep(config->config);
    auto* report = make_report();
    report->summary = std::move(result.summary);
    report->files = std::move(result.files);
    report->cells = std::move(result.cells);
    *out = report;
  });
}

sekf_status sekf_run_eta(const sekf_config* config, sekf_report** out) {
  if (!config || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto result = run_eta_build(config->config);
    auto* report = make_report();
    report->summary = std::move(result.summary);
    report->files = std::move(result.files);
    *out = report;
  });
}

sekf_status sekf_run(const sekf_config* config, sekf_report** out) {
  if (!config || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  switch (config->config.mode) {
    case ExperimentMode::kSingleRun: return sekf_run_single(config, out);
    case ExperimentMode::kSnrSweep: return sekf_run_sweep(config, out);
    case ExperimentMode::kEtaTable: return sekf_run_eta(config, out);
  }
  return set_error(SEKF_INTERNAL, "unhandled mode");
}

const char* sekf_report_summary(const sekf_report* report) {
  return report ? report->summary.c_str() : "";
}

size_t sekf_report_file_count(const sekf_report* report) { return report ? report->files.size() : 0; }

const char* sekf_report_file(const sekf_report* report, size_t index) {
  if (!report || index >= report->files.size()) return nullptr;
  return report->files[index].c_str();
}

size_t sekf_report_cell_count(const sekf_report* report) { return report ? report->cells.size() : 0; }

sekf_status sekf_report_cell(const sekf_report* report, size_t index, sekf_sweep_cell* out) {
  if (!report || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  if (index >= report->cells.size()) return set_error(SEKF_INVALID_ARGUMENT, "cell index out of range");
  const SweepCell& c = report->cells[index];
  *out = {c.process_noise, c.measurement_noise, c.snr_db,          c.snr_eta_db,
          c.measurement_error, c.measurement_se, c.filter_error, c.filter_se,
          c.completed,     c.aborted,           c.skipped_updates, c.valid ? 1 : 0};
  return SEKF_OK;
}

sekf_status sekf_report_errors(const sekf_report* report, double* measurement, double* filter) {
  if (!report || !measurement || !filter) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  if (!report->has_errors) return set_error(SEKF_INVALID_ARGUMENT, "not a single-run report");
  *measurement = report->measurement_error;
  *filter = report->filter_error;
  return SEKF_OK;
}

void sekf_report_free(sekf_report* report) { delete report; }

sekf_status sekf_point_create(int n, int k, const double* data, sekf_point** out) {
  if (!data || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    ManifoldDims{n, k}.validate();
    *out = new sekf_point{StiefelPoint(from_row_major(n, k, data))};
  });
}

sekf_status sekf_point_project(int n, int k, const double* data, sekf_point** out) {
  if (!data || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    ManifoldDims{n, k}.validate();
    *out = new sekf_point{project(from_row_major(n, k, data))};
  });
}

sekf_status sekf_point_dims(const sekf_point* point, int* n, int* k) {
  if (!point || !n || !k) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  *n = point->point.n();
  *k = point->point.k();
  return SEKF_OK;
}

sekf_status sekf_point_copy_data(const sekf_point* point, double* out, size_t capacity) {
  if (!point || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  if (capacity < static_cast<size_t>(point->point.value().size()))
    return set_error(SEKF_DIMENSION, "dimension: output buffer too small");
  to_row_major(point->point.value(), out);
  return SEKF_OK;
}

void sekf_point_free(sekf_point* point) { delete point; }

sekf_status sekf_exp_map(const sekf_point* x, const double* v, sekf_point** out) {
  if (!x || !v || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& p = x->point;
    TangentVector tv(p, from_row_major(p.n(), p.k(), v));
    *out = new sekf_point{exp_map(p, tv)};
  });
}

sekf_status sekf_log_map(const sekf_point* x, const sekf_point* y, double* out) {
  if (!x || !y || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { to_row_major(log_map(x->point, y->point).value(), out); });
}

sekf_status sekf_distance(const sekf_point* x, const sekf_point* y, double* out) {
  if (!x || !y || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = distance(x->point, y->point); });
}

sekf_status sekf_inner(const sekf_point* x, const double* v, const double* w, double* out) {
  if (!x || !v || !w || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& p = x->point;
    *out = inner(TangentVector(p, from_row_major(p.n(), p.k(), v)),
                 TangentVector(p, from_row_major(p.n(), p.k(), w)));
  });
}

sekf_status sekf_eta_table_load(const char* path, sekf_eta_table** out) {
  if (!path || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new sekf_eta_table{std::make_shared<EtaTable>(load_eta_table(path))}; });
}

sekf_status sekf_eta_table_save(const sekf_eta_table* table, const char* path) {
  if (!table || !path) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { save_eta_table(*table->table, path); });
}

sekf_status sekf_eta_table_build(int n, int k, double grid_min, double grid_max, int nodes,
                                 uint64_t draws, uint64_t seed, const char* method, int workers,
                                 sekf_eta_table** out) {
  if (!out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    EtaGridSpec grid;
    grid.min = grid_min;
    grid.max = grid_max;
    grid.nodes = nodes;
    EtaBuildOptions options;
    options.method = parse_eta_method(method ? method : "auto");
    options.workers = workers < 1 ? 1 : workers;
    *out = new sekf_eta_table{
        std::make_shared<EtaTable>(build_eta_table({n, k}, grid, draws, seed, options))};
  });
}

sekf_status sekf_eta_forward(const sekf_eta_table* table, double sigma2, double* out) {
  if (!table || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = eta_forward(*table->table, sigma2); });
}

sekf_status sekf_eta_inverse(const sekf_eta_table* table, double p, double* out) {
  if (!table || !out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = eta_inverse(*table->table, p); });
}

void sekf_eta_table_free(sekf_eta_table* table) { delete table; }

sekf_status sekf_eta_closed_form_s2(double sigma2, double* out) {
  if (!out) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = eta_closed_form_s2(sigma2); });
}

sekf_status sekf_filter_create(const sekf_model* model, const sekf_eta_table* table, sekf_filter** out) {
  if (!model || !table || !out || !model->drift || !model->initial_mean)
    return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    SystemModel m;
    m.dims = {model->n, model->k};
    m.dims.validate();
    m.drift = from_row_major(model->n, model->n, model->drift);
    m.process_noise = model->process_noise;
    m.measurement_noise = model->measurement_noise;
    m.initial_mean = from_row_major(model->n, model->k, model->initial_mean);
    m.initial_variance = model->initial_variance;
    FilterConfig config{std::move(m), table->table,
                        model->skip_on_log_failure ? LogFailurePolicy::kSkipUpdate
                                                   : LogFailurePolicy::kHardError};
    config.validate();
    Belief belief = initial_belief(config);
    *out = new sekf_filter{std::move(config), std::move(belief)};
  });
}

sekf_status sekf_filter_predict(sekf_filter* filter, double dt) {
  if (!filter) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { filter->belief = predict(filter->belief, dt, filter->config); });
}

sekf_status sekf_filter_update(sekf_filter* filter, const sekf_point* measurement) {
  if (!filter || !measurement) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    auto result = update(filter->belief, measurement->point, filter->config);
    filter->belief = std::move(result.belief);
    filter->gain = result.gain;
    filter->skipped = result.skipped;
  });
}

sekf_status sekf_filter_state(const sekf_filter* filter, double* mean, sekf_belief_info* info) {
  if (!filter) return set_error(SEKF_INVALID_ARGUMENT, "null argument");
  if (mean) to_row_major(filter->belief.mean.value(), mean);
  if (info) {
    *info = {filter->belief.ambient_variance, filter->belief.intrinsic_variance, filter->gain,
             filter->skipped ? 1 : 0};
  }
  return SEKF_OK;
}

void sekf_filter_free(sekf_filter* filter) { delete filter; }

}  // extern "C"
