#include "stiefel/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <limits>
#include <numeric>
#include <sstream>

#include "stiefel/csv.hpp"
#include "stiefel/error.hpp"
#include "stiefel/parallel.hpp"

namespace stiefel {

namespace fs = std::filesystem;

const char* library_version() { return "0.3.0"; }

namespace {

double metric_distance(const StiefelPoint& a, const StiefelPoint& b) {
  LogOptions unguarded;
  unguarded.radius = std::numeric_limits<double>::infinity();
  return distance(a, b, unguarded);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

Provenance provenance_for(const ExperimentConfig& config) {
  return {library_version(), config_to_json(config), config.seed, config.dims};
}

FilterConfig filter_config(const ExperimentConfig& config, const SystemModel& model,
                           std::shared_ptr<const EtaTable> eta) {
  FilterConfig f{model, std::move(eta), config.log_failure};
  f.validate();
  return f;
}

std::string with_step(const std::string& step, std::uint64_t seed, const Error& e) {
  return step + " failed (seed " + std::to_string(seed) + "): " + e.what();
}

}  // namespace

double RealizationResult::mean_measurement_error() const { return mean_of(measurement_errors); }
double RealizationResult::mean_filter_error() const { return mean_of(filter_errors); }

RealizationResult run_realization(const ExperimentConfig& config, const FilterConfig& filter,
                                  std::uint64_t seed) {
  const SystemModel& model = filter.model;
  Rng rng(seed);
  RealizationResult out;
  try {
    out.trajectory = simulate_trajectory(model, config.dt(), config.steps, rng);
  } catch (const Error& e) {
    throw Error(e.code(), with_step("trajectory simulation", seed, e));
  }
  const auto indices = evenly_spaced_indices(config.steps, config.measurements);
  try {
    out.measurements = simulate_measurements(out.trajectory, model, indices, rng, config.noise_mode);
  } catch (const Error& e) {
    throw Error(e.code(), with_step("measurement simulation", seed, e));
  }
  try {
    out.track = run_filter(filter, out.measurements, initial_belief(filter));
  } catch (const Error& e) {
    throw Error(e.code(), with_step("filtering", seed, e));
  }
  try {
    std::size_t epoch = 0;
    for (const auto& step : out.track) {
      if (!step.measured) continue;
      const StiefelPoint& truth = out.trajectory.projected[out.measurements.indices[epoch]];
      out.measurement_errors.push_back(metric_distance(truth, out.measurements.values[epoch]));
      out.filter_errors.push_back(metric_distance(truth, step.belief.mean));
      if (step.skipped) ++out.skipped_updates;
      ++epoch;
    }
  } catch (const Error& e) {
    throw Error(e.code(), with_step("error evaluation", seed, e));
  }
  return out;
}

std::shared_ptr<const EtaTable> resolve_eta_table(const ExperimentConfig& config) {
  const auto& settings = config.eta;
  if (!settings.table_path.empty() && fs::exists(settings.table_path)) {
    auto table = std::make_shared<EtaTable>(load_eta_table(settings.table_path));
    if (table->manifold != config.dims) {
      fail(ErrorCode::kConfig, "cached eta table " + settings.table_path + " is for a different manifold");
    }
    return table;
  }
  EtaBuildOptions options;
  options.method = settings.method;
  options.workers = config.workers;
  options.monte_carlo.max_rejection_fraction = settings.max_rejection_fraction;
  auto table = std::make_shared<EtaTable>(
      build_eta_table(config.dims, settings.grid, settings.draws, config.seed, options));
  ExperimentConfig eta_only = config;
  eta_only.mode = ExperimentMode::kEtaTable;
  table->provenance = config_to_json(eta_only);
  if (!settings.table_path.empty()) save_eta_table(*table, settings.table_path);
  return table;
}

SingleRunResult run_single(const ExperimentConfig& config) {
  config.validate();
  const SystemModel model = config.model();
  const FilterConfig filter = filter_config(config, model, resolve_eta_table(config));
  SingleRunResult out;
  out.realization = run_realization(config, filter, derive_seed(config.seed, 0, 0));
  const auto& r = out.realization;

  std::ostringstream summary;
  summary << provenance_for(config).header();
  summary << "mode: single-run\n";
  summary << "epochs: " << r.measurement_errors.size() << "\n";
  summary << "mean_measurement_error: " << format_full(r.mean_measurement_error()) << " ("
          << format_display(r.mean_measurement_error()) << ")\n";
  summary << "mean_filter_error: " << format_full(r.mean_filter_error()) << " ("
          << format_display(r.mean_filter_error()) << ")\n";
  summary << "skipped_updates: " << r.skipped_updates << "\n";
  out.summary = summary.str();

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    const Provenance prov = provenance_for(config);
    const std::pair<const char*, std::string> files[] = {
        {"trajectory.csv", trajectory_csv(r.trajectory, prov)},
        {"measurements.csv", measurements_csv(r.measurements, prov)},
        {"track.csv", track_csv(r.track, prov)},
        {"summary.txt", out.summary},
    };
    for (const auto& [name, text] : files) {
      write_text_file(dir / name, text);
      out.files.push_back((dir / name).string());
    }
  }
  return out;
}

SnrSweepResult run_snr_sweep(const ExperimentConfig& config) {
  config.validate();
  const auto eta = resolve_eta_table(config);
  const auto& ladder = config.sweep.process_noise_ladder;
  const auto& divisors = config.sweep.snr_divisors;
  const std::size_t cols = divisors.size();
  const std::size_t cell_count = ladder.size() * cols;
  const auto reps = static_cast<std::size_t>(config.repetitions);

  struct Outcome {
    bool ok = false;
    double meas = 0.0;
    double filt = 0.0;
    std::size_t skipped = 0;
  };
  std::vector<Outcome> outcomes(cell_count * reps);
  std::vector<FilterConfig> filters;
  filters.reserve(cell_count);
  for (std::size_t c = 0; c < cell_count; ++c) {
    const double nu2 = ladder[c / cols];
    filters.push_back(filter_config(config, config.model(nu2, nu2 / divisors[c % cols]), eta));
  }

  parallel_for(outcomes.size(), config.workers, [&](std::size_t job) {
    const std::size_t cell = job / reps;
    const std::size_t rep = job % reps;
    try {
      const auto r = run_realization(config, filters[cell], derive_seed(config.seed, cell, rep));
      outcomes[job] = {true, r.mean_measurement_error(), r.mean_filter_error(), r.skipped_updates};
    } catch (const Error&) {
      outcomes[job] = {};
    }
  });

  SnrSweepResult result;
  result.dims = config.dims;
  for (std::size_t c = 0; c < cell_count; ++c) {
    SweepCell cell;
    cell.process_noise = ladder[c / cols];
    cell.measurement_noise = cell.process_noise / divisors[c % cols];
    cell.snr_db = 10.0 * std::log10(cell.process_noise / cell.measurement_noise);
    try {
      cell.snr_eta_db = 10.0 * std::log10(eta_forward(*eta, cell.process_noise) / cell.measurement_noise);
    } catch (const Error&) {
      cell.snr_eta_db = std::numeric_limits<double>::quiet_NaN();
    }
    // Reduction in fixed realization order.
    double sum_m = 0, sum_f = 0, sq_m = 0, sq_f = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      const Outcome& o = outcomes[c * reps + r];
      if (!o.ok) {
        ++cell.aborted;
        continue;
      }
      ++cell.completed;
      sum_m += o.meas;
      sum_f += o.filt;
      sq_m += o.meas * o.meas;
      sq_f += o.filt * o.filt;
      cell.skipped_updates += o.skipped;
    }
    const double n = cell.completed;
    if (cell.completed > 0) {
      cell.measurement_error = sum_m / n;
      cell.filter_error = sum_f / n;
    }
    if (cell.completed > 1) {
      const double var_m = std::max(0.0, (sq_m - n * cell.measurement_error * cell.measurement_error) / (n - 1));
      const double var_f = std::max(0.0, (sq_f - n * cell.filter_error * cell.filter_error) / (n - 1));
      cell.measurement_se = std::sqrt(var_m / n);
      cell.filter_se = std::sqrt(var_f / n);
    }
    cell.valid = cell.completed > 0 &&
                 cell.aborted <= config.sweep.max_abort_fraction * static_cast<double>(reps);
    result.cells.push_back(cell);
  }

  std::ostringstream summary;
  summary << provenance_for(config).header();
  summary << "mode: snr-sweep, " << reps << " realizations per cell\n";
  for (std::size_t row = 0; row < ladder.size(); ++row) {
    summary << "nu2=" << format_display(ladder[row]) << "\n  snr_db      ";
    for (std::size_t c = 0; c < cols; ++c) summary << ' ' << format_display(result.cells[row * cols + c].snr_db);
    summary << "\n  meas_error  ";
    for (std::size_t c = 0; c < cols; ++c) summary << ' ' << format_display(result.cells[row * cols + c].measurement_error);
    summary << "\n  filter_error";
    for (std::size_t c = 0; c < cols; ++c) summary << ' ' << format_display(result.cells[row * cols + c].filter_error);
    summary << "\n  aborted     ";
    for (std::size_t c = 0; c < cols; ++c) summary << ' ' << result.cells[row * cols + c].aborted;
    summary << "\n";
  }
  result.summary = summary.str();

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    write_text_file(dir / "sweep.csv", sweep_csv(result, config));
    write_text_file(dir / "summary.txt", result.summary);
    result.files = {(dir / "sweep.csv").string(), (dir / "summary.txt").string()};
  }
  return result;
}

std::string sweep_csv(const SnrSweepResult& result, const ExperimentConfig& config) {
  std::ostringstream out;
  out << provenance_for(config).header();
  out << "nu2,xi2,snr_db,snr_eta_db,meas_error,meas_se,filter_error,filter_se,completed,aborted,"
         "skipped_updates,valid,snr_db_display,meas_error_display,filter_error_display\n";
  for (const auto& c : result.cells) {
    out << format_full(c.process_noise) << ',' << format_full(c.measurement_noise) << ','
        << format_full(c.snr_db) << ',' << format_full(c.snr_eta_db) << ','
        << format_full(c.measurement_error) << ',' << format_full(c.measurement_se) << ','
        << format_full(c.filter_error) << ',' << format_full(c.filter_se) << ',' << c.completed << ','
        << c.aborted << ',' << c.skipped_updates << ',' << (c.valid ? 1 : 0) << ','
        << format_display(c.snr_db) << ',' << format_display(c.measurement_error) << ','
        << format_display(c.filter_error) << '\n';
  }
  return out.str();
}

EtaBuildResult run_eta_build(const ExperimentConfig& config) {
  config.validate();
  EtaBuildOptions options;
  options.method = config.eta.method;
  options.workers = config.workers;
  options.monte_carlo.max_rejection_fraction = config.eta.max_rejection_fraction;
  EtaBuildResult out;
  out.table = build_eta_table(config.dims, config.eta.grid, config.eta.draws, config.seed, options);
  out.table.provenance = config_to_json(config);

  const auto& t = out.table;
  std::size_t inversions = 0;
  std::size_t significant = 0;
  for (std::size_t i = 1; i < t.grid.size(); ++i) {
    if (t.raw_values[i] < t.raw_values[i - 1]) {
      ++inversions;
      const double se = std::hypot(t.std_errors[i], t.std_errors[i - 1]);
      if (t.raw_values[i - 1] - t.raw_values[i] > 3.0 * se) ++significant;
    }
  }
  std::ostringstream summary;
  summary << provenance_for(config).header();
  summary << "mode: eta-table (" << t.method << ")\n";
  summary << "nodes: " << t.grid.size() << " on [" << format_full(t.grid.front()) << ", "
          << format_full(t.grid.back()) << "]\n";
  if (t.truncated_above) {
    summary << "truncated: grid cut at sigma2=" << format_full(*t.truncated_above)
            << " (rejection budget exceeded)\n";
  }
  summary << "raw_inversions: " << inversions << " of " << (t.grid.size() - 1) << " adjacent pairs\n";
  summary << "raw_inversions_beyond_3se: " << significant << "\n";
  summary << "monotone_after_isotonic: yes\n";
  out.summary = summary.str();

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    save_eta_table(t, dir / "eta_table.json");
    write_text_file(dir / "summary.txt", out.summary);
    out.files = {(dir / "eta_table.json").string(), (dir / "summary.txt").string()};
  }
  return out;
}

}  // namespace stiefel
