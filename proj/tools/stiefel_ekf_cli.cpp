// stiefel-ekf: single runs, SNR sweeps and eta tables from a JSON config.

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stiefel_ekf.h"

namespace {

struct Options {
  std::string config_path;
  std::string reference;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> mode;
  std::vector<std::string> overrides;
  bool quiet = false;
};

int report_failure(sekf_status status, const char* step) {
  std::fprintf(stderr, "stiefel-ekf: %s failed [%s] %s\n", step, sekf_status_string(status),
               sekf_last_error());
  return 10 + static_cast<int>(status);
}

void add_common(CLI::App* cmd, Options& o) {
  auto* cfg = cmd->add_option("--config", o.config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--reference", o.reference, "built-in parameter set instead of --config")
      ->check(CLI::IsMember({"s2", "st42"}))
      ->excludes(cfg);
  cmd->add_option("--seed", o.seed, "base seed");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--workers", o.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--mode", o.mode, "measurement noise model")
      ->check(CLI::IsMember({"tangent-noise", "ambient-noise"}));
  cmd->add_option("--set", o.overrides, "override a config key, key=json (repeatable)");
  cmd->add_flag("-q,--quiet", o.quiet, "do not print the summary");
}

int run(const Options& o, const char* mode_name,
        sekf_status (*runner)(const sekf_config*, sekf_report**)) {
  sekf_config* config = nullptr;
  sekf_status st;
  if (!o.config_path.empty()) {
    st = sekf_config_load(o.config_path.c_str(), &config);
  } else if (!o.reference.empty()) {
    st = sekf_config_reference(o.reference.c_str(), &config);
  } else {
    std::fprintf(stderr, "stiefel-ekf: one of --config or --reference is required\n");
    return 2;
  }
  if (st != SEKF_OK) return report_failure(st, "loading config");

  auto done = [&](int code) {
    sekf_config_free(config);
    return code;
  };
  std::vector<std::string> keys{"mode"}, values{std::string("\"") + mode_name + "\""};
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "stiefel-ekf: --set expects key=json, got '%s'\n", kv.c_str());
      return done(2);
    }
    keys.push_back(kv.substr(0, eq));
    values.push_back(kv.substr(eq + 1));
  }
  std::vector<const char*> key_ptrs, value_ptrs;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    key_ptrs.push_back(keys[i].c_str());
    value_ptrs.push_back(values[i].c_str());
  }
  st = sekf_config_set_many(config, key_ptrs.data(), value_ptrs.data(), keys.size());
  if (st == SEKF_OK && o.seed) st = sekf_config_set_seed(config, *o.seed);
  if (st == SEKF_OK && o.out) st = sekf_config_set_output_dir(config, o.out->c_str());
  if (st == SEKF_OK && o.workers) st = sekf_config_set_workers(config, *o.workers);
  if (st == SEKF_OK && o.mode) st = sekf_config_set_noise_mode(config, o.mode->c_str());
  if (st != SEKF_OK) return done(report_failure(st, "applying overrides"));

  sekf_report* report = nullptr;
  st = runner(config, &report);
  if (st != SEKF_OK) return done(report_failure(st, mode_name));
  if (!o.quiet) std::fputs(sekf_report_summary(report), stdout);
  for (size_t i = 0; i < sekf_report_file_count(report); ++i) {
    std::fprintf(stderr, "wrote %s\n", sekf_report_file(report, i));
  }
  sekf_report_free(report);
  return done(0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended Kalman filtering on Stiefel manifolds"};
  app.set_version_flag("--version", std::string(sekf_version()));
  app.require_subcommand(1);

  Options single_opts, sweep_opts, eta_opts;
  auto* single = app.add_subcommand("single", "one seeded realization: trajectory, measurements, track");
  auto* sweep = app.add_subcommand("sweep", "SNR sweep over the process-noise ladder");
  auto* eta = app.add_subcommand("eta", "build and serialize an eta table");
  add_common(single, single_opts);
  add_common(sweep, sweep_opts);
  add_common(eta, eta_opts);

  CLI11_PARSE(app, argc, argv);

  if (*single) return run(single_opts, "single-run", sekf_run_single);
  if (*sweep) return run(sweep_opts, "snr-sweep", sekf_run_sweep);
  return run(eta_opts, "eta-table", sekf_run_eta);
}
