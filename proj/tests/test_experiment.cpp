#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "stiefel/error.hpp"
#include "stiefel/experiment.hpp"

using namespace stiefel;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("stiefel_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_sphere() {
  auto c = sphere_reference_config();
  c.eta.grid.nodes = 24;
  c.repetitions = 6;
  c.steps = 400;
  c.measurements = 10;
  return c;
}

}  // namespace

TEST_CASE("single run writes every artifact with provenance") {
  auto c = small_sphere();
  const auto dir = scratch("single");
  c.output_dir = dir.string();
  const auto r = run_single(c);
  REQUIRE(r.files.size() == 4);
  for (const auto& f : r.files) {
    const auto text = slurp(f);
    CHECK(text.rfind("# stiefel-ekf ", 0) == 0);
    CHECK(text.find("# config: " + config_to_json(c)) != std::string::npos);
  }
  const auto track = slurp(dir / "track.csv");
  CHECK(track.find("time,m_1_1,m_2_1,m_3_1,gain,intrinsic_variance,ambient_variance,skipped,measured\n") !=
        std::string::npos);
  CHECK(r.realization.measurement_errors.size() == 10);
  CHECK(r.summary.find("mean_filter_error") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("zero-noise run has zero filter error") {
  auto c = stiefel42_reference_config();
  c.process_noise = 0.0;
  c.measurement_noise = 0.0;
  c.initial_variance = 0.0;
  c.eta.draws = 200;
  c.eta.grid.nodes = 4;
  c.steps = 200;
  const auto r = run_single(c);
  for (double e : r.realization.filter_errors) CHECK(e < 1e-8);
}

TEST_CASE("single runs are byte-identical for the same seed") {
  auto c = small_sphere();
  const auto a = scratch("det_a");
  const auto b = scratch("det_b");
  c.output_dir = a.string();
  run_single(c);
  c.output_dir = b.string();
  run_single(c);
  for (const char* name : {"trajectory.csv", "measurements.csv", "track.csv"}) {
    // Output dir appears in the provenance line; compare the data below it.
    auto strip = [](std::string s) { return s.substr(s.find("\ntime")); };
    CHECK(strip(slurp(a / name)) == strip(slurp(b / name)));
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("sweep results do not depend on the worker count") {
  auto c = small_sphere();
  c.sweep.process_noise_ladder = {0.1, 1.0};
  c.sweep.snr_divisors = {1.0, 10.0};
  c.workers = 1;
  const auto one = run_snr_sweep(c);
  c.workers = 3;
  const auto three = run_snr_sweep(c);
  REQUIRE(one.cells.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(one.cells[i].measurement_error == three.cells[i].measurement_error);
    CHECK(one.cells[i].filter_error == three.cells[i].filter_error);
  }
  CHECK(one.cells[1].snr_db == doctest::Approx(10.0));
  CHECK(one.cells[1].measurement_noise == doctest::Approx(0.01));
  c.workers = 1;
  CHECK(sweep_csv(one, c) == sweep_csv(three, c));
}

TEST_CASE("eta build is reproducible and cached tables are reused") {
  auto c = stiefel42_reference_config();
  c.mode = ExperimentMode::kEtaTable;
  c.eta.draws = 300;
  c.eta.grid.nodes = 6;
  c.eta.grid.max = 0.5;
  const auto a = run_eta_build(c);
  const auto b = run_eta_build(c);
  CHECK(serialize_eta_table(a.table) == serialize_eta_table(b.table));
  CHECK(a.summary.find("raw_inversions") != std::string::npos);

  const auto dir = scratch("eta_cache");
  fs::create_directories(dir);
  c.eta.table_path = (dir / "eta.json").string();
  const auto built = resolve_eta_table(c);
  CHECK(fs::exists(c.eta.table_path));
  const auto loaded = resolve_eta_table(c);
  CHECK(serialize_eta_table(*built) == serialize_eta_table(*loaded));

  auto wrong = sphere_reference_config();
  wrong.eta.table_path = c.eta.table_path;
  CHECK_THROWS_AS(resolve_eta_table(wrong), Error);
  fs::remove_all(dir);
}

TEST_CASE("errors name the failing step and seed") {
  auto c = small_sphere();
  c.eta.grid.max = 0.12;  // predict leaves the table on the first gap
  try {
    run_single(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kVarianceOverflow);
    CHECK(std::string(e.what()).find("filtering failed (seed ") != std::string::npos);
  }
}
