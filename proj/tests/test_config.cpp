#include <doctest.h>

#include <string>

#include "stiefel/config.hpp"
#include "stiefel/csv.hpp"
#include "stiefel/error.hpp"

using namespace stiefel;

namespace {

const char* kMinimal = R"({
  "schema_version": 1,
  "mode": "single-run",
  "manifold": {"n": 3, "k": 1},
  "drift": [[0, 0.263, 0.036], [-0.263, 0, -0.653], [-0.036, 0.653, 0]],
  "initial_mean": [[0], [0], [1]]
})";

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kOk;
}

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.dims == ManifoldDims{3, 1});
  CHECK(c.process_noise == 1.0);
  CHECK(c.measurement_noise == 0.1);
  CHECK(c.initial_variance == 0.1);
  CHECK(c.steps == 2000);
  CHECK(c.measurements == 20);
  CHECK(c.repetitions == 100);
  CHECK(c.noise_mode == MeasurementNoiseMode::kAmbient);
  CHECK(c.log_failure == LogFailurePolicy::kHardError);
  CHECK(c.sweep.process_noise_ladder == std::vector<double>{0.1, 0.2, 0.5, 1.0});
}

TEST_CASE("config JSON roundtrip") {
  const auto c = sphere_reference_config();
  const auto text = config_to_json(c);
  CHECK(config_to_json(parse_config(text)) == text);
  const auto s = stiefel42_reference_config();
  CHECK(config_to_json(parse_config(config_to_json(s))) == config_to_json(s));
}

TEST_CASE("unknown keys are errors") {
  std::string typo = kMinimal;
  typo.replace(typo.find("\"mode\""), 6, "\"mdoe\"");
  CHECK(code_of([&] { parse_config(typo); }) == ErrorCode::kConfig);

  std::string nested = kMinimal;
  nested.replace(nested.find("\"manifold\": {"), 13, "\"manifold\": {\"m\": 2, ");
  CHECK(code_of([&] { parse_config(nested); }) == ErrorCode::kConfig);

  auto c = parse_config(kMinimal);
  CHECK(code_of([&] { apply_override(c, "eta.draw", "5"); }) == ErrorCode::kConfig);
}

TEST_CASE("invalid values are errors") {
  CHECK(code_of([] { parse_config("{"); }) == ErrorCode::kConfig);
  CHECK(code_of([] { parse_config(R"({"manifold": {"n": 3, "k": 1}})"); }) == ErrorCode::kConfig);

  auto c = parse_config(kMinimal);
  CHECK(code_of([&] { apply_override(c, "process_noise", "-1"); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { apply_override(c, "drift", "[[0,1,0],[1,0,0],[0,0,0]]"); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { apply_override(c, "noise_mode", "\"loud\""); }) == ErrorCode::kConfig);
  CHECK(code_of([&] { apply_override(c, "schema_version", "2"); }) == ErrorCode::kConfig);
  // A failed override leaves the config untouched.
  CHECK(c.process_noise == 1.0);
}

TEST_CASE("overrides") {
  auto c = parse_config(kMinimal);
  apply_override(c, "eta.draws", "5000");
  apply_override(c, "seed", "99");
  apply_override(c, "noise_mode", "\"tangent-noise\"");
  apply_override(c, "sweep.snr_divisors", "[1, 10]");
  CHECK(c.eta.draws == 5000);
  CHECK(c.seed == 99);
  CHECK(c.noise_mode == MeasurementNoiseMode::kTangent);
  CHECK(c.sweep.snr_divisors.size() == 2);
}

TEST_CASE("seeds up to 2^64 - 1 survive the JSON roundtrip") {
  auto c = parse_config(kMinimal);
  apply_override(c, "seed", "18446744073709551615");
  CHECK(c.seed == 18446744073709551615ULL);
  CHECK(parse_config(config_to_json(c)).seed == c.seed);
}

TEST_CASE("SNR ladder in decibels") {
  const auto c = sphere_reference_config();
  const double expected[] = {0.0, 4.47, 6.63, 8.06, 9.14, 10.0};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(format_display(10 * std::log10(c.sweep.snr_divisors[i])) == format_display(expected[i]));
  }
}

TEST_CASE("number formatting") {
  CHECK(format_full(0.1) == "0.10000000000000001");
  CHECK(format_full(1.0) == "1");
  CHECK(format_display(0.125) == "0.12");
  CHECK(format_display(1.0) == "1.00");
}

TEST_CASE("provenance header and column names") {
  const Provenance p{"1.2.3", "{}", 7, {4, 2}};
  CHECK(p.header() == "# stiefel-ekf 1.2.3\n# manifold: n=4 k=2\n# seed: 7\n# config: {}\n");
  const auto cols = matrix_columns("m", 2, 2);
  CHECK(cols == std::vector<std::string>{"m_1_1", "m_1_2", "m_2_1", "m_2_2"});
}
