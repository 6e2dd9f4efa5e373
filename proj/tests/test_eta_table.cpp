#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "stiefel/error.hpp"
#include "stiefel/eta_table.hpp"

using namespace stiefel;

namespace {

EtaTable sphere_table() {
  EtaGridSpec grid;
  grid.nodes = 32;
  return build_eta_table({3, 1}, grid, 0, 1);
}

EtaTable small_table() {
  EtaTable t;
  t.manifold = {3, 1};
  t.method = "quadrature";
  t.grid = {0.1, 0.2, 0.4};
  t.values = {0.05, 0.09, 0.2};
  t.raw_values = t.values;
  t.std_errors = {0, 0, 0};
  t.rejected = {0, 0, 0};
  return t;
}

}  // namespace

TEST_CASE("grid spec") {
  EtaGridSpec g;
  g.min = 0.01;
  g.max = 1.0;
  g.nodes = 3;
  const auto v = g.nodes_vector();
  REQUIRE(v.size() == 3);
  CHECK(v[0] == doctest::Approx(0.01));
  CHECK(v[1] == doctest::Approx(0.1));
  CHECK(v[2] == 1.0);
  g.log_spaced = false;
  CHECK(g.nodes_vector()[1] == doctest::Approx(0.505));
}

TEST_CASE("S^2 table follows the quadrature") {
  const auto t = sphere_table();
  CHECK(t.method == "quadrature");
  REQUIRE(t.grid.size() == 32);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(t.values[i] == doctest::Approx(eta_closed_form_s2(t.grid[i])).epsilon(1e-9));
  }
  CHECK(eta_forward(t, 1e-4) < 1e-3);
  const double bound = std::numbers::pi * std::numbers::pi * 0.8;
  CHECK(t.values.back() < bound);
}

TEST_CASE("Monte Carlo table for S^2 agrees with the radius-conditioned quadrature") {
  EtaGridSpec grid;
  grid.min = 0.05;
  grid.max = 1.0;
  grid.nodes = 6;
  EtaBuildOptions opt;
  opt.method = EtaMethod::kMonteCarlo;
  opt.monte_carlo.max_rejection_fraction = 0.05;
  const auto t = build_eta_table({3, 1}, grid, 40000, 7, opt);
  REQUIRE(t.grid.size() == 6);
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    CHECK(std::abs(t.raw_values[i] - eta_s2_within(t.grid[i])) < 3 * t.std_errors[i]);
  }
}

TEST_CASE("St(4,2) Monte Carlo table is strictly increasing") {
  EtaGridSpec grid;
  grid.min = 0.01;
  grid.max = 0.5;
  grid.nodes = 8;
  const auto t = build_eta_table({4, 2}, grid, 2000, 3);
  CHECK(t.method == "monte-carlo");
  for (std::size_t i = 1; i < t.values.size(); ++i) CHECK(t.values[i] > t.values[i - 1]);
  CHECK_NOTHROW(t.validate());
}

TEST_CASE("table build is deterministic and independent of worker count") {
  EtaGridSpec grid;
  grid.min = 0.01;
  grid.max = 0.5;
  grid.nodes = 5;
  EtaBuildOptions one, four;
  four.workers = 4;
  const auto a = build_eta_table({4, 2}, grid, 500, 9, one);
  const auto b = build_eta_table({4, 2}, grid, 500, 9, four);
  CHECK(serialize_eta_table(a) == serialize_eta_table(b));
}

TEST_CASE("unreliable tail is truncated") {
  EtaGridSpec grid;
  grid.min = 0.1;
  grid.max = 20.0;
  grid.nodes = 8;
  const auto t = build_eta_table({4, 2}, grid, 400, 5);
  REQUIRE(t.truncated_above.has_value());
  CHECK(t.grid.back() < *t.truncated_above);
  EtaBuildOptions strict;
  strict.truncate_unreliable_tail = false;
  CHECK_THROWS_AS(build_eta_table({4, 2}, grid, 400, 5, strict), Error);
}

TEST_CASE("isotonic regression") {
  const auto fit = isotonic_increasing({1.0, 3.0, 2.0, 4.0}, {1, 1, 1, 1});
  CHECK(fit[0] == doctest::Approx(1.0));
  CHECK(fit[1] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit[2] > fit[1]);
  CHECK(fit[2] == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit[3] == doctest::Approx(4.0));

  // Weighted pooling: the heavier node dominates.
  const auto w = isotonic_increasing({2.0, 1.0}, {3, 1});
  CHECK(w[0] == doctest::Approx(1.75).epsilon(1e-9));

  const std::vector<double> sorted{0.1, 0.2, 0.3};
  CHECK(isotonic_increasing(sorted, {1, 1, 1}) == sorted);
}

TEST_CASE("forward interpolation") {
  const auto t = small_table();
  CHECK(eta_forward(t, 0.2) == 0.09);
  CHECK(eta_forward(t, 0.15) == doctest::Approx(0.07));
  CHECK(eta_forward(t, 0.3) == doctest::Approx(0.145));
  CHECK(eta_forward(t, 0.0) == 0.0);
  CHECK(eta_forward(t, 0.05) == doctest::Approx(0.025));
  CHECK_THROWS_AS(eta_forward(t, 0.5), Error);
  CHECK_THROWS_AS(eta_forward(t, -0.1), Error);
}

TEST_CASE("inverse interpolation") {
  const auto t = small_table();
  CHECK(eta_inverse(t, 0.05) == doctest::Approx(0.1));
  CHECK(eta_inverse(t, 0.0) == 0.0);
  CHECK(eta_inverse(t, 0.07) == doctest::Approx(0.15));
  try {
    eta_inverse(t, 0.3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kExtrapolation);
  }
}

TEST_CASE("forward and inverse roundtrip on the S^2 table") {
  const auto t = sphere_table();
  for (double s : {1e-4, 3e-4, 0.01, 0.123, 0.5, 1.0, 1.9, 2.0}) {
    CHECK(std::abs(eta_inverse(t, eta_forward(t, s)) - s) < 1e-9);
  }
  CHECK(eta_inverse(t, t.values.front()) == doctest::Approx(t.grid.front()).epsilon(1e-12));
  double prev = -1;
  for (double p = 1e-5; p < t.values.back(); p *= 1.7) {
    const double s = eta_inverse(t, p);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("serialization roundtrip is exact") {
  EtaGridSpec grid;
  grid.min = 0.01;
  grid.max = 0.5;
  grid.nodes = 5;
  auto t = build_eta_table({4, 2}, grid, 300, 4);
  t.provenance = R"({"note":"test"})";
  const auto text = serialize_eta_table(t);
  const auto back = parse_eta_table(text);
  CHECK(back.grid == t.grid);
  CHECK(back.values == t.values);
  CHECK(back.raw_values == t.raw_values);
  CHECK(back.std_errors == t.std_errors);
  CHECK(back.rejected == t.rejected);
  CHECK(back.manifold == t.manifold);
  CHECK(serialize_eta_table(back) == text);

  const auto path = std::filesystem::temp_directory_path() / "stiefel_eta_roundtrip.json";
  save_eta_table(t, path);
  CHECK(serialize_eta_table(load_eta_table(path)) == text);
  std::filesystem::remove(path);
}

TEST_CASE("malformed tables are rejected") {
  CHECK_THROWS_AS(parse_eta_table("{}"), Error);
  CHECK_THROWS_AS(parse_eta_table("not json"), Error);
  auto t = small_table();
  t.values = {0.05, 0.04, 0.2};
  CHECK_THROWS_AS(t.validate(), Error);
  CHECK_THROWS_AS(load_eta_table("/nonexistent/eta.json"), Error);
}
