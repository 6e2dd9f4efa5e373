#pragma once

// Monotone tabulation of sigma^2 -> eta(sigma^2) for one manifold, with
// piecewise-linear forward evaluation and exact inversion of the interpolant.
// The exact anchor eta(0) = 0 is implied and not stored.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stiefel/geometry.hpp"
#include "stiefel/intrinsic_stats.hpp"

namespace stiefel {

inline constexpr int kEtaTableFormatVersion = 1;

enum class EtaMethod { kAuto, kQuadrature, kMonteCarlo };

struct EtaGridSpec {
  double min = 1e-4;
  double max = 2.0;
  int nodes = 64;
  bool log_spaced = true;

  std::vector<double> nodes_vector() const;
};

struct EtaTable {
  ManifoldDims manifold;
  std::string method;                // "quadrature" or "monte-carlo"
  std::vector<double> grid;          // strictly increasing
  std::vector<double> values;        // after the isotonic pass, strictly increasing
  std::vector<double> raw_values;    // per-node estimates before the isotonic pass
  std::vector<double> std_errors;    // 0 for quadrature nodes
  std::vector<std::uint64_t> rejected;
  std::uint64_t sample_count = 0;    // accepted draws per node
  std::uint64_t base_seed = 0;
  std::optional<double> truncated_above;  // first grid node that was dropped
  std::string provenance;            // free-form JSON text, e.g. the resolved config

  void validate() const;
};

struct EtaBuildOptions {
  EtaMethod method = EtaMethod::kAuto;
  int workers = 1;
  EtaMonteCarloOptions monte_carlo;
  /// Drop the grid tail from the first node that exceeds the rejection budget
  /// instead of failing; records the cut in `truncated_above`.
  bool truncate_unreliable_tail = true;
};

EtaTable build_eta_table(ManifoldDims dims, const EtaGridSpec& grid, std::size_t draws,
                         std::uint64_t base_seed, const EtaBuildOptions& options = {});

/// Pool-adjacent-violators fit (weighted least squares, nondecreasing) followed
/// by lifting ties by 1e-12 so the result is strictly increasing.
std::vector<double> isotonic_increasing(const std::vector<double>& values,
                                        const std::vector<double>& weights);

/// Throws kExtrapolation outside [0, grid.back()].
double eta_forward(const EtaTable& table, double sigma2);
/// Throws kExtrapolation outside [0, values.back()].
double eta_inverse(const EtaTable& table, double p);

std::string serialize_eta_table(const EtaTable& table);
EtaTable parse_eta_table(const std::string& text);
void save_eta_table(const EtaTable& table, const std::filesystem::path& path);
EtaTable load_eta_table(const std::filesystem::path& path);

}  // namespace stiefel
