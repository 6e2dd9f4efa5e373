#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "stiefel/ekf.hpp"
#include "stiefel/sde.hpp"

namespace stiefel {

/// %.17g, round-trippable.
std::string format_full(double value);
/// Fixed two-decimal display value.
std::string format_display(double value);

/// Comment block written at the top of every output file.
struct Provenance {
  std::string tool_version;
  std::string config_json;
  std::uint64_t seed = 0;
  ManifoldDims dims;

  std::string header() const;
};

/// Column names m_<row>_<col> (1-based, row-major) with the given prefix.
std::vector<std::string> matrix_columns(const std::string& prefix, int n, int k);

std::string trajectory_csv(const Trajectory& trajectory, const Provenance& provenance);
std::string measurements_csv(const MeasurementSeries& series, const Provenance& provenance);
std::string track_csv(const std::vector<FilterStep>& track, const Provenance& provenance);

void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace stiefel
