#include "stiefel/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "stiefel/error.hpp"

namespace stiefel {

std::string format_full(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string format_display(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", value);
  return buf;
}

std::string Provenance::header() const {
  std::ostringstream out;
  out << "# stiefel-ekf " << tool_version << "\n";
  out << "# manifold: n=" << dims.n << " k=" << dims.k << "\n";
  out << "# seed: " << seed << "\n";
  out << "# config: " << config_json << "\n";
  return out.str();
}

std::vector<std::string> matrix_columns(const std::string& prefix, int n, int k) {
  std::vector<std::string> cols;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= k; ++j) cols.push_back(prefix + "_" + std::to_string(i) + "_" + std::to_string(j));
  return cols;
}

namespace {

void append_row_major(std::ostringstream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_full(m(i, j));
}

void append_columns(std::ostringstream& out, const std::vector<std::string>& cols) {
  for (const auto& c : cols) out << ',' << c;
}

}  // namespace

std::string trajectory_csv(const Trajectory& trajectory, const Provenance& provenance) {
  std::ostringstream out;
  out << provenance.header() << "time";
  append_columns(out, matrix_columns("x", provenance.dims.n, provenance.dims.k));
  append_columns(out, matrix_columns("p", provenance.dims.n, provenance.dims.k));
  out << '\n';
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    out << format_full(trajectory.times[i]);
    append_row_major(out, trajectory.states[i]);
    append_row_major(out, trajectory.projected[i].value());
    out << '\n';
  }
  return out.str();
}

std::string measurements_csv(const MeasurementSeries& series, const Provenance& provenance) {
  std::ostringstream out;
  out << provenance.header() << "time,index";
  append_columns(out, matrix_columns("z", provenance.dims.n, provenance.dims.k));
  out << '\n';
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    out << format_full(series.times[i]) << ',' << series.indices[i];
    append_row_major(out, series.values[i].value());
    out << '\n';
  }
  return out.str();
}

std::string track_csv(const std::vector<FilterStep>& track, const Provenance& provenance) {
  std::ostringstream out;
  out << provenance.header() << "time";
  append_columns(out, matrix_columns("m", provenance.dims.n, provenance.dims.k));
  out << ",gain,intrinsic_variance,ambient_variance,skipped,measured\n";
  for (const auto& step : track) {
    out << format_full(step.time);
    append_row_major(out, step.belief.mean.value());
    out << ',' << format_full(step.gain) << ',' << format_full(step.belief.intrinsic_variance) << ','
        << format_full(step.belief.ambient_variance) << ',' << (step.skipped ? 1 : 0) << ','
        << (step.measured ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

}  // namespace stiefel
