#include "stiefel/eta_table.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "stiefel/error.hpp"
#include "stiefel/parallel.hpp"

namespace stiefel {

using nlohmann::json;

std::vector<double> EtaGridSpec::nodes_vector() const {
  if (nodes < 2 || !(min > 0.0) || !(max > min)) {
    fail(ErrorCode::kDomain, "eta grid needs nodes >= 2 and 0 < min < max");
  }
  std::vector<double> out(static_cast<std::size_t>(nodes));
  for (int i = 0; i < nodes; ++i) {
    const double f = static_cast<double>(i) / static_cast<double>(nodes - 1);
    out[static_cast<std::size_t>(i)] =
        log_spaced ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
  }
  out.front() = min;
  out.back() = max;
  return out;
}

void EtaTable::validate() const {
  manifold.validate();
  const std::size_t m = grid.size();
  if (m < 1 || values.size() != m || raw_values.size() != m || std_errors.size() != m ||
      rejected.size() != m) {
    fail(ErrorCode::kDomain, "eta table columns have inconsistent lengths");
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::isfinite(grid[i]) || !std::isfinite(values[i])) fail(ErrorCode::kNonFinite, "eta table entry");
    if (!(grid[i] > (i == 0 ? 0.0 : grid[i - 1]))) fail(ErrorCode::kDomain, "eta grid must be strictly increasing and positive");
    if (!(values[i] > (i == 0 ? 0.0 : values[i - 1]))) fail(ErrorCode::kDomain, "eta values must be strictly increasing and positive");
  }
}

std::vector<double> isotonic_increasing(const std::vector<double>& values,
                                        const std::vector<double>& weights) {
  if (values.size() != weights.size()) fail(ErrorCode::kDimension, "isotonic: weight count mismatch");
  struct Block {
    double mean;
    double weight;
    std::size_t length;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean >= blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.length += top.length;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.length, b.mean);
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) out[i] = out[i - 1] + 1e-12;
  }
  return out;
}

EtaTable build_eta_table(ManifoldDims dims, const EtaGridSpec& grid_spec, std::size_t draws,
                         std::uint64_t base_seed, const EtaBuildOptions& options) {
  dims.validate();
  const std::vector<double> grid = grid_spec.nodes_vector();
  const bool sphere = dims.n == 3 && dims.k == 1;
  EtaMethod method = options.method;
  if (method == EtaMethod::kAuto) method = sphere ? EtaMethod::kQuadrature : EtaMethod::kMonteCarlo;
  if (method == EtaMethod::kQuadrature && !sphere) {
    fail(ErrorCode::kDomain, "quadrature eta is only available on St(3,1)");
  }

  const std::size_t m = grid.size();
  std::vector<EtaEstimate> estimates(m);
  std::vector<char> unreliable(m, 0);
  std::atomic<std::size_t> first_bad{m};
  parallel_for(m, options.workers, [&](std::size_t i) {
    if (i > first_bad.load()) return;
    if (method == EtaMethod::kQuadrature) {
      estimates[i] = {eta_closed_form_s2(grid[i]), 0.0, 0, 0};
      return;
    }
    Rng rng(derive_seed(base_seed, kEtaStreamTag, i));
    try {
      estimates[i] = eta_monte_carlo(dims, grid[i], draws, rng, options.monte_carlo);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kUnreliableRegime || !options.truncate_unreliable_tail) throw;
      unreliable[i] = 1;
      std::size_t cur = first_bad.load();
      while (i < cur && !first_bad.compare_exchange_weak(cur, i)) {
      }
    }
  });

  std::size_t keep = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (unreliable[i]) {
      keep = i;
      break;
    }
  }
  if (keep < 2) {
    fail(ErrorCode::kUnreliableRegime, "eta table: fewer than two reliable grid nodes");
  }

  EtaTable table;
  table.manifold = dims;
  table.method = method == EtaMethod::kQuadrature ? "quadrature" : "monte-carlo";
  table.sample_count = method == EtaMethod::kQuadrature ? 0 : draws;
  table.base_seed = base_seed;
  if (keep < m) table.truncated_above = grid[keep];
  std::vector<double> weights;
  for (std::size_t i = 0; i < keep; ++i) {
    table.grid.push_back(grid[i]);
    table.raw_values.push_back(estimates[i].estimate);
    table.std_errors.push_back(estimates[i].std_error);
    table.rejected.push_back(estimates[i].rejected);
  }
  const bool weighted = std::all_of(table.std_errors.begin(), table.std_errors.end(),
                                    [](double se) { return se > 0.0; });
  for (double se : table.std_errors) weights.push_back(weighted ? 1.0 / (se * se) : 1.0);
  table.values = isotonic_increasing(table.raw_values, weights);
  table.validate();
  return table;
}

double eta_forward(const EtaTable& table, double sigma2) {
  const auto& g = table.grid;
  const auto& v = table.values;
  if (!(sigma2 >= 0.0) || sigma2 > g.back()) {
    fail(ErrorCode::kExtrapolation, "eta_forward: sigma2=" + std::to_string(sigma2) +
                                        " outside [0, " + std::to_string(g.back()) + "]");
  }
  const auto it = std::lower_bound(g.begin(), g.end(), sigma2);
  const auto i = static_cast<std::size_t>(it - g.begin());
  if (*it == sigma2) return v[i];
  const double g0 = i == 0 ? 0.0 : g[i - 1];
  const double v0 = i == 0 ? 0.0 : v[i - 1];
  const double f = (sigma2 - g0) / (g[i] - g0);
  return v0 + f * (v[i] - v0);
}

double eta_inverse(const EtaTable& table, double p) {
  const auto& g = table.grid;
  const auto& v = table.values;
  if (!(p >= 0.0) || p > v.back()) {
    fail(ErrorCode::kExtrapolation, "eta_inverse: p=" + std::to_string(p) + " outside [0, " +
                                        std::to_string(v.back()) + "]");
  }
  const auto it = std::lower_bound(v.begin(), v.end(), p);
  const auto i = static_cast<std::size_t>(it - v.begin());
  if (*it == p) return g[i];
  const double g0 = i == 0 ? 0.0 : g[i - 1];
  const double v0 = i == 0 ? 0.0 : v[i - 1];
  const double f = (p - v0) / (v[i] - v0);
  return g0 + f * (g[i] - g0);
}

std::string serialize_eta_table(const EtaTable& table) {
  json j;
  j["format"] = "stiefel-eta-table";
  j["version"] = kEtaTableFormatVersion;
  j["manifold"] = {{"n", table.manifold.n}, {"k", table.manifold.k}};
  j["method"] = table.method;
  j["draws_per_node"] = table.sample_count;
  j["base_seed"] = table.base_seed;
  j["truncated_above"] = table.truncated_above ? json(*table.truncated_above) : json(nullptr);
  j["grid"] = table.grid;
  j["values"] = table.values;
  j["raw_values"] = table.raw_values;
  j["std_errors"] = table.std_errors;
  j["rejected"] = table.rejected;
  j["provenance"] = table.provenance.empty() ? json(nullptr) : json::parse(table.provenance);
  return j.dump(1) + "\n";
}

EtaTable parse_eta_table(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "stiefel-eta-table") {
      fail(ErrorCode::kIo, "not an eta table file");
    }
    if (j.at("version").get<int>() != kEtaTableFormatVersion) {
      fail(ErrorCode::kIo, "unsupported eta table version " + j.at("version").dump());
    }
    EtaTable t;
    t.manifold = {j.at("manifold").at("n").get<int>(), j.at("manifold").at("k").get<int>()};
    t.method = j.at("method").get<std::string>();
    t.sample_count = j.at("draws_per_node").get<std::uint64_t>();
    t.base_seed = j.at("base_seed").get<std::uint64_t>();
    if (!j.at("truncated_above").is_null()) t.truncated_above = j.at("truncated_above").get<double>();
    t.grid = j.at("grid").get<std::vector<double>>();
    t.values = j.at("values").get<std::vector<double>>();
    t.raw_values = j.at("raw_values").get<std::vector<double>>();
    t.std_errors = j.at("std_errors").get<std::vector<double>>();
    t.rejected = j.at("rejected").get<std::vector<std::uint64_t>>();
    if (!j.at("provenance").is_null()) t.provenance = j.at("provenance").dump();
    t.validate();
    return t;
  } catch (const json::exception& e) {
    fail(ErrorCode::kIo, std::string("malformed eta table: ") + e.what());
  }
}

void save_eta_table(const EtaTable& table, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  out << serialize_eta_table(table);
  if (!out) fail(ErrorCode::kIo, "write failed for " + path.string());
}

EtaTable load_eta_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_eta_table(buf.str());
}

}  // namespace stiefel
