#pragma once

#include <cstdint>
#include <random>

#include "stiefel/linalg.hpp"

namespace stiefel {

/// SplitMix64 finalizer, used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// seed = splitmix64(splitmix64(splitmix64(base) ^ a) ^ b). Realization i of
/// sweep cell c uses derive_seed(base, c, i); eta node j uses
/// derive_seed(base, kEtaStreamTag, j).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) noexcept;

inline constexpr std::uint64_t kEtaStreamTag = 0x657461ULL;  // "eta"

/// Caller-owned sequential random stream. Not shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }

  /// rows x cols matrix of i.i.d. N(0, 1), filled row by row.
  Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace stiefel
