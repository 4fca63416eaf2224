#pragma once

#include "msvar/linalg.hpp"

#include <cstdint>
#include <random>

namespace msvar {

/// SplitMix64 finalizer.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of substream `stream` under `master`: splitmix64(master + golden * (stream + 1)).
/// Monte Carlo work is cut into fixed-size blocks and block b always draws from substream b,
/// so estimates do not depend on how blocks are spread over threads.
[[nodiscard]] std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) noexcept;

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  void fill_normal(Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = normal_(engine_);
  }
  /// Index drawn from a probability vector by inversion.
  int categorical(const Vec& probs);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace msvar
