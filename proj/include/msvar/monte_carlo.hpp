#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace msvar {

struct Estimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

struct McOptions {
  std::size_t paths = 100000;
  std::uint64_t seed = 1;
  bool antithetic = false;
  unsigned threads = 1;  ///< 0 picks the hardware concurrency
  std::size_t block_size = 4096;
  double max_work = 1e11;  ///< rough flop budget; larger requests raise McBudgetExceeded
};

/// Running mean and sum of squared deviations; merge() combines blocks in a fixed order.
struct MomentAccumulator {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const MomentAccumulator& other);
  [[nodiscard]] double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  [[nodiscard]] Estimate estimate() const;
};

/// Splits [0, total) into blocks of `block_size` and runs body(block, begin, end) for each.
/// Block b always covers the same range, so results keyed by block are thread-count independent.
void for_each_block(std::size_t total, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

}  // namespace msvar
