#include "msvar/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace msvar {

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.count == 0.0) return;
  if (count == 0.0) {
    *this = other;
    return;
  }
  const double total = count + other.count;
  const double d = other.mean - mean;
  mean += d * other.count / total;
  m2 += other.m2 + d * d * count * other.count / total;
  count = total;
}

Estimate MomentAccumulator::estimate() const {
  return {mean, count > 1.0 ? std::sqrt(variance() / count) : 0.0};
}

void for_each_block(std::size_t total, std::size_t block_size, unsigned threads,
                    const std::function<void(std::size_t, std::size_t, std::size_t)>& body) {
  if (total == 0) return;
  if (block_size == 0) block_size = 1;
  const std::size_t blocks = (total + block_size - 1) / block_size;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const auto run = [&](std::size_t b) { body(b, b * block_size, std::min(total, (b + 1) * block_size)); };
  if (threads == 1 || blocks == 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto workers = std::min<std::size_t>(threads, blocks);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < blocks; b = next++) {
        try {
          run(b);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace msvar
