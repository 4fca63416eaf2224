#include "msvar/rng.hpp"

namespace msvar {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t master, std::uint64_t stream) noexcept {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (stream + 1));
}

int RandomStream::categorical(const Vec& probs) {
  const double u = uniform();
  double acc = 0.0;
  int last_positive = 0;
  for (int j = 0; j < probs.size(); ++j) {
    if (probs(j) <= 0.0) continue;
    last_positive = j;
    acc += probs(j);
    if (u < acc) return j;
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

}  // namespace msvar
