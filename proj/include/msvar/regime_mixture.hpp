#pragma once

#include "msvar/girsanov.hpp"
#include "msvar/model.hpp"
#include "msvar/monte_carlo.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace msvar {

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 20;

/// Regime paths with probabilities. For future weights the paths cover s_{t+1}..s_T;
/// for filtered weights they cover s_1..s_t.
struct PathWeights {
  int t = 0;
  int T = 0;
  std::vector<RegimePath> paths;
  std::vector<double> weights;
};

/// All N^len paths in lexicographic order, last period varying fastest.
[[nodiscard]] std::vector<RegimePath> enumerate_paths(int n_regimes, int length, std::size_t cap);

/// f(s̄_t^c | s̄_t) = ∏_{m=t+1}^T p_{s_{m-1}s_m} for every future path; `prefix` holds s_1..s_t.
[[nodiscard]] PathWeights future_path_weights(const ValidatedModel& model, const RegimePath& prefix, int T,
                                              std::size_t cap = kDefaultEnumerationCap);

/// Weights of s_1..s_t proportional to the prefix density of the observed data under the kernel
/// times ∏_{m=1}^t p_{s_{m-1}s_m}, normalised in log space.
[[nodiscard]] PathWeights filtered_path_weights(const ValidatedModel& model, const PathState& state,
                                                const KernelFactory& kernel, std::size_t cap = kDefaultEnumerationCap);

/// Either a known regime prefix s_1..s_t or a filter over it from the observed data.
struct Conditioning {
  enum class Kind { KnownPrefix, Filtered };
  Kind kind = Kind::KnownPrefix;
  RegimePath prefix;
  std::size_t cap = kDefaultEnumerationCap;

  [[nodiscard]] static Conditioning known(RegimePath prefix) { return {Kind::KnownPrefix, std::move(prefix)}; }
  [[nodiscard]] static Conditioning filtered() { return {Kind::Filtered, {}}; }
};

struct WeightedPath {
  RegimePath path;  ///< s_1..s_T
  double weight = 0.0;
};

/// Full regime paths with their conditional probabilities given the conditioning information.
[[nodiscard]] std::vector<WeightedPath> conditioning_paths(const ValidatedModel& model, const PathState& state,
                                                           const Conditioning& cond, const KernelFactory& filter_kernel);

/// Σ_paths weight * value(path).
[[nodiscard]] double mix_over_paths(const std::vector<WeightedPath>& paths,
                                    const std::function<double(const RegimePath&)>& value);

struct ParameterDraw {
  ValidatedModel model;
  double weight = 1.0;
};

/// Weighted mean of an exact conditional price over parameter draws, with its standard error.
[[nodiscard]] Estimate rao_blackwell_price(const std::vector<ParameterDraw>& draws,
                                           const std::function<double(const ParameterDraw&)>& inner);

/// Weighted mean and standard error of arbitrary per-draw values.
[[nodiscard]] Estimate weighted_mean(const std::vector<double>& values, const std::vector<double>& weights);

}  // namespace msvar
