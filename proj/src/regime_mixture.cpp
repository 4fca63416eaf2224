#include "msvar/regime_mixture.hpp"

#include "msvar/errors.hpp"
#include "msvar/stacked.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace msvar {

std::vector<RegimePath> enumerate_paths(int n_regimes, int length, std::size_t cap) {
  double count = std::pow(static_cast<double>(n_regimes), length);
  if (count > static_cast<double>(cap))
    fail(ErrorKind::EnumerationCapExceeded, std::to_string(n_regimes) + "^" + std::to_string(length) +
                                                " regime paths exceed the cap of " + std::to_string(cap));
  std::vector<RegimePath> out;
  out.reserve(static_cast<std::size_t>(count));
  RegimePath cur(static_cast<std::size_t>(length), 0);
  while (true) {
    out.push_back(cur);
    int pos = length - 1;
    while (pos >= 0 && cur[static_cast<std::size_t>(pos)] == n_regimes - 1) cur[static_cast<std::size_t>(pos--)] = 0;
    if (pos < 0) break;
    ++cur[static_cast<std::size_t>(pos)];
  }
  return out;
}

PathWeights future_path_weights(const ValidatedModel& model, const RegimePath& prefix, int T, std::size_t cap) {
  const int t = static_cast<int>(prefix.size());
  if (t >= T) fail(ErrorKind::IndexOutOfRange, "prefix must be shorter than the horizon");
  model.check_path(prefix, prefix.size());
  PathWeights pw;
  pw.t = t;
  pw.T = T;
  pw.paths = enumerate_paths(model.N(), T - t, cap);
  pw.weights.reserve(pw.paths.size());
  double total = 0.0;
  for (const auto& fut : pw.paths) {
    double w = 1.0;
    int prev = t > 0 ? prefix.back() : -1;
    for (int s : fut) {
      w *= prev < 0 ? model.initial_dist()(s) : model.transition(prev, s);
      prev = s;
    }
    pw.weights.push_back(w);
    total += w;
  }
  for (auto& w : pw.weights) w /= total;
  return pw;
}

PathWeights filtered_path_weights(const ValidatedModel& model, const PathState& state, const KernelFactory& kernel,
                                  std::size_t cap) {
  const int t = state.time();
  if (t < 1) fail(ErrorKind::IndexOutOfRange, "filtering needs at least one observation");
  PathState prefix_state = state;
  prefix_state.exogenous.resize(static_cast<std::size_t>(t));
  const Vec observed = stack_observed(state);

  PathWeights pw;
  pw.t = t;
  pw.T = state.horizon();
  pw.paths = enumerate_paths(model.N(), t, cap);
  std::vector<double> logw;
  logw.reserve(pw.paths.size());
  for (const auto& path : pw.paths) {
    const double prior = markov_path_prob(model, path, 0);
    if (prior <= 0.0) {
      logw.push_back(-std::numeric_limits<double>::infinity());
      continue;
    }
    const auto sigma = covariance_path(model, path);
    const StackedSystem sys(model, path, kernel(path, sigma), prefix_state);
    logw.push_back(sys.log_likelihood_prefix(observed) + std::log(prior));
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(top)) fail(ErrorKind::AllZeroLikelihood, "every regime prefix has zero likelihood");
  double total = 0.0;
  for (double lw : logw) {
    pw.weights.push_back(std::exp(lw - top));
    total += pw.weights.back();
  }
  for (auto& w : pw.weights) w /= total;
  return pw;
}

std::vector<WeightedPath> conditioning_paths(const ValidatedModel& model, const PathState& state,
                                             const Conditioning& cond, const KernelFactory& filter_kernel) {
  const int t = state.time(), T = state.horizon();
  std::vector<WeightedPath> out;
  auto append = [&](const RegimePath& prefix, double prefix_weight) {
    const auto fut = future_path_weights(model, prefix, T, cond.cap);
    for (std::size_t i = 0; i < fut.paths.size(); ++i) {
      RegimePath full = prefix;
      full.insert(full.end(), fut.paths[i].begin(), fut.paths[i].end());
      out.push_back({std::move(full), prefix_weight * fut.weights[i]});
    }
  };
  if (cond.kind == Conditioning::Kind::KnownPrefix || t == 0) {
    const RegimePath prefix = cond.kind == Conditioning::Kind::KnownPrefix ? cond.prefix : RegimePath{};
    if (static_cast<int>(prefix.size()) != t)
      fail(ErrorKind::ShapeMismatch, "known regime prefix must cover the observed periods");
    append(prefix, 1.0);
    return out;
  }
  if (std::pow(static_cast<double>(model.N()), T) > static_cast<double>(cond.cap))
    fail(ErrorKind::EnumerationCapExceeded, "filtered mixture exceeds the enumeration cap");
  const auto filt = filtered_path_weights(model, state, filter_kernel, cond.cap);
  for (std::size_t i = 0; i < filt.paths.size(); ++i)
    if (filt.weights[i] > 0.0) append(filt.paths[i], filt.weights[i]);
  return out;
}

double mix_over_paths(const std::vector<WeightedPath>& paths, const std::function<double(const RegimePath&)>& value) {
  double total = 0.0;
  for (const auto& wp : paths)
    if (wp.weight > 0.0) total += wp.weight * value(wp.path);
  return total;
}

Estimate weighted_mean(const std::vector<double>& values, const std::vector<double>& weights) {
  if (values.size() < 2) fail(ErrorKind::InsufficientDraws, "need at least two draws");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w > 0.0)) fail(ErrorKind::ValidationError, "draw weights must be positive");
    wsum += w;
  }
  Estimate e;
  for (std::size_t i = 0; i < values.size(); ++i) e.estimate += weights[i] / wsum * values[i];
  // n/(n-1) Σ ŵ_i² (g_i - ḡ)² reduces to s²/n for equal weights.
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights[i] / wsum;
    acc += w * w * (values[i] - e.estimate) * (values[i] - e.estimate);
  }
  const auto n = static_cast<double>(values.size());
  e.standard_error = std::sqrt(acc * n / (n - 1.0));
  return e;
}

Estimate rao_blackwell_price(const std::vector<ParameterDraw>& draws,
                             const std::function<double(const ParameterDraw&)>& inner) {
  if (draws.size() < 2) fail(ErrorKind::InsufficientDraws, "need at least two parameter draws");
  std::vector<double> values, weights;
  for (const auto& d : draws) {
    values.push_back(inner(d));
    weights.push_back(d.weight);
  }
  return weighted_mean(values, weights);
}

}  // namespace msvar
