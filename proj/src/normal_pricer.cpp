#include "msvar/normal_pricer.hpp"

#include "msvar/errors.hpp"
#include "msvar/girsanov.hpp"

#include <cmath>

namespace msvar {

WeightScheme arithmetic_weight_builder(WeightKind kind, int n_x, int T, int asset, const Vec& basket) {
  if (n_x < 1 || T < 1) fail(ErrorKind::ShapeMismatch, "weight scheme needs n_x >= 1 and T >= 1");
  WeightScheme w{Mat::Zero(T, n_x)};
  switch (kind) {
    case WeightKind::European:
      if (asset < 0 || asset >= n_x) fail(ErrorKind::IndexOutOfRange, "asset index out of range");
      w.weights(T - 1, asset) = 1.0;
      break;
    case WeightKind::Asian:
      if (asset < 0 || asset >= n_x) fail(ErrorKind::IndexOutOfRange, "asset index out of range");
      w.weights.col(asset).setConstant(1.0 / T);
      break;
    case WeightKind::Basket:
      if (basket.size() != n_x) fail(ErrorKind::IndexOutOfRange, "basket weights must have length n_x");
      w.weights.row(T - 1) = basket.transpose();
      break;
  }
  if (w.weights.isZero(0.0)) fail(ErrorKind::ValidationError, "weight scheme has no nonzero weight");
  return w;
}

ScalarLaw weighted_price_law(const NormalMarket& market, const WeightScheme& scheme, const StackedSystem& sys,
                             const PathState& state) {
  const int t = state.time(), T = sys.horizon(), n = sys.dim();
  if (scheme.weights.rows() != T || scheme.weights.cols() != market.n_x)
    fail(ErrorKind::ShapeMismatch, "weight scheme must be T x n_x");
  const Mat m2 = market.m2();
  ScalarLaw law;
  for (int m = 1; m <= t; ++m) law.mean += scheme.weights.row(m - 1).dot(m2 * state.y(m));
  Vec v = Vec::Zero(n * (T - t));
  for (int m = t + 1; m <= T; ++m) v.segment((m - t - 1) * n, n) = m2.transpose() * scheme.weights.row(m - 1).transpose();
  if (v.isZero(0.0)) return law;
  const GaussianLaw fut = sys.law_conditional_future(t, stack_observed(state));
  law.mean += v.dot(fut.mean);
  law.variance = std::max(0.0, v.dot(fut.cov * v));
  return law;
}

double truncated_call(double mu, double sigma, double strike) {
  if (sigma <= 0.0) return std::max(mu - strike, 0.0);
  const double d = (mu - strike) / sigma;
  return sigma * (norm_pdf(d) + d * norm_cdf(d));
}

double truncated_put(double mu, double sigma, double strike) {
  if (sigma <= 0.0) return std::max(strike - mu, 0.0);
  const double d = (strike - mu) / sigma;
  return sigma * (norm_pdf(d) + d * norm_cdf(d));
}

NormalQuote price_normal_option(const ValidatedModel& model, const NormalMarket& market, const WeightScheme& scheme,
                                double strike, OptionSide side, const PathState& state, const Conditioning& cond) {
  market.validate(model.n());
  validate_state(model, state);
  const auto kernel = normal_kernel(model, market);
  const auto paths = conditioning_paths(model, state, cond, kernel);
  NormalQuote q;
  for (const auto& wp : paths) {
    const auto sigma = covariance_path(model, wp.path);
    const StackedSystem sys(model, wp.path, kernel(wp.path, sigma), state);
    const ScalarLaw law = weighted_price_law(market, scheme, sys, state);
    const double sd = std::sqrt(law.variance);
    const double v = side == OptionSide::Call ? truncated_call(law.mean, sd, strike) : truncated_put(law.mean, sd, strike);
    q.price += wp.weight * v;
    q.expected_underlying += wp.weight * law.mean;
  }
  q.price *= std::pow(1.0 + market.rate, -(state.horizon() - state.time()));
  return q;
}

}  // namespace msvar
