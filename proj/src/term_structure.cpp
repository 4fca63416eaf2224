#include "msvar/term_structure.hpp"

#include "msvar/errors.hpp"

#include <cmath>

namespace msvar {

namespace {

void check_layout(const ValidatedModel& model, const HjmLayout& layout, const PathState& state) {
  layout.validate();
  if (layout.dim != model.n()) fail(ErrorKind::ShapeMismatch, "hjm layout dimension differs from the model");
  if (layout.horizon != state.horizon()) fail(ErrorKind::ShapeMismatch, "hjm layout horizon differs from the state");
  validate_state(model, state);
}

}  // namespace

HjmConstraintSet hjm_constraints(const ValidatedModel& model, const HjmLayout& layout, const RegimePath& path,
                                 const PathState& state) {
  check_layout(model, layout, state);
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  const int n = model.n(), p = model.p(), T = state.horizon(), t = state.time();
  const int np = n * p;
  const auto comp = companion_form(model, path, state);
  const auto sigma = covariance_path(model, path);
  auto phi = [&](int s) -> const Mat& { return comp[static_cast<std::size_t>(s - 1)].a; };

  Vec ystar(np);
  for (int m = 0; m < p; ++m) ystar.segment(m * n, n) = state.y(t - m);
  const Vec& yt = state.y(t);

  HjmConstraintSet out;
  out.t = t;
  const int rows = std::max(0, T - t - 1);
  out.constraint.a = Mat::Zero(rows, n * (T - t));
  out.constraint.b = Vec::Zero(rows);
  for (int u = t + 2; u <= T; ++u) {
    const int M = u - t - 1, row = u - t - 2;
    double quad = 0.0, drift = 0.0;
    for (int m = 1; m <= M; ++m) {
      Mat prod = Mat::Identity(np, np);
      Mat sum = prod;
      for (int i = m + 1; i <= M; ++i) {
        prod = phi(t + i) * prod;
        sum += prod;
      }
      const Vec a = sum.row(0).head(n).transpose();
      out.constraint.a.block(row, (m - 1) * n, 1, n) = a.transpose();
      quad += a.dot(sigma[static_cast<std::size_t>(t + m - 1)] * a);
      drift += a.dot(comp[static_cast<std::size_t>(t + m - 1)].nu.head(n));
    }
    Vec carry = Vec::Zero(np);
    Vec state_prop = ystar;
    for (int m = 1; m <= M; ++m) {
      state_prop = phi(t + m) * state_prop;
      carry += state_prop;
    }
    double curve = 0.0;
    for (int m = 2; m <= u - t; ++m) curve += yt(m - 1);
    out.constraint.b(row) = 0.5 * quad - drift - carry(0) + curve;
  }
  return out;
}

KernelDeltas hjm_kernel_deltas(const ValidatedModel& model, const HjmLayout& layout, const RegimePath& path,
                               const PathState& state) {
  const auto cs = hjm_constraints(model, layout, path, state);
  const int n = model.n(), T = state.horizon(), t = state.time();
  KernelDeltas deltas(static_cast<std::size_t>(T), StepMatrices::zero(n, model.k(), model.p()));
  if (cs.constraint.a.rows() == 0) return deltas;
  const auto sigma = covariance_path(model, path);
  const std::vector<Mat> future(sigma.begin() + t, sigma.end());
  const Vec theta = entropy_kernel(future, cs.constraint);
  for (int s = t + 1; s <= T; ++s) deltas[static_cast<std::size_t>(s - 1)].m0.col(0) = theta.segment((s - t - 1) * n, n);
  return deltas;
}

KernelFactory hjm_kernel(const ValidatedModel& model, const HjmLayout& layout, const PathState& state) {
  return [model, layout, state](const RegimePath& path, const std::vector<Mat>&) {
    return hjm_kernel_deltas(model, layout, path, state);
  };
}

double curve_log_bond(const Vec& y_t, int t, int u) {
  if (u < t || u - t > y_t.size()) fail(ErrorKind::IndexOutOfRange, "bond maturity outside the curve");
  return -y_t.head(u - t).sum();
}

std::vector<WeightedPath> hjm_paths(const ValidatedModel& model, const PathState& state, const Conditioning& cond) {
  return conditioning_paths(model, state, cond, zero_kernel(model));
}

BondQuote hjm_zcb(const ValidatedModel& model, const HjmLayout& layout, const PathState& state, int u,
                  const Conditioning& cond) {
  check_layout(model, layout, state);
  if (u <= state.time() || u > state.horizon()) fail(ErrorKind::IndexOutOfRange, "bond maturity must lie in (t, T]");
  const auto paths = hjm_paths(model, state, cond);
  BondQuote q;
  q.price = mix_over_paths(paths, [&](const RegimePath& path) {
    const PathLaw pl = make_path_law(model, path, hjm_kernel_deltas(model, layout, path, state), state);
    return std::exp(bond_exponent(pl, u, 0));
  });
  q.exponent = std::log(q.price);
  q.mixture = paths.size() > 1;
  return q;
}

ScalarLaw forward_rate_law(const PathLaw& pl, int v, int u1, int u2, const Vec& mean) {
  if (!(pl.t < v && v <= u1 && u1 < u2 && u2 <= pl.T))
    fail(ErrorKind::IndexOutOfRange, "forward rate needs t < v <= u1 < u2 <= T");
  if (u2 - 1 - v >= pl.n) fail(ErrorKind::IndexOutOfRange, "forward rate beyond the curve");
  Vec c = Vec::Zero(pl.n * (pl.T - pl.t));
  const double inv = 1.0 / (u2 - u1);
  for (int m = u1; m <= u2 - 1; ++m) c((v - pl.t - 1) * pl.n + (m - v)) = inv;
  return {c.dot(mean), std::max(0.0, c.dot(pl.law.cov * c))};
}

double lognormal_call(double mu, double sigma, double strike) {
  if (!(strike > 0.0)) fail(ErrorKind::ValidationError, "log-normal strike must be positive");
  if (sigma <= 0.0) return std::max(std::exp(mu) - strike, 0.0);
  const double d1 = (mu + sigma * sigma - std::log(strike)) / sigma;
  return std::exp(mu + 0.5 * sigma * sigma) * norm_cdf(d1) - strike * norm_cdf(d1 - sigma);
}

double lognormal_put(double mu, double sigma, double strike) {
  if (!(strike > 0.0)) fail(ErrorKind::ValidationError, "log-normal strike must be positive");
  if (sigma <= 0.0) return std::max(strike - std::exp(mu), 0.0);
  const double d1 = (mu + sigma * sigma - std::log(strike)) / sigma;
  return strike * norm_cdf(sigma - d1) - std::exp(mu + 0.5 * sigma * sigma) * norm_cdf(-d1);
}

namespace {

template <class F>
double rate_mixture(const ValidatedModel& model, const HjmLayout& layout, const PathState& state,
                    const Conditioning& cond, F per_path) {
  check_layout(model, layout, state);
  const auto paths = hjm_paths(model, state, cond);
  return mix_over_paths(paths, [&](const RegimePath& path) {
    return per_path(make_path_law(model, path, hjm_kernel_deltas(model, layout, path, state), state));
  });
}

}  // namespace

double price_forward_caplet(const ValidatedModel& model, const HjmLayout& layout, const PathState& state,
                            const RateOptionSpec& spec, const Conditioning& cond) {
  return rate_mixture(model, layout, state, cond, [&](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, spec.v, spec.u1, spec.u2, forward_measure_mean(pl, spec.u2, 0));
    const double sd = std::sqrt(law.variance);
    const double opt = spec.side == OptionSide::Call ? truncated_call(law.mean, sd, spec.strike)
                                                     : truncated_put(law.mean, sd, spec.strike);
    return std::exp(bond_exponent(pl, spec.u2, 0)) * opt;
  });
}

double price_libor_caplet(const ValidatedModel& model, const HjmLayout& layout, const PathState& state,
                          const RateOptionSpec& spec, const Conditioning& cond) {
  const double accrual = spec.u2 - spec.u1;
  if (!(spec.strike > -1.0 / accrual)) fail(ErrorKind::ValidationError, "LIBOR strike must exceed -1/(u2-u1)");
  const double k = 1.0 + spec.strike * accrual;
  return rate_mixture(model, layout, state, cond, [&](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, spec.v, spec.u1, spec.u2, forward_measure_mean(pl, spec.u2, 0));
    const double mu = accrual * law.mean, sd = accrual * std::sqrt(law.variance);
    const double opt = spec.side == OptionSide::Call ? lognormal_call(mu, sd, k) : lognormal_put(mu, sd, k);
    return std::exp(bond_exponent(pl, spec.u2, 0)) * opt / accrual;
  });
}

double price_zcb_option(const ValidatedModel& model, const HjmLayout& layout, const PathState& state, int v, int u,
                        double strike, OptionSide side, const Conditioning& cond) {
  if (!(state.time() < v && v < u && u <= state.horizon()))
    fail(ErrorKind::IndexOutOfRange, "bond option needs t < v < u <= T");
  if (!(strike > 0.0)) fail(ErrorKind::ValidationError, "bond option strike must be positive");
  return rate_mixture(model, layout, state, cond, [&](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, v, v, u, forward_measure_mean(pl, v, 0));
    const double mu = -(u - v) * law.mean, sd = (u - v) * std::sqrt(law.variance);
    const double opt = side == OptionSide::Call ? lognormal_call(mu, sd, strike) : lognormal_put(mu, sd, strike);
    return std::exp(bond_exponent(pl, v, 0)) * opt;
  });
}

}  // namespace msvar
