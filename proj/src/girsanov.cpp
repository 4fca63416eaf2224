#include "msvar/girsanov.hpp"

#include "msvar/errors.hpp"
#include "msvar/rng.hpp"

#include <cmath>
#include <string>

namespace msvar {

namespace {

int stacked_size(const std::vector<Mat>& sigma) {
  int total = 0;
  for (const auto& s : sigma) total += static_cast<int>(s.rows());
  return total;
}

void check_constraint(const std::vector<Mat>& sigma, const KernelConstraint& c) {
  const int nt = stacked_size(sigma);
  if (c.a.cols() != nt) fail(ErrorKind::ShapeMismatch, "constraint has " + std::to_string(c.a.cols()) +
                                                           " columns, kernel has " + std::to_string(nt));
  if (c.a.rows() != c.b.size()) fail(ErrorKind::ShapeMismatch, "constraint rows and b differ in length");
  if (c.a.rows() > nt || numerical_rank(c.a) < c.a.rows())
    fail(ErrorKind::RankDeficientConstraint, "constraint matrix does not have full row rank");
}

/// Σ̄ D M with D a per-block scalar.
Mat block_scale(const std::vector<Mat>& sigma, const Vec& scale, const Mat& m) {
  Mat out(m.rows(), m.cols());
  int off = 0;
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    const auto sz = sigma[t].rows();
    out.middleRows(off, sz) = scale(static_cast<Eigen::Index>(t)) * (sigma[t] * m.middleRows(off, sz));
    off += static_cast<int>(sz);
  }
  return out;
}

/// Σ̄ D A'(A Σ̄ D A')^{-1} b.
Vec weighted_min_norm(const std::vector<Mat>& sigma, const Vec& scale, const KernelConstraint& c) {
  const Mat sat = block_scale(sigma, scale, c.a.transpose());
  const Mat gram = c.a * sat;
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorKind::RankDeficientConstraint, "A Σ A' is not positive definite");
  return sat * llt.solve(c.b);
}

}  // namespace

Vec entropy_kernel(const std::vector<Mat>& sigma, const KernelConstraint& c) {
  check_constraint(sigma, c);
  return weighted_min_norm(sigma, Vec::Ones(static_cast<Eigen::Index>(sigma.size())), c);
}

Vec kernel_quadratic_forms(const std::vector<Mat>& sigma, const Vec& theta) {
  Vec x(static_cast<Eigen::Index>(sigma.size()));
  int off = 0;
  for (std::size_t t = 0; t < sigma.size(); ++t) {
    const auto sz = sigma[t].rows();
    const Vec th = theta.segment(off, sz);
    x(static_cast<Eigen::Index>(t)) = th.dot(sigma[t].llt().solve(th));
    off += static_cast<int>(sz);
  }
  return x;
}

double entropy_objective(const std::vector<Mat>& sigma, const Vec& theta) {
  return 0.5 * kernel_quadratic_forms(sigma, theta).sum();
}

double variance_objective(const std::vector<Mat>& sigma, const Vec& theta) {
  const Vec x = kernel_quadratic_forms(sigma, theta);
  // A zero factor wins over an overflowing one.
  if ((x.array() == 0.0).any()) return 0.0;
  double prod = 1.0;
  for (double v : x) prod *= std::expm1(v);
  return prod;
}

VarianceKernelResult variance_kernel(const std::vector<Mat>& sigma, const KernelConstraint& c,
                                     const VarianceKernelOptions& opts) {
  check_constraint(sigma, c);
  if (!(opts.damping > 0.0 && opts.damping <= 1.0)) fail(ErrorKind::ValidationError, "damping must lie in (0,1]");
  VarianceKernelResult res;
  res.theta = weighted_min_norm(sigma, Vec::Ones(static_cast<Eigen::Index>(sigma.size())), c);
  for (int it = 1; it <= opts.max_iter; ++it) {
    const Vec x = kernel_quadratic_forms(sigma, res.theta);
    if ((x.array() < 1e-12).any())
      fail(ErrorKind::DegenerateKernel, "a kernel block vanished; the variance weights are singular");
    // Λ_t^{-1} = (λ_t - 1)/λ_t = -expm1(-x_t)
    const Vec inv_lambda = (-x).unaryExpr([](double v) { return -std::expm1(v); });
    const Vec next = weighted_min_norm(sigma, inv_lambda, c);
    res.residual = (next - res.theta).lpNorm<Eigen::Infinity>();
    res.iterations = it;
    if (!next.allFinite()) fail(ErrorKind::NoConvergence, "variance kernel iteration diverged");
    if (res.residual < opts.tol) {
      res.theta = next;
      return res;
    }
    res.theta = (1.0 - opts.damping) * res.theta + opts.damping * next;
  }
  fail(ErrorKind::NoConvergence, "variance kernel did not converge in " + std::to_string(opts.max_iter) +
                                     " iterations (residual " + std::to_string(res.residual) + ")");
}

KernelFactory zero_kernel(const ValidatedModel& model) {
  const int n = model.n(), k = model.k(), p = model.p();
  return [n, k, p](const RegimePath& path, const std::vector<Mat>&) {
    return KernelDeltas(path.size(), StepMatrices::zero(n, k, p));
  };
}

Mat asset_projection(const Mat& sigma, const Mat& m2) {
  const Mat sm = sigma * m2.transpose();
  Eigen::LLT<Mat> llt(m2 * sm);
  if (llt.info() != Eigen::Success) fail(ErrorKind::SingularAssetCovariance, "asset block of Σ_t is singular");
  return llt.solve(sm.transpose()).transpose();
}

StepMatrices normal_kernel_step(const ValidatedModel& model, const NormalMarket& market, int regime, const Mat& sigma) {
  const Mat m2 = market.m2();
  const Mat theta_map = asset_projection(sigma, m2);
  const auto& a = model.step(regime);
  StepMatrices d;
  d.m0 = -theta_map * (m2 * a.m0);
  for (int m = 1; m <= model.p(); ++m) {
    Mat hat = -m2 * a.lags[static_cast<std::size_t>(m - 1)];
    if (m == 1) hat += (1.0 + market.rate) * m2;
    d.lags.push_back(theta_map * hat);
  }
  return d;
}

Vec lognormal_alpha(const FxMarket& market, const Mat& sigma) {
  const Mat m2 = market.m2();
  const Mat r2 = market.r2();
  const Mat v = r2 * (m2 * sigma * m2.transpose()) * r2.transpose();
  return 0.5 * r2.triangularView<Eigen::Upper>().solve(Vec(v.diagonal()));
}

StepMatrices lognormal_kernel_step(const ValidatedModel& model, const FxMarket& market, int regime, const Mat& sigma) {
  const Mat m2 = market.m2();
  const Mat theta_map = asset_projection(sigma, m2);
  const auto& a = model.step(regime);
  const Mat ident = Mat::Identity(model.n(), model.n());
  StepMatrices d;
  d.m0 = -theta_map * (m2 * a.m0);
  d.m0.col(0) -= theta_map * lognormal_alpha(market, sigma);
  for (int m = 1; m <= model.p(); ++m) {
    Mat hat = -m2 * a.lags[static_cast<std::size_t>(m - 1)];
    if (m == 1) hat = m2 * (ident - a.lags[0]) + market.c();
    d.lags.push_back(theta_map * hat);
  }
  return d;
}

namespace {

Vec regression_mean(const ValidatedModel& model, int regime, const PathState& state, int t) {
  const auto& a = model.step(regime);
  Vec mean = a.m0 * state.exogenous[static_cast<std::size_t>(t - 1)];
  for (int m = 1; m <= model.p(); ++m) mean.noalias() += a.lags[static_cast<std::size_t>(m - 1)] * state.y(t - m);
  return mean;
}

}  // namespace

Vec normal_theta_hat(const ValidatedModel& model, const NormalMarket& market, int regime, const PathState& state,
                     int t) {
  return market.m2() * ((1.0 + market.rate) * state.y(t - 1) - regression_mean(model, regime, state, t));
}

Vec lognormal_theta_hat(const ValidatedModel& model, const FxMarket& market, int regime, const PathState& state,
                        int t) {
  const Vec prev = state.y(t - 1);
  return market.m2() * (prev - regression_mean(model, regime, state, t)) + market.c() * prev;
}

Vec contract_kernel(const StepMatrices& deltas, const PathState& state, int t) {
  Vec theta = deltas.m0 * state.exogenous[static_cast<std::size_t>(t - 1)];
  for (std::size_t m = 0; m < deltas.lags.size(); ++m)
    theta.noalias() += deltas.lags[m] * state.y(t - 1 - static_cast<int>(m));
  return theta;
}

KernelFactory normal_kernel(const ValidatedModel& model, const NormalMarket& market) {
  market.validate(model.n());
  return [model, market](const RegimePath& path, const std::vector<Mat>& sigma) {
    KernelDeltas out;
    for (std::size_t t = 0; t < path.size(); ++t) out.push_back(normal_kernel_step(model, market, path[t], sigma[t]));
    return out;
  };
}

KernelFactory lognormal_kernel(const ValidatedModel& model, const FxMarket& market) {
  market.validate(model.n());
  return [model, market](const RegimePath& path, const std::vector<Mat>& sigma) {
    KernelDeltas out;
    for (std::size_t t = 0; t < path.size(); ++t)
      out.push_back(lognormal_kernel_step(model, market, path[t], sigma[t]));
    return out;
  };
}

namespace {

GirsanovKernel finish_kernel(KernelDeltas deltas, const PathState& state) {
  GirsanovKernel k;
  k.deltas = std::move(deltas);
  const int last = std::min(state.time() + 1, state.horizon());
  for (int t = 1; t <= last; ++t) k.theta.push_back(contract_kernel(k.deltas[static_cast<std::size_t>(t - 1)], state, t));
  return k;
}

}  // namespace

GirsanovKernel market_kernel_normal(const ValidatedModel& model, const NormalMarket& market, const RegimePath& path,
                                    const PathState& state) {
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  return finish_kernel(normal_kernel(model, market)(path, covariance_path(model, path)), state);
}

GirsanovKernel market_kernel_lognormal(const ValidatedModel& model, const FxMarket& market, const RegimePath& path,
                                       const PathState& state) {
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  return finish_kernel(lognormal_kernel(model, market)(path, covariance_path(model, path)), state);
}

StatePriceStats state_price_stats(const std::vector<Mat>& sigma, const Vec& theta, std::uint64_t seed,
                                  std::size_t paths) {
  StatePriceStats st;
  const Vec x = kernel_quadratic_forms(sigma, theta);
  st.entropy = 0.5 * x.sum();
  st.variance_formula = 1.0;
  for (double v : x) st.variance_formula *= std::expm1(v);
  st.variance_exact = std::expm1(x.sum());
  if (paths < 2) return st;

  // θ'Σ^{-1}ξ = (L^{-1}θ)'ε when ξ = Lε.
  std::vector<Vec> z;
  int off = 0;
  for (const auto& s : sigma) {
    const Mat l = checked_cholesky(s, "covariance");
    z.push_back(l.triangularView<Eigen::Lower>().solve(Vec(theta.segment(off, s.rows()))));
    off += static_cast<int>(s.rows());
  }
  RandomStream rng(substream_seed(seed, 0));
  double mean = 0.0, m2 = 0.0;
  std::vector<double> samples(paths);
  for (std::size_t i = 0; i < paths; ++i) {
    double expo = 0.0;
    for (const auto& zt : z)
      for (Eigen::Index j = 0; j < zt.size(); ++j) expo += zt(j) * rng.normal();
    samples[i] = std::exp(expo - st.entropy);
    const double d = samples[i] - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (samples[i] - mean);
  }
  const auto n = static_cast<double>(paths);
  st.variance_mc = m2 / (n - 1.0);
  double m4 = 0.0;
  for (double s : samples) m4 += std::pow(s - mean, 4);
  m4 /= n;
  st.variance_mc_se = std::sqrt(std::max(0.0, m4 - st.variance_mc * st.variance_mc) / n);
  return st;
}

}  // namespace msvar
