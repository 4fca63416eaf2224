#include "msvar/oracle.hpp"

#include "msvar/errors.hpp"
#include "msvar/rng.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace msvar {

namespace {

/// Effective steps and noise factors of one regime path under a kernel.
struct PathDynamics {
  std::vector<StepMatrices> steps;
  std::vector<Mat> factors;
};

PathDynamics path_dynamics(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas) {
  model.check_path(path, path.size());
  if (!deltas.empty() && deltas.size() != path.size()) fail(ErrorKind::ShapeMismatch, "kernel length differs from path");
  PathDynamics d;
  const auto sigma = covariance_path(model, path);
  for (std::size_t s = 0; s < path.size(); ++s) {
    StepMatrices st = model.step(path[s]);
    if (!deltas.empty()) st += deltas[s];
    d.steps.push_back(std::move(st));
    d.factors.push_back(checked_cholesky(sigma[s], "covariance"));
  }
  return d;
}

void run_dynamics(const PathDynamics& d, const PathState& state, Trajectory& traj, RandomStream& rng, Vec& eps,
                  double sign) {
  for (int s = state.time() + 1; s <= state.horizon(); ++s) {
    const auto i = static_cast<std::size_t>(s - 1);
    rng.fill_normal(eps);
    traj.at(s) = apply_step(d.steps[i], state.exogenous[i], traj, s) + sign * (d.factors[i] * eps);
  }
}

}  // namespace

Trajectory simulate_under_q(const ValidatedModel& model, const PathState& state, const RegimePath& path,
                            const KernelDeltas& deltas, std::uint64_t seed) {
  validate_state(model, state);
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  const auto d = path_dynamics(model, path, deltas);
  Trajectory traj = trajectory_from_state(state, model.n());
  RandomStream rng(substream_seed(seed, 0));
  Vec eps(model.n());
  run_dynamics(d, state, traj, rng, eps, 1.0);
  return traj;
}

std::vector<Trajectory> simulate_under_q(const ValidatedModel& model, const PathState& state, const RegimePath& path,
                                         const KernelDeltas& deltas, std::uint64_t seed, std::size_t n_paths) {
  validate_state(model, state);
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  const auto d = path_dynamics(model, path, deltas);
  std::vector<Trajectory> out;
  out.reserve(n_paths);
  Vec eps(model.n());
  for (std::size_t i = 0; i < n_paths; ++i) {
    Trajectory traj = trajectory_from_state(state, model.n());
    RandomStream rng(substream_seed(seed, i));
    run_dynamics(d, state, traj, rng, eps, 1.0);
    out.push_back(std::move(traj));
  }
  return out;
}

PathFunctional rate_discount(int coord, int t, int u) {
  if (u < t) fail(ErrorKind::IndexOutOfRange, "discount end precedes its start");
  return [coord, t, u](const Trajectory& y) {
    double s = 0.0;
    for (int m = t; m < u; ++m) s += y.at(m)(coord);
    return std::exp(-s);
  };
}

PathFunctional constant_discount(double rate, int t, int u) {
  const double d = std::pow(1.0 + rate, -(u - t));
  return [d](const Trajectory&) { return d; };
}

std::vector<Estimate> mc_price_many(const ValidatedModel& model, const PathState& state,
                                    const std::vector<WeightedPath>& paths, const KernelFactory& kernel,
                                    const std::vector<PathFunctional>& discounted_payoffs, const McOptions& mc) {
  validate_state(model, state);
  if (paths.empty()) fail(ErrorKind::ValidationError, "no regime paths to sample");
  const int n = model.n();
  const double work = static_cast<double>(mc.paths) * state.horizon() * n * n * model.p();
  if (work > mc.max_work) fail(ErrorKind::McBudgetExceeded, "Monte Carlo request exceeds the work budget");

  std::vector<PathDynamics> dyn;
  Vec probs(static_cast<Eigen::Index>(paths.size()));
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& path = paths[i].path;
    dyn.push_back(path_dynamics(model, path, kernel ? kernel(path, covariance_path(model, path)) : KernelDeltas{}));
    probs(static_cast<Eigen::Index>(i)) = std::max(0.0, paths[i].weight);
  }
  if (!(probs.sum() > 0.0)) fail(ErrorKind::ValidationError, "regime path weights are all zero");
  probs /= probs.sum();

  const std::size_t k = discounted_payoffs.size();
  const std::size_t units = mc.antithetic ? (mc.paths + 1) / 2 : mc.paths;
  const std::size_t blocks = (units + std::max<std::size_t>(mc.block_size, 1) - 1) / std::max<std::size_t>(mc.block_size, 1);
  std::vector<std::vector<MomentAccumulator>> acc(blocks, std::vector<MomentAccumulator>(k));
  for_each_block(units, mc.block_size, mc.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    RandomStream rng(substream_seed(mc.seed, b));
    Trajectory traj = trajectory_from_state(state, n);
    Trajectory anti = traj;
    Vec eps(n);
    std::vector<double> vals(k);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& d = dyn[static_cast<std::size_t>(rng.categorical(probs))];
      if (!mc.antithetic) {
        run_dynamics(d, state, traj, rng, eps, 1.0);
        for (std::size_t j = 0; j < k; ++j) acc[b][j].add(discounted_payoffs[j](traj));
        continue;
      }
      // Antithetic twin replays the same normals with the opposite sign.
      RandomStream twin = rng;
      run_dynamics(d, state, traj, rng, eps, 1.0);
      run_dynamics(d, state, anti, twin, eps, -1.0);
      for (std::size_t j = 0; j < k; ++j)
        acc[b][j].add(0.5 * (discounted_payoffs[j](traj) + discounted_payoffs[j](anti)));
    }
  });
  std::vector<Estimate> out;
  for (std::size_t j = 0; j < k; ++j) {
    MomentAccumulator total;
    for (const auto& a : acc) total.merge(a[j]);
    out.push_back(total.estimate());
  }
  return out;
}

Estimate mc_price(const ValidatedModel& model, const PathState& state, const std::vector<WeightedPath>& paths,
                  const KernelFactory& kernel, const PathFunctional& payoff, const PathFunctional& discount,
                  const McOptions& mc) {
  const PathFunctional f = [&](const Trajectory& y) {
    const double v = payoff(y);
    return v == 0.0 ? 0.0 : discount(y) * v;
  };
  return mc_price_many(model, state, paths, kernel, {f}, mc).front();
}

namespace {

constexpr unsigned kMaxDepth = 15;

double gk_integrate(const std::function<double(double)>& g, double a, double b, double tol, double& err) {
  double e = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, a, b, kMaxDepth, tol, &e);
  err += e;
  return v;
}

}  // namespace

double quad_expectation_1d(const std::function<double(double)>& f, double mu, double sigma, double tol,
                           const std::vector<double>& breaks) {
  if (sigma < 0.0) fail(ErrorKind::ValidationError, "quadrature needs a nonnegative standard deviation");
  if (sigma == 0.0) return f(mu);
  std::vector<double> cuts{-10.0, 10.0};
  for (double x : breaks) {
    const double z = (x - mu) / sigma;
    if (z > -10.0 && z < 10.0) cuts.push_back(z);
  }
  std::sort(cuts.begin(), cuts.end());
  const std::function<double(double)> g = [&](double z) { return f(mu + sigma * z) * norm_pdf(z); };
  double total = 0.0, err = 0.0;
  const double piece_tol = tol * 1e-2;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i + 1] > cuts[i]) total += gk_integrate(g, cuts[i], cuts[i + 1], piece_tol, err);
  if (!(err <= tol)) fail(ErrorKind::ToleranceNotMet, "quadrature error estimate above tolerance");
  return total;
}

double quad_expectation_2d(const std::function<double(double, double)>& f, const Vec& mean, const Mat& cov,
                           double tol, const std::function<std::vector<double>(double)>& inner_breaks) {
  if (mean.size() != 2 || cov.rows() != 2 || cov.cols() != 2) fail(ErrorKind::ShapeMismatch, "2D quadrature needs 2x2");
  const Mat l = checked_cholesky(cov, "quadrature covariance");
  double inner_err = 0.0, outer_err = 0.0;
  const std::function<double(double)> outer = [&](double z1) {
    const std::function<double(double)> inner = [&](double z2) {
      const double x1 = mean(0) + l(0, 0) * z1;
      const double x2 = mean(1) + l(1, 0) * z1 + l(1, 1) * z2;
      return f(x1, x2) * norm_pdf(z2);
    };
    const double x1 = mean(0) + l(0, 0) * z1;
    std::vector<double> cuts{-10.0, 10.0};
    if (inner_breaks)
      for (double x2 : inner_breaks(x1)) {
        const double z2 = (x2 - mean(1) - l(1, 0) * z1) / l(1, 1);
        if (z2 > -10.0 && z2 < 10.0) cuts.push_back(z2);
      }
    std::sort(cuts.begin(), cuts.end());
    double e = 0.0, v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (cuts[i + 1] > cuts[i]) v += gk_integrate(inner, cuts[i], cuts[i + 1], tol * 1e-3, e);
    inner_err = std::max(inner_err, e);
    return v * norm_pdf(z1);
  };
  const double total = gk_integrate(outer, -10.0, 10.0, tol * 1e-2, outer_err);
  if (!(outer_err + inner_err <= tol)) fail(ErrorKind::ToleranceNotMet, "2D quadrature error estimate above tolerance");
  return total;
}

Estimate mc_expectation_2d(const std::function<double(double, double)>& f, const Vec& mean, const Mat& cov,
                           std::size_t n, std::uint64_t seed) {
  const Mat l = checked_cholesky(cov, "sampling covariance");
  RandomStream rng(substream_seed(seed, 0));
  MomentAccumulator acc;
  for (std::size_t i = 0; i < n; ++i) {
    const double z1 = rng.normal(), z2 = rng.normal();
    acc.add(f(mean(0) + l(0, 0) * z1, mean(1) + l(1, 0) * z1 + l(1, 1) * z2));
  }
  return acc.estimate();
}

}  // namespace msvar
