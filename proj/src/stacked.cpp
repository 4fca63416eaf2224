#include "msvar/stacked.hpp"

#include "msvar/errors.hpp"

#include <cmath>
#include <string>

namespace msvar {

namespace {

void check_deltas(const ValidatedModel& model, const KernelDeltas& deltas, int T) {
  if (deltas.empty()) return;
  if (static_cast<int>(deltas.size()) != T) fail(ErrorKind::ShapeMismatch, "kernel must supply Δ for every period");
  for (std::size_t t = 0; t < deltas.size(); ++t) {
    const auto& d = deltas[t];
    if (d.m0.rows() != model.n() || d.m0.cols() != model.k() || static_cast<int>(d.lags.size()) != model.p())
      fail(ErrorKind::ShapeMismatch, "Δ at t=" + std::to_string(t + 1) + " has wrong shape");
    for (const auto& l : d.lags)
      if (l.rows() != model.n() || l.cols() != model.n())
        fail(ErrorKind::ShapeMismatch, "Δ lag block at t=" + std::to_string(t + 1) + " has wrong shape");
  }
}

}  // namespace

StackedSystem::StackedSystem(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas,
                             const PathState& state)
    : horizon_(state.horizon()), dim_(model.n()), path_(path) {
  model.check_path(path, static_cast<std::size_t>(horizon_));
  check_deltas(model, deltas, horizon_);
  const int n = dim_, T = horizon_, p = model.p();

  sigma_ = covariance_path(model, path);
  for (std::size_t t = 0; t < sigma_.size(); ++t)
    factors_.push_back(checked_cholesky(sigma_[t], "covariance at t=" + std::to_string(t + 1)));

  for (int t = 1; t <= T; ++t) {
    StepMatrices s = model.step(path[static_cast<std::size_t>(t - 1)]);
    if (!deltas.empty()) s += deltas[static_cast<std::size_t>(t - 1)];
    steps_.push_back(std::move(s));
  }

  psi_ = Mat::Identity(n * T, n * T);
  delta_ = Vec::Zero(n * T);
  for (int t = 1; t <= T; ++t) {
    const auto& s = steps_[static_cast<std::size_t>(t - 1)];
    Vec d = s.m0 * state.exogenous[static_cast<std::size_t>(t - 1)];
    for (int m = 1; m <= p; ++m) {
      const Mat& a = s.lags[static_cast<std::size_t>(m - 1)];
      if (t - m >= 1)
        psi_.block((t - 1) * n, (t - m - 1) * n, n, n) = -a;
      else
        d.noalias() += a * state.initial[static_cast<std::size_t>(t - m + p - 1)];
    }
    delta_.segment((t - 1) * n, n) = d;
  }
}

StackedSystem build_stacked(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas,
                            const PathState& state) {
  return StackedSystem(model, path, deltas, state);
}

Vec StackedSystem::solve_future(int t, const Vec& rhs) const {
  const int r = dim_ * (horizon_ - t);
  return psi_.bottomRightCorner(r, r).triangularView<Eigen::UnitLower>().solve(rhs);
}

Vec StackedSystem::sigma_future_times(int t, const Vec& v) const {
  Vec out(v.size());
  for (int m = t + 1; m <= horizon_; ++m) {
    const int off = (m - t - 1) * dim_;
    out.segment(off, dim_) = sigma_[static_cast<std::size_t>(m - 1)] * v.segment(off, dim_);
  }
  return out;
}

Mat StackedSystem::future_factor(int t) const {
  if (t < 0 || t >= horizon_) fail(ErrorKind::IndexOutOfRange, "conditioning time must lie in [0, T)");
  const int r = dim_ * (horizon_ - t);
  Mat l = Mat::Zero(r, r);
  for (int m = t + 1; m <= horizon_; ++m) {
    const int off = (m - t - 1) * dim_;
    l.block(off, off, dim_, dim_) = factors_[static_cast<std::size_t>(m - 1)];
  }
  psi_.bottomRightCorner(r, r).triangularView<Eigen::UnitLower>().solveInPlace(l);
  return l;
}

GaussianLaw StackedSystem::law_full() const { return law_conditional_future(0, Vec()); }

GaussianLaw StackedSystem::law_conditional_future(int t, const Vec& observed) const {
  if (t < 0 || t >= horizon_) fail(ErrorKind::IndexOutOfRange, "conditioning time must lie in [0, T)");
  if (observed.size() != dim_ * t) fail(ErrorKind::ShapeMismatch, "observed prefix must have length n*t");
  const int r = dim_ * (horizon_ - t);
  Vec rhs = delta_.tail(r);
  if (t > 0) rhs.noalias() -= psi_.bottomLeftCorner(r, dim_ * t) * observed;
  GaussianLaw law;
  law.mean = solve_future(t, rhs);
  const Mat f = future_factor(t);
  law.cov = f * f.transpose();
  const double scale = std::max(1.0, law.cov.cwiseAbs().maxCoeff());
  if (asymmetry(law.cov) > 1e-10 * scale) fail(ErrorKind::SingularPsi, "conditional covariance lost symmetry");
  law.cov = symmetrize(law.cov);
  return law;
}

double StackedSystem::log_likelihood_prefix(const Vec& observed) const {
  if (observed.size() == 0 || observed.size() % dim_ != 0)
    fail(ErrorKind::ShapeMismatch, "observed prefix must hold a positive number of periods");
  const int t = static_cast<int>(observed.size() / dim_);
  if (t > horizon_) fail(ErrorKind::IndexOutOfRange, "observed prefix longer than the horizon");
  // Σ_11^{-1} = Ψ_11' Σ̄_t^{-1} Ψ_11 and |Ψ_11| = 1, so the quadratic form runs on the residuals Ψ_11 ȳ - δ_1.
  const Vec resid = psi_.topLeftCorner(dim_ * t, dim_ * t).triangularView<Eigen::UnitLower>() * observed -
                    delta_.head(dim_ * t);
  double quad = 0.0, logdet = 0.0;
  for (int m = 1; m <= t; ++m) {
    const Mat& l = factors_[static_cast<std::size_t>(m - 1)];
    const Vec z = l.triangularView<Eigen::Lower>().solve(resid.segment((m - 1) * dim_, dim_));
    quad += z.squaredNorm();
    logdet += 2.0 * l.diagonal().array().log().sum();
  }
  return -0.5 * (dim_ * t * std::log(2.0 * M_PI) + logdet + quad);
}

double StackedSystem::likelihood_prefix(const Vec& observed) const { return std::exp(log_likelihood_prefix(observed)); }

Vec stack_observed(const PathState& state) {
  if (state.observed.empty()) return Vec();
  const auto n = state.observed.front().size();
  Vec out(n * state.time());
  for (int s = 1; s <= state.time(); ++s) out.segment((s - 1) * n, n) = state.y(s);
  return out;
}

GaussianLaw law_one_step(const ValidatedModel& model, int regime, const Vec& theta, const Mat& sigma,
                         const PathState& state, int t) {
  if (t < 1 || t - 1 > state.time() || t > state.horizon())
    fail(ErrorKind::IndexOutOfRange, "one-step law needs the lags before t to be known");
  const auto& step = model.step(regime);
  Vec mean = step.m0 * state.exogenous[static_cast<std::size_t>(t - 1)];
  for (int m = 1; m <= model.p(); ++m) mean.noalias() += step.lags[static_cast<std::size_t>(m - 1)] * state.y(t - m);
  return {mean + theta, sigma};
}

}  // namespace msvar
