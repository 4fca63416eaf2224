#include "msvar/model.hpp"

#include "msvar/errors.hpp"
#include "msvar/rng.hpp"

#include <cmath>
#include <string>

namespace msvar {

namespace {

std::string idx(const std::string& name, std::size_t i) { return name + "[" + std::to_string(i) + "]"; }

void require_shape(const Mat& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols)
    fail(ErrorKind::ShapeMismatch, what + " has shape " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                       ", expected " + std::to_string(rows) + "x" + std::to_string(cols));
  if (!m.allFinite()) fail(ErrorKind::ValidationError, what + " has non-finite entries");
}

void check_probability_vector(const Vec& v, const std::string& what) {
  if (!v.allFinite() || (v.array() < 0.0).any() || (v.array() > 1.0).any())
    fail(ErrorKind::NonStochasticTransition, what + " has entries outside [0,1]");
  if (std::abs(v.sum() - 1.0) > 1e-12)
    fail(ErrorKind::NonStochasticTransition, what + " sums to " + std::to_string(v.sum()));
}

}  // namespace

StepMatrices StepMatrices::zero(int n, int k, int p) {
  StepMatrices s;
  s.m0 = Mat::Zero(n, k);
  s.lags.assign(static_cast<std::size_t>(p), Mat::Zero(n, n));
  return s;
}

StepMatrices& StepMatrices::operator+=(const StepMatrices& other) {
  m0 += other.m0;
  for (std::size_t m = 0; m < lags.size(); ++m) lags[m] += other.lags[m];
  return *this;
}

ValidatedModel::ValidatedModel(MsVarModel model) : model_(std::move(model)) {
  const auto& m = model_;
  if (m.n_regimes < 1 || m.lag_order < 1 || m.dim < 1 || m.exo_dim < 1)
    fail(ErrorKind::ShapeMismatch, "dimensions N, p, n, k must be positive");
  const int n = m.dim, k = m.exo_dim, p = m.lag_order, N = m.n_regimes;

  if (static_cast<int>(m.coeff.size()) != N)
    fail(ErrorKind::ShapeMismatch, "expected " + std::to_string(N) + " coefficient matrices");
  for (std::size_t j = 0; j < m.coeff.size(); ++j) require_shape(m.coeff[j], n, k + n * p, idx("coeff", j));

  if (m.transition.rows() != N || m.transition.cols() != N)
    fail(ErrorKind::ShapeMismatch, "transition must be " + std::to_string(N) + "x" + std::to_string(N));
  for (int i = 0; i < N; ++i) check_probability_vector(m.transition.row(i).transpose(), idx("transition", i));
  if (m.initial_dist.size() != N) fail(ErrorKind::ShapeMismatch, "initial_dist must have length N");
  check_probability_vector(m.initial_dist, "initial_dist");

  if (const auto* c = std::get_if<ConstantCovariance>(&m.cov)) {
    if (static_cast<int>(c->sigma.size()) != N) fail(ErrorKind::ShapeMismatch, "expected one sigma per regime");
    for (std::size_t j = 0; j < c->sigma.size(); ++j) {
      require_shape(c->sigma[j], n, n, idx("sigma", j));
      factors_.push_back(checked_cholesky(c->sigma[j], idx("sigma", j)));
    }
  } else {
    const auto& g = std::get<GarchCovariance>(m.cov);
    if (g.arch_order != 0)
      fail(ErrorKind::UnsupportedCovariance, "ARCH terms make the covariance path data dependent; only GARCH(0,q) is supported");
    const int v = vech_size(n);
    if (g.q_star() < 1) fail(ErrorKind::ShapeMismatch, "GARCH needs at least one initial covariance");
    if (static_cast<int>(g.b0.size()) != N || static_cast<int>(g.b.size()) != N)
      fail(ErrorKind::ShapeMismatch, "expected one GARCH parameter set per regime");
    for (std::size_t j = 0; j < g.b0.size(); ++j) {
      if (g.b0[j].size() != v) fail(ErrorKind::ShapeMismatch, idx("b0", j) + " must have length n(n+1)/2");
      if (static_cast<int>(g.b[j].size()) != g.q_star())
        fail(ErrorKind::ShapeMismatch, idx("b", j) + " must hold q* matrices");
      for (std::size_t i = 0; i < g.b[j].size(); ++i) require_shape(g.b[j][i], v, v, idx(idx("b", j), i));
    }
    for (std::size_t i = 0; i < g.initial.size(); ++i) {
      require_shape(g.initial[i], n, n, idx("garch_initial", i));
      (void)checked_cholesky(g.initial[i], idx("garch_initial", i));
    }
  }

  for (int j = 0; j < N; ++j) {
    StepMatrices s;
    s.m0 = intercept(j);
    for (int l = 1; l <= p; ++l) s.lags.push_back(lag(j, l));
    steps_.push_back(std::move(s));
  }
}

Mat ValidatedModel::intercept(int regime) const { return model_.coeff[regime].leftCols(model_.exo_dim); }

Mat ValidatedModel::lag(int regime, int m) const {
  return model_.coeff[regime].block(0, model_.exo_dim + (m - 1) * model_.dim, model_.dim, model_.dim);
}

const Mat& ValidatedModel::sigma(int regime) const { return std::get<ConstantCovariance>(model_.cov).sigma[regime]; }

const Mat& ValidatedModel::sigma_factor(int regime) const { return factors_[regime]; }

void ValidatedModel::check_path(const RegimePath& path, std::size_t expected_length) const {
  if (path.size() != expected_length)
    fail(ErrorKind::ShapeMismatch, "regime path has length " + std::to_string(path.size()) + ", expected " +
                                       std::to_string(expected_length));
  for (std::size_t i = 0; i < path.size(); ++i)
    if (path[i] < 0 || path[i] >= N()) fail(ErrorKind::IndexOutOfRange, idx("regime path", i) + " out of range");
}

ValidatedModel validate_model(MsVarModel model) { return ValidatedModel(std::move(model)); }

const Vec& PathState::y(int s) const {
  const int p = static_cast<int>(initial.size());
  if (s <= 0) return initial[static_cast<std::size_t>(s + p - 1)];
  return observed[static_cast<std::size_t>(s - 1)];
}

PathState PathState::truncated(int t) const {
  PathState out = *this;
  out.observed.resize(static_cast<std::size_t>(t));
  return out;
}

void validate_state(const ValidatedModel& model, const PathState& state) {
  if (static_cast<int>(state.initial.size()) != model.p())
    fail(ErrorKind::ShapeMismatch, "state needs exactly p initial vectors");
  for (std::size_t i = 0; i < state.initial.size(); ++i)
    if (state.initial[i].size() != model.n()) fail(ErrorKind::ShapeMismatch, idx("initial", i) + " has wrong length");
  if (state.exogenous.empty()) fail(ErrorKind::ShapeMismatch, "exogenous inputs must cover 1..T");
  for (std::size_t i = 0; i < state.exogenous.size(); ++i) {
    if (state.exogenous[i].size() != model.k()) fail(ErrorKind::ShapeMismatch, idx("psi", i) + " has wrong length");
    if (state.exogenous[i](0) != 1.0) fail(ErrorKind::ValidationError, idx("psi", i) + " must lead with 1");
  }
  if (state.time() >= state.horizon())
    fail(ErrorKind::IndexOutOfRange, "observed prefix must be shorter than the horizon");
  for (std::size_t i = 0; i < state.observed.size(); ++i)
    if (state.observed[i].size() != model.n()) fail(ErrorKind::ShapeMismatch, idx("observed", i) + " has wrong length");
}

Trajectory trajectory_from_state(const PathState& state, int n) {
  Trajectory traj;
  traj.lag_order = static_cast<int>(state.initial.size());
  traj.values.assign(static_cast<std::size_t>(traj.lag_order + state.horizon()), Vec::Zero(n));
  for (int s = 1 - traj.lag_order; s <= state.time(); ++s) traj.at(s) = state.y(s);
  return traj;
}

Vec apply_step(const StepMatrices& step, const Vec& psi, const Trajectory& traj, int s) {
  Vec out = step.m0 * psi;
  for (std::size_t m = 0; m < step.lags.size(); ++m) out.noalias() += step.lags[m] * traj.at(s - 1 - static_cast<int>(m));
  return out;
}

double markov_path_prob(const ValidatedModel& model, const RegimePath& path, int from_time) {
  const int T = static_cast<int>(path.size());
  if (from_time < 0 || from_time >= T) fail(ErrorKind::IndexOutOfRange, "from_time must lie in [0, T)");
  model.check_path(path, path.size());
  double prob = 1.0;
  for (int m = from_time + 1; m <= T; ++m) {
    const int cur = path[static_cast<std::size_t>(m - 1)];
    prob *= (m == 1) ? model.initial_dist()(cur) : model.transition(path[static_cast<std::size_t>(m - 2)], cur);
  }
  return prob;
}

std::vector<Mat> covariance_path(const ValidatedModel& model, const RegimePath& path) {
  model.check_path(path, path.size());
  std::vector<Mat> out;
  out.reserve(path.size());
  if (model.constant_covariance()) {
    for (int s : path) out.push_back(model.sigma(s));
    return out;
  }
  const auto& g = std::get<GarchCovariance>(model.raw().cov);
  const int n = model.n(), q = g.q_star();
  std::vector<Vec> hist;  // vech(Σ_{1-q}), ..., then appended
  for (const auto& s0 : g.initial) hist.push_back(vech(s0));
  for (std::size_t t = 0; t < path.size(); ++t) {
    const int j = path[t];
    Vec v = g.b0[static_cast<std::size_t>(j)];
    for (int l = 1; l <= q; ++l) v.noalias() += g.b[static_cast<std::size_t>(j)][static_cast<std::size_t>(l - 1)] * hist[hist.size() - static_cast<std::size_t>(l)];
    Mat sigma = unvech(v, n);
    (void)checked_cholesky(sigma, "covariance at t=" + std::to_string(t + 1));
    hist.push_back(v);
    out.push_back(std::move(sigma));
  }
  return out;
}

Mat companion_extraction(int n, int p) {
  Mat j = Mat::Zero(n, n * p);
  j.leftCols(n).setIdentity();
  return j;
}

std::vector<CompanionStep> companion_form(const ValidatedModel& model, const RegimePath& path, const PathState& state) {
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  const int n = model.n(), p = model.p();
  std::vector<CompanionStep> out;
  for (std::size_t t = 0; t < path.size(); ++t) {
    CompanionStep c;
    c.nu = Vec::Zero(n * p);
    c.nu.head(n) = model.intercept(path[t]) * state.exogenous[t];
    c.a = Mat::Zero(n * p, n * p);
    for (int m = 1; m <= p; ++m) c.a.block(0, (m - 1) * n, n, n) = model.lag(path[t], m);
    if (p > 1) c.a.bottomLeftCorner(n * (p - 1), n * (p - 1)).setIdentity();
    out.push_back(std::move(c));
  }
  return out;
}

namespace {

std::vector<Mat> factors_along(const ValidatedModel& model, const RegimePath& path) {
  std::vector<Mat> f;
  for (const auto& s : covariance_path(model, path)) f.push_back(checked_cholesky(s, "covariance"));
  return f;
}

}  // namespace

Trajectory simulate_real_path(const ValidatedModel& model, const PathState& state, const RegimePath& path,
                              std::uint64_t seed) {
  validate_state(model, state);
  model.check_path(path, static_cast<std::size_t>(state.horizon()));
  const auto factors = factors_along(model, path);
  Trajectory traj = trajectory_from_state(state, model.n());
  RandomStream rng(substream_seed(seed, 0));
  Vec eps(model.n());
  for (int s = state.time() + 1; s <= state.horizon(); ++s) {
    const auto t = static_cast<std::size_t>(s - 1);
    rng.fill_normal(eps);
    traj.at(s) = apply_step(model.step(path[t]), state.exogenous[t], traj, s) + factors[t] * eps;
  }
  return traj;
}

Trajectory simulate_companion_path(const ValidatedModel& model, const PathState& state, const RegimePath& path,
                                   std::uint64_t seed) {
  validate_state(model, state);
  const auto comp = companion_form(model, path, state);
  const auto factors = factors_along(model, path);
  const int n = model.n(), p = model.p();
  Trajectory traj = trajectory_from_state(state, n);
  Vec ystar(n * p);
  for (int m = 0; m < p; ++m) ystar.segment(m * n, n) = traj.at(state.time() - m);
  RandomStream rng(substream_seed(seed, 0));
  Vec eps(n);
  for (int s = state.time() + 1; s <= state.horizon(); ++s) {
    const auto t = static_cast<std::size_t>(s - 1);
    rng.fill_normal(eps);
    Vec xi = Vec::Zero(n * p);
    xi.head(n) = factors[t] * eps;
    ystar = comp[t].nu + comp[t].a * ystar + xi;
    traj.at(s) = ystar.head(n);
  }
  return traj;
}

}  // namespace msvar
