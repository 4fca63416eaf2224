#include "msvar/lognormal_pricer.hpp"

#include "msvar/errors.hpp"
#include "msvar/girsanov.hpp"
#include "msvar/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace msvar {

PathLaw make_path_law(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas,
                      const PathState& state) {
  PathLaw pl{state.time(), state.horizon(), model.n(), StackedSystem(model, path, deltas, state), {}, {}, state.y(state.time())};
  pl.law = pl.sys.law_conditional_future(pl.t, stack_observed(state));
  pl.factor = pl.sys.future_factor(pl.t);
  return pl;
}

Vec rate_path_selector(int n, int T, int t, int u, int coord) {
  if (t < 0 || u <= t || u > T) fail(ErrorKind::IndexOutOfRange, "rate selector needs t < u <= T");
  if (coord < 0 || coord >= n) fail(ErrorKind::IndexOutOfRange, "rate coordinate out of range");
  Vec g = Vec::Zero(n * (T - t));
  for (int m = t + 1; m <= u - 1; ++m) g((m - t - 1) * n + coord) = 1.0;
  return g;
}

double bond_exponent(const PathLaw& pl, int u, int coord, const Vec& mean) {
  const Vec g = rate_path_selector(pl.n, pl.T, pl.t, u, coord);
  return -pl.y_now(coord) - g.dot(mean) + 0.5 * g.dot(pl.law.cov * g);
}

Vec forward_measure_mean(const PathLaw& pl, int u, int coord) {
  return pl.law.mean - pl.law.cov * rate_path_selector(pl.n, pl.T, pl.t, u, coord);
}

namespace {

BondQuote bond_mixture(const ValidatedModel& model, const FxMarket& market, const PathState& state, int u, int coord,
                       const Conditioning& cond) {
  market.validate(model.n());
  validate_state(model, state);
  if (u <= state.time() || u > state.horizon()) fail(ErrorKind::IndexOutOfRange, "bond maturity must lie in (t, T]");
  const auto kernel = lognormal_kernel(model, market);
  const auto paths = conditioning_paths(model, state, cond, kernel);
  BondQuote q;
  q.price = mix_over_paths(paths, [&](const RegimePath& path) {
    const PathLaw pl = make_path_law(model, path, kernel(path, covariance_path(model, path)), state);
    return std::exp(bond_exponent(pl, u, coord));
  });
  q.exponent = std::log(q.price);
  q.mixture = paths.size() > 1;
  return q;
}

}  // namespace

BondQuote zcb_domestic(const ValidatedModel& model, const FxMarket& market, const PathState& state, int u,
                       const Conditioning& cond) {
  return bond_mixture(model, market, state, u, market.domestic_rate_coord(), cond);
}

BondQuote zcb_foreign(const ValidatedModel& model, const FxMarket& market, int country, const PathState& state, int u,
                      const Conditioning& cond) {
  if (country < 0 || country >= market.n_q()) fail(ErrorKind::IndexOutOfRange, "foreign country out of range");
  return bond_mixture(model, market, state, u, market.foreign_rate_coord(country), cond);
}

double margrabe_psi(double mu1, double mu2, double var1, double var2, double cov12) {
  const double s2 = var1 - 2.0 * cov12 + var2;
  const double m1 = std::exp(mu1 + 0.5 * var1);
  const double m2 = std::exp(mu2 + 0.5 * var2);
  if (s2 <= 1e-14 * std::max(1.0, var1 + var2)) return std::max(m1 - m2, 0.0);
  const double s = std::sqrt(s2);
  return m1 * norm_cdf((mu1 - mu2 + var1 - cov12) / s) - m2 * norm_cdf((mu1 - mu2 + cov12 - var2) / s);
}

ExchangeSpec exchange_from_legs(const FxMarket& market, const AssetLeg& long_leg, const AssetLeg& short_leg,
                                int maturity, int T) {
  if (maturity < 1 || maturity > T) fail(ErrorKind::IndexOutOfRange, "maturity must lie in 1..T");
  const Mat r2 = market.r2();
  auto row_of = [&](const AssetLeg& leg) -> int {
    switch (leg.kind) {
      case AssetLeg::Kind::Domestic:
        if (leg.index < 0 || leg.index >= market.n_d) fail(ErrorKind::IndexOutOfRange, "domestic asset out of range");
        return market.domestic_row(leg.index);
      case AssetLeg::Kind::Foreign:
        if (leg.index < 0 || leg.index >= market.n_q() || leg.sub < 0 ||
            leg.sub >= market.n_f_country[static_cast<std::size_t>(leg.index)])
          fail(ErrorKind::IndexOutOfRange, "foreign asset out of range");
        return market.foreign_row(leg.index, leg.sub);
      case AssetLeg::Kind::Currency:
        if (leg.index < 0 || leg.index >= market.n_q()) fail(ErrorKind::IndexOutOfRange, "currency out of range");
        return market.currency_row(leg.index);
      case AssetLeg::Kind::Cash:
        return -1;
    }
    return -1;
  };
  ExchangeSpec ex;
  ex.maturity = maturity;
  ex.w = Mat::Zero(T, market.n_x());
  ex.w_hat = Mat::Zero(T, market.n_x());
  ex.w0 = long_leg.units;
  ex.w0_hat = short_leg.units;
  if (const int r = row_of(long_leg); r >= 0) ex.w.row(maturity - 1) = r2.row(r);
  if (const int r = row_of(short_leg); r >= 0) ex.w_hat.row(maturity - 1) = r2.row(r);
  return ex;
}

std::pair<AssetLeg, AssetLeg> special_case_legs(const FxMarket& market, const SpecialCase& sc) {
  (void)market;
  using K = AssetLeg::Kind;
  static constexpr K kinds[9][2] = {{K::Domestic, K::Cash},     {K::Foreign, K::Cash},      {K::Currency, K::Cash},
                                    {K::Domestic, K::Domestic}, {K::Domestic, K::Foreign},  {K::Domestic, K::Currency},
                                    {K::Foreign, K::Foreign},   {K::Foreign, K::Currency},  {K::Currency, K::Currency}};
  if (sc.case_no < 1 || sc.case_no > 9) fail(ErrorKind::IndexOutOfRange, "special case must be 1..9");
  const auto& kk = kinds[sc.case_no - 1];
  AssetLeg first{kk[0], sc.first, sc.first_sub, sc.first_units};
  AssetLeg second{kk[1], sc.second, sc.second_sub, sc.second_units};
  if (kk[1] == K::Cash) {
    if (!sc.strike) fail(ErrorKind::MissingStrike, "cases 1-3 need a strike");
    second = AssetLeg{K::Cash, 0, 0, *sc.strike};
  }
  if (first.units <= 0.0 || second.units <= 0.0)
    fail(ErrorKind::ValidationError, "units and strike must be strictly positive");
  if (sc.side == OptionSide::Put) std::swap(first, second);
  return {first, second};
}

ExchangeSpec special_case_weights(const FxMarket& market, const SpecialCase& sc, int T) {
  const auto [long_leg, short_leg] = special_case_legs(market, sc);
  return exchange_from_legs(market, long_leg, short_leg, sc.maturity, T);
}

namespace {

/// Deterministic part from rows m <= t and the loading on y_{t+1..T}.
std::pair<double, Vec> log_weight_loading(const Mat& w, const Mat& m2, const PathState& state, int n, int T) {
  const int t = state.time();
  double known = 0.0;
  for (int m = 1; m <= t; ++m) known += w.row(m - 1).dot(m2 * state.y(m));
  Vec c = Vec::Zero(n * (T - t));
  for (int m = t + 1; m <= T; ++m) c.segment((m - t - 1) * n, n) = m2.transpose() * w.row(m - 1).transpose();
  return {known, c};
}

}  // namespace

double price_exchange_option(const ValidatedModel& model, const FxMarket& market, const ExchangeSpec& ex,
                             const PathState& state, const Conditioning& cond) {
  market.validate(model.n());
  validate_state(model, state);
  const int T = state.horizon(), t = state.time(), n = model.n();
  if (!(ex.w0 > 0.0 && ex.w0_hat > 0.0)) fail(ErrorKind::ValidationError, "exchange prefactors must be positive");
  if (ex.w.rows() != T || ex.w_hat.rows() != T || ex.w.cols() != market.n_x() || ex.w_hat.cols() != market.n_x())
    fail(ErrorKind::ShapeMismatch, "exchange weights must be T x n_x");
  if (ex.maturity <= t || ex.maturity > T) fail(ErrorKind::IndexOutOfRange, "maturity must lie in (t, T]");
  for (int m = ex.maturity + 1; m <= T; ++m)
    if (!ex.w.row(m - 1).isZero(0.0) || !ex.w_hat.row(m - 1).isZero(0.0))
      fail(ErrorKind::ValidationError, "exchange weights after the maturity must be zero");

  const Mat m2 = market.m2();
  const auto [k1, c1] = log_weight_loading(ex.w, m2, state, n, T);
  const auto [k2, c2] = log_weight_loading(ex.w_hat, m2, state, n, T);
  const auto kernel = lognormal_kernel(model, market);
  const auto paths = conditioning_paths(model, state, cond, kernel);
  return mix_over_paths(paths, [&](const RegimePath& path) {
    const PathLaw pl = make_path_law(model, path, kernel(path, covariance_path(model, path)), state);
    const Vec fwd = forward_measure_mean(pl, ex.maturity, market.domestic_rate_coord());
    const double bond = std::exp(bond_exponent(pl, ex.maturity, market.domestic_rate_coord()));
    const Vec s1 = pl.law.cov * c1;
    const double mu1 = std::log(ex.w0) + k1 + c1.dot(fwd);
    const double mu2 = std::log(ex.w0_hat) + k2 + c2.dot(fwd);
    return bond * margrabe_psi(mu1, mu2, c1.dot(s1), c2.dot(pl.law.cov * c2), c2.dot(s1));
  });
}

Vec measure_shift_mean(const PathLaw& pl, const FxMarket& market, int u, int x_row) {
  if (u <= pl.t || u > pl.T) fail(ErrorKind::IndexOutOfRange, "measure shift needs t < u <= T");
  if (x_row < 0 || x_row >= market.n_x()) fail(ErrorKind::IndexOutOfRange, "price row out of range");
  Vec block = Vec::Zero(pl.n);
  block.tail(market.n_x()) = market.r2().row(x_row).transpose();
  Vec l = Vec::Zero(pl.n * (pl.T - pl.t));
  for (int m = pl.t + 1; m <= u; ++m) l.segment((m - pl.t - 1) * pl.n, pl.n) = block;
  return pl.law.mean + pl.sys.solve_future(pl.t, pl.sys.sigma_future_times(pl.t, l));
}

double currency_discount_expectation(const PathLaw& pl, const FxMarket& market, int country, int u,
                                     const std::function<double(const Vec&)>& event_prob) {
  if (country < 0 || country >= market.n_q()) fail(ErrorKind::IndexOutOfRange, "currency out of range");
  const int coord = market.foreign_rate_coord(country);
  const Vec shifted = measure_shift_mean(pl, market, u, market.currency_row(country));
  const Vec g = rate_path_selector(pl.n, pl.T, pl.t, u, coord);
  const double a = bond_exponent(pl, u, coord, shifted);
  return std::exp(a) * event_prob(shifted - pl.law.cov * g);
}

double current_value(const FxMarket& market, const Vec& y, int x_row) {
  const Vec xt = y.tail(market.n_x());
  return std::exp(market.r2().row(x_row).dot(xt));
}

namespace {

struct EventTerm {
  double coef;
  Vec mean;
};

struct PathTerms {
  double weight;
  Mat factor;
  std::vector<EventTerm> terms;
};

}  // namespace

Estimate price_general_call(const ValidatedModel& model, const FxMarket& market, const GeneralCallSpec& spec,
                            const PathState& state, const Conditioning& cond, const McOptions& mc) {
  market.validate(model.n());
  validate_state(model, state);
  const int T = state.horizon(), t = state.time(), n = model.n(), nx = market.n_x();
  const int v = spec.strike_time;
  if (spec.weights.rows() != T || spec.weights.cols() != nx) fail(ErrorKind::ShapeMismatch, "weights must be T x n_x");
  if (v < t || v > T) fail(ErrorKind::IndexOutOfRange, "strike time must lie in [t, T]");
  for (int m = 1; m <= t; ++m)
    if (!spec.weights.row(m - 1).isZero(0.0)) fail(ErrorKind::ValidationError, "weights must vanish up to time t");
  if (mc.paths < 2) fail(ErrorKind::ValidationError, "need at least two samples");

  const int dc = market.domestic_rate_coord();
  const Mat rx = market.r2() * market.m2();  // row j: log of the domestic-currency value of x-row j
  const auto kernel = lognormal_kernel(model, market);
  const auto paths = conditioning_paths(model, state, cond, kernel);
  const int r = n * (T - t);

  std::vector<PathTerms> prepared;
  for (const auto& wp : paths) {
    if (wp.weight <= 0.0) continue;
    const PathLaw pl = make_path_law(model, wp.path, kernel(wp.path, covariance_path(model, wp.path)), state);
    PathTerms pt{wp.weight, pl.factor, {}};
    for (int u = t + 1; u <= T; ++u)
      for (int j = 0; j < nx; ++j) {
        const double w = spec.weights(u - 1, j);
        if (w == 0.0) continue;
        if (j >= market.n_d + market.n_f()) {
          const int country = j - market.n_d - market.n_f();
          const Vec shifted = measure_shift_mean(pl, market, u, j);
          const int fc = market.foreign_rate_coord(country);
          const double a = bond_exponent(pl, u, fc, shifted);
          pt.terms.push_back({w * current_value(market, pl.y_now, j) * std::exp(a),
                              shifted - pl.law.cov * rate_path_selector(n, T, t, u, fc)});
        } else {
          pt.terms.push_back({w * current_value(market, pl.y_now, j), measure_shift_mean(pl, market, u, j)});
        }
      }
    if (spec.strike != 0.0) {
      if (v == t)
        pt.terms.push_back({-spec.strike, pl.law.mean});
      else
        pt.terms.push_back({-spec.strike * std::exp(bond_exponent(pl, v, dc)), forward_measure_mean(pl, v, dc)});
    }
    prepared.push_back(std::move(pt));
  }

  double work = static_cast<double>(mc.paths) * static_cast<double>(prepared.size()) * r * r;
  for (const auto& pt : prepared) work += static_cast<double>(mc.paths) * static_cast<double>(pt.terms.size()) * T * nx * n;
  if (work > mc.max_work) fail(ErrorKind::McBudgetExceeded, "event-probability sampling exceeds the work budget");

  const Vec y_now = state.y(t);
  // Σ_u (D_u/D_t) Σ_j W(u,j) X_j(y_u) - (D_v/D_t) K on a draw of y_{t+1..T}.
  auto surplus = [&](const Vec& fut) {
    auto y_at = [&](int m) { return m == t ? Eigen::Ref<const Vec>(y_now) : Eigen::Ref<const Vec>(fut.segment((m - t - 1) * n, n)); };
    double log_disc = 0.0, total = 0.0;
    for (int u = t + 1; u <= T; ++u) {
      log_disc -= y_at(u - 1)(dc);
      if (u == v) total -= std::exp(log_disc) * spec.strike;
      const auto wrow = spec.weights.row(u - 1);
      if (wrow.isZero(0.0)) continue;
      const Vec logx = rx * y_at(u);
      double val = 0.0;
      for (int j = 0; j < nx; ++j)
        if (wrow(j) != 0.0) val += wrow(j) * std::exp(logx(j));
      total += std::exp(log_disc) * val;
    }
    if (v == t) total -= spec.strike;
    return total;
  };

  auto sample_value = [&](const Vec& z) {
    double g = 0.0;
    for (const auto& pt : prepared) {
      const Vec fz = pt.factor * z;
      double acc = 0.0;
      for (const auto& term : pt.terms)
        if (surplus(term.mean + fz) >= 0.0) acc += term.coef;
      g += pt.weight * acc;
    }
    return g;
  };

  const std::size_t units = mc.antithetic ? (mc.paths + 1) / 2 : mc.paths;
  const std::size_t blocks = (units + mc.block_size - 1) / mc.block_size;
  std::vector<MomentAccumulator> acc(blocks);
  for_each_block(units, mc.block_size, mc.threads, [&](std::size_t b, std::size_t begin, std::size_t end) {
    RandomStream rng(substream_seed(mc.seed, b));
    Vec z(r);
    for (std::size_t i = begin; i < end; ++i) {
      rng.fill_normal(z);
      double g = sample_value(z);
      if (mc.antithetic) g = 0.5 * (g + sample_value(-z));
      acc[b].add(g);
    }
  });
  MomentAccumulator total;
  for (const auto& a : acc) total.merge(a);
  return total.estimate();
}

}  // namespace msvar
