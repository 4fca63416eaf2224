#include "msvar/oracle.hpp"
#include "msvar/stacked.hpp"
#include "msvar/term_structure.hpp"
#include "test_support.hpp"

using namespace msvar;
using namespace msvar::test;

namespace {

struct HjmDesk {
  ValidatedModel model;
  HjmLayout layout;
  PathState state;
};

HjmDesk desk_hjm() {
  const auto f = desk("desk_hjm.json");
  return {ValidatedModel(f.model), f.market.hjm, f.state};
}

/// Lag-2 forward-curve model, n = 4, T = 3, with one observation so that t = 1.
HjmDesk random_hjm(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  const int n = 4, p = 2;
  std::vector<Mat> coeff, sigma;
  for (int j = 0; j < 2; ++j) {
    Mat c = random_matrix(n, 1 + n * p, g, 0.05);
    c.col(0) = Vec::Constant(n, 0.001 * (j + 1));
    c.block(0, 1, n, n) += 0.8 * Mat::Identity(n, n);
    coeff.push_back(c);
    sigma.push_back(random_spd(n, g, 1e-4 * (1 + j)));
  }
  const ValidatedModel vm(make_raw(coeff, sigma, (Mat(2, 2) << 0.8, 0.2, 0.3, 0.7).finished(),
                                   (Vec(2) << 0.5, 0.5).finished(), p));
  PathState st = simple_state((Vec(4) << 0.02, 0.021, 0.023, 0.1).finished(), 3, p);
  st.observed = {(Vec(4) << 0.019, 0.022, 0.024, 0.12).finished()};
  return {vm, {3, n}, st};
}

double curve_bond(const HjmDesk& d, int u) { return std::exp(curve_log_bond(d.state.y(d.state.time()), d.state.time(), u)); }

PathLaw installed_law(const HjmDesk& d, const RegimePath& path) {
  return make_path_law(d.model, path, hjm_kernel_deltas(d.model, d.layout, path, d.state), d.state);
}

double forward_from(const Trajectory& y, int v, int u1, int u2) {
  double f = 0.0;
  for (int m = u1; m <= u2 - 1; ++m) f += y.at(v)(m - v);
  return f / (u2 - u1);
}

Estimate mc_rate_option(const HjmDesk& d, int pay, const PathFunctional& payoff, std::size_t n, std::uint64_t seed) {
  const auto paths = hjm_paths(d.model, d.state, Conditioning::known({}));
  return mc_price(d.model, d.state, paths, hjm_kernel(d.model, d.layout, d.state), payoff,
                  rate_discount(0, d.state.time(), pay), mc_opts(n, seed));
}

/// Σ_paths w f(path law) over the unconditioned rate paths.
template <class F>
double mix(const HjmDesk& d, F f) {
  double out = 0.0;
  for (const auto& wp : hjm_paths(d.model, d.state, Conditioning::known({}))) out += wp.weight * f(installed_law(d, wp.path));
  return out;
}

}  // namespace

TEST(HjmConstraints, FirstRowIsTheShortRateSelector) {
  const auto d = desk_hjm();
  const auto cs = hjm_constraints(d.model, d.layout, {0, 1, 0, 0, 1}, d.state);
  ASSERT_EQ(cs.constraint.a.rows(), 4);
  ASSERT_EQ(cs.constraint.a.cols(), 30);
  Vec e = Vec::Zero(30);
  e(0) = 1.0;
  EXPECT_EQ(cs.constraint.a.row(0).transpose(), e);
}

TEST(HjmConstraints, ZeroCoefficientsLeaveOnlyTheCurveAndVariance) {
  const int n = 3;
  const Mat s = (Mat(3, 3) << 4e-4, 1e-4, 0, 1e-4, 2e-4, 0, 0, 0, 1e-4).finished();
  const ValidatedModel vm(make_raw({Mat::Zero(n, n + 1)}, {s}, scalar(1.0), Vec::Ones(1)));
  const PathState st = simple_state((Vec(3) << 0.01, 0.02, 0.03).finished(), 3);
  const auto cs = hjm_constraints(vm, {3, n}, {0, 0, 0}, st);
  // With Φ = 0 each block of row u is e_1 and b_u is the curve sum plus half the summed short-rate variances.
  EXPECT_NEAR(cs.constraint.b(0), 0.02 + 0.5 * 4e-4, 1e-15);
  EXPECT_NEAR(cs.constraint.b(1), 0.02 + 0.03 + 4e-4, 1e-15);
  Vec row = Vec::Zero(9);
  row(0) = row(3) = 1.0;
  EXPECT_EQ(cs.constraint.a.row(1).transpose(), row);
  EXPECT_EQ(cs.constraint.a.row(0).tail(6).cwiseAbs().maxCoeff(), 0.0);
}

// Independent form: γ'Ψ_22^{-1}θ = Σ_{j=1}^{u-t-1} y_t[j] - γ'μ_0 + ½γ'C_0γ with (μ_0, C_0) the zero-kernel future law.
TEST(HjmConstraints, MatchStackedFormOracle) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = random_hjm(seed);
    const int n = 4, T = 3, t = 1;
    for (const RegimePath& path : {RegimePath{0, 0, 0}, RegimePath{1, 0, 1}, RegimePath{0, 1, 1}}) {
      const auto cs = hjm_constraints(d.model, d.layout, path, d.state);
      const StackedSystem sys(d.model, path, {}, d.state);
      const auto law0 = sys.law_conditional_future(t, stack_observed(d.state));
      const int m = n * (T - t);
      const Mat psi22 = sys.psi().bottomRightCorner(m, m);
      const Mat psi22_inv = psi22.inverse();
      const Vec& yt = d.state.y(t);
      for (int u = t + 2; u <= T; ++u) {
        Vec gamma = Vec::Zero(m);
        for (int s = t + 1; s <= u - 1; ++s) gamma((s - t - 1) * n) = 1.0;
        const Vec a = psi22_inv.transpose() * gamma;
        double b = -gamma.dot(law0.mean) + 0.5 * gamma.dot(law0.cov * gamma);
        for (int j = 1; j <= u - t - 1; ++j) b += yt(j);
        EXPECT_LE((cs.constraint.a.row(u - t - 2).transpose() - a).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_NEAR(cs.constraint.b(u - t - 2), b, 1e-12);
      }
    }
  }
}

TEST(HjmKernel, InstalledKernelReproducesTheCurve) {
  const auto d = desk_hjm();
  for (int u = 1; u <= 5; ++u) {
    const auto q = hjm_zcb(d.model, d.layout, d.state, u, Conditioning::known({}));
    EXPECT_NEAR(q.price, curve_bond(d, u), 1e-12) << "u=" << u;
  }
  const auto r = random_hjm(4);
  for (const auto& cond : {Conditioning::known({1}), Conditioning::filtered()})
    for (int u = 2; u <= 3; ++u)
      EXPECT_NEAR(hjm_zcb(r.model, r.layout, r.state, u, cond).price, curve_bond(r, u), 1e-12);
}

TEST(HjmKernel, SingleStepHorizonNeedsNoKernel) {
  const auto d = desk_hjm();
  PathState st = d.state;
  st.observed.assign(4, d.state.y(0));
  const auto deltas = hjm_kernel_deltas(d.model, d.layout, {0, 0, 0, 0, 0}, st);
  for (const auto& s : deltas) EXPECT_EQ(s.m0.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HjmKernel, DiscountedBondsAreMartingalesUnderMonteCarlo) {
  const auto d = desk_hjm();
  const auto paths = hjm_paths(d.model, d.state, Conditioning::known({}));
  const auto kernel = hjm_kernel(d.model, d.layout, d.state);
  std::vector<PathFunctional> fs;
  for (int u = 1; u <= 5; ++u) {
    const auto disc = rate_discount(0, 0, u);
    fs.push_back([disc](const Trajectory& y) { return disc(y); });
  }
  const auto est = mc_price_many(d.model, d.state, paths, kernel, fs, mc_opts(200000, 11));
  for (int u = 1; u <= 5; ++u) {
    SCOPED_TRACE(u);
    EXPECT_WITHIN_SE(est[static_cast<std::size_t>(u - 1)], curve_bond(d, u), 4.0);
  }
}

TEST(HjmLayout, ShapeErrors) {
  const auto d = desk_hjm();
  expect_error(ErrorKind::ShapeMismatch,
               [&] { (void)hjm_constraints(d.model, {4, 6}, {0, 0, 0, 0, 0}, d.state); });
  expect_error(ErrorKind::ShapeMismatch,
               [&] { (void)hjm_constraints(d.model, {5, 5}, {0, 0, 0, 0, 0}, d.state); });
  expect_error(ErrorKind::IndexOutOfRange,
               [&] { (void)hjm_zcb(d.model, d.layout, d.state, 6, Conditioning::known({})); });
}

TEST(ForwardRateLaw, OnePeriodReadsOneCoordinate) {
  const auto d = desk_hjm();
  const auto pl = installed_law(d, {0, 1, 1, 0, 0});
  const auto law = forward_rate_law(pl, 2, 3, 4, pl.law.mean);
  const int idx = 6 * 1 + 1;  // y_2, coordinate u1 - v
  EXPECT_NEAR(law.mean, pl.law.mean(idx), 1e-15);
  EXPECT_NEAR(law.variance, pl.law.cov(idx, idx), 1e-15);
  expect_error(ErrorKind::IndexOutOfRange, [&] { (void)forward_rate_law(pl, 3, 2, 4, pl.law.mean); });
  expect_error(ErrorKind::IndexOutOfRange, [&] { (void)forward_rate_law(pl, 0, 1, 2, pl.law.mean); });
}

TEST(ForwardRateLaw, MatchesSimulatedMoments) {
  const auto d = desk_hjm();
  const RegimePath path{1, 0, 0, 1, 1};
  const auto deltas = hjm_kernel_deltas(d.model, d.layout, path, d.state);
  const auto pl = make_path_law(d.model, path, deltas, d.state);
  const auto law = forward_rate_law(pl, 2, 3, 5, pl.law.mean);
  MomentAccumulator acc;
  const std::size_t n = 200000;
  for (const auto& y : simulate_under_q(d.model, d.state, path, deltas, 9, n)) acc.add(forward_from(y, 2, 3, 5));
  EXPECT_WITHIN_SE(acc.estimate(), law.mean, 4.0);
  EXPECT_LE(std::abs(acc.variance() - law.variance), 4.0 * std::sqrt(2.0 / n) * law.variance);
}

TEST(LognormalCall, UnitCase) {
  const double expected = std::exp(0.5) * norm_cdf(1.0) - norm_cdf(0.0);
  EXPECT_NEAR(lognormal_call(0.0, 1.0, 1.0), expected, 1e-15);
  const double q =
      quad_expectation_1d([](double x) { return std::max(std::exp(x) - 1.0, 0.0); }, 0.0, 1.0, 1e-13, {0.0});
  EXPECT_NEAR(lognormal_call(0.0, 1.0, 1.0), q, 1e-9);
}

TEST(LognormalCall, ParityAndErrors) {
  std::mt19937_64 g(8);
  for (int i = 0; i < 50; ++i) {
    const Vec v = random_vec(3, g, 0.5);
    const double s = std::abs(v(1)), k = std::exp(v(2));
    EXPECT_NEAR(lognormal_call(v(0), s, k) - lognormal_put(v(0), s, k), std::exp(v(0) + 0.5 * s * s) - k, 1e-12);
  }
  EXPECT_EQ(lognormal_call(0.5, 0.0, 1.0), std::exp(0.5) - 1.0);
  expect_error(ErrorKind::ValidationError, [] { (void)lognormal_call(0.0, 1.0, 0.0); });
}

TEST(ForwardCaplet, MixesTruncatedNormalsUnderTheForwardMeasure) {
  const auto d = desk_hjm();
  const RateOptionSpec spec{2, 3, 4, 0.025, OptionSide::Call};
  const double price = price_forward_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  const double expected = mix(d, [](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, 2, 3, 4, forward_measure_mean(pl, 4, 0));
    return std::exp(bond_exponent(pl, 4, 0)) * truncated_call(law.mean, std::sqrt(law.variance), 0.025);
  });
  EXPECT_NEAR(price, expected, 1e-15);
}

TEST(ForwardCaplet, AtTheForwardStrikeOnOnePath) {
  const auto d = desk_hjm();
  const auto pl = installed_law(d, {0, 1, 1, 0, 1});
  const auto law = forward_rate_law(pl, 2, 3, 4, forward_measure_mean(pl, 4, 0));
  EXPECT_NEAR(std::exp(bond_exponent(pl, 4, 0)), curve_bond(d, 4), 1e-14);
  EXPECT_NEAR(truncated_call(law.mean, std::sqrt(law.variance), law.mean),
              std::sqrt(law.variance) * 0.3989422804014327, 1e-16);
}

TEST(ForwardCaplet, Parity) {
  const auto d = desk_hjm();
  RateOptionSpec spec{1, 2, 4, 0.02, OptionSide::Call};
  const double c = price_forward_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  spec.side = OptionSide::Put;
  const double p = price_forward_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  const double fwd = mix(d, [](const PathLaw& pl) { return forward_rate_law(pl, 1, 2, 4, forward_measure_mean(pl, 4, 0)).mean; });
  EXPECT_NEAR(c - p, curve_bond(d, 4) * (fwd - 0.02), 1e-14);
}

TEST(ForwardCaplet, AgainstMonteCarlo) {
  const auto d = desk_hjm();
  const RateOptionSpec spec{2, 3, 5, 0.03, OptionSide::Call};
  const double exact = price_forward_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  const auto mc = mc_rate_option(
      d, 5, [](const Trajectory& y) { return std::max(forward_from(y, 2, 3, 5) - 0.03, 0.0); }, 400000, 21);
  EXPECT_WITHIN_SE(mc, exact, 4.0);
}

TEST(LiborCaplet, AgainstMonteCarloAndParity) {
  const auto d = desk_hjm();
  for (int accrual : {1, 2}) {
    SCOPED_TRACE(accrual);
    const RateOptionSpec spec{1, 2, 2 + accrual, 0.028, OptionSide::Call};
    const double exact = price_libor_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
    const auto mc = mc_rate_option(
        d, spec.u2,
        [spec](const Trajectory& y) {
          const double dl = spec.u2 - spec.u1;
          return std::max((std::exp(dl * forward_from(y, spec.v, spec.u1, spec.u2)) - 1.0) / dl - spec.strike, 0.0);
        },
        400000, 31);
    EXPECT_WITHIN_SE(mc, exact, 4.0);
  }
  RateOptionSpec spec{1, 2, 4, 0.01, OptionSide::Call};
  const double c = price_libor_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  spec.side = OptionSide::Put;
  const double p = price_libor_caplet(d.model, d.layout, d.state, spec, Conditioning::known({}));
  const double fwd_libor = mix(d, [](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, 1, 2, 4, forward_measure_mean(pl, 4, 0));
    return (std::exp(2.0 * law.mean + 2.0 * law.variance) - 1.0) / 2.0;
  });
  EXPECT_NEAR(c - p, curve_bond(d, 4) * (fwd_libor - 0.01), 1e-14);
  spec.strike = -0.5;
  expect_error(ErrorKind::ValidationError,
               [&] { (void)price_libor_caplet(d.model, d.layout, d.state, spec, Conditioning::known({})); });
}

TEST(BondOption, Parity) {
  const auto d = desk_hjm();
  const double k = 0.94;
  const double c = price_zcb_option(d.model, d.layout, d.state, 2, 5, k, OptionSide::Call, Conditioning::known({}));
  const double p = price_zcb_option(d.model, d.layout, d.state, 2, 5, k, OptionSide::Put, Conditioning::known({}));
  const double fwd_bond = mix(d, [](const PathLaw& pl) {
    const auto law = forward_rate_law(pl, 2, 2, 5, forward_measure_mean(pl, 2, 0));
    return std::exp(-3.0 * law.mean + 4.5 * law.variance);
  });
  EXPECT_NEAR(c - p, curve_bond(d, 2) * (fwd_bond - k), 1e-14);
}

TEST(BondOption, AgainstMonteCarlo) {
  const auto d = desk_hjm();
  const auto q_fwd = curve_bond(d, 5) / curve_bond(d, 2);
  for (auto side : {OptionSide::Call, OptionSide::Put}) {
    const double exact = price_zcb_option(d.model, d.layout, d.state, 2, 5, q_fwd, side, Conditioning::known({}));
    const auto mc = mc_rate_option(
        d, 2,
        [=](const Trajectory& y) {
          const double b = std::exp(-3.0 * forward_from(y, 2, 2, 5));
          return side == OptionSide::Call ? std::max(b - q_fwd, 0.0) : std::max(q_fwd - b, 0.0);
        },
        400000, 41);
    EXPECT_WITHIN_SE(mc, exact, 4.0);
  }
  expect_error(ErrorKind::IndexOutOfRange, [&] {
    (void)price_zcb_option(d.model, d.layout, d.state, 3, 3, 0.9, OptionSide::Call, Conditioning::known({}));
  });
  expect_error(ErrorKind::ValidationError, [&] {
    (void)price_zcb_option(d.model, d.layout, d.state, 2, 4, 0.0, OptionSide::Call, Conditioning::known({}));
  });
}
