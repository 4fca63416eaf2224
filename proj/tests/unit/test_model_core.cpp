#include "msvar/model.hpp"
#include "msvar/monte_carlo.hpp"
#include "msvar/regime_mixture.hpp"
#include "test_support.hpp"

using namespace msvar;
using namespace msvar::test;

namespace {

ValidatedModel ar1(double a0, double a1, double sigma) {
  return ValidatedModel(make_raw({(Mat(1, 2) << a0, a1).finished()}, {scalar(sigma)}, scalar(1.0), Vec::Ones(1)));
}

MsVarModel two_regime(int n) {
  std::mt19937_64 g(3);
  Mat p(2, 2);
  p << 0.9, 0.1, 0.2, 0.8;
  return make_raw({random_matrix(n, 1 + n, g, 0.3), random_matrix(n, 1 + n, g, 0.3)},
                  {random_spd(n, g), random_spd(n, g)}, p, (Vec(2) << 0.5, 0.5).finished());
}

}  // namespace

TEST(ValidateModel, SingleRegimeAccepted) { EXPECT_NO_THROW(ar1(0.0, 0.5, 1.0)); }

TEST(ValidateModel, RowSummingToPointNineRejected) {
  auto m = two_regime(2);
  m.transition(0, 1) = 0.0;
  expect_error(ErrorKind::NonStochasticTransition, [&] { (void)validate_model(m); });
}

TEST(ValidateModel, NegativeEigenvalueRejected) {
  auto m = two_regime(2);
  std::get<ConstantCovariance>(m.cov).sigma[1] = (Mat(2, 2) << 1.0, 2.0, 2.0, 1.0).finished();
  expect_error(ErrorKind::NonPositiveDefiniteCovariance, [&] { (void)validate_model(m); });
}

TEST(ValidateModel, WrongCoefficientShapeRejected) {
  auto m = two_regime(2);
  m.coeff[0] = Mat::Zero(2, 4);
  expect_error(ErrorKind::ShapeMismatch, [&] { (void)validate_model(m); });
}

TEST(ValidateModel, ArchTermsRejected) {
  auto m = two_regime(1);
  GarchCovariance g;
  g.arch_order = 1;
  g.b0 = {Vec::Ones(1), Vec::Ones(1)};
  g.b = {{scalar(0.1)}, {scalar(0.1)}};
  g.initial = {scalar(1.0)};
  m.cov = g;
  expect_error(ErrorKind::UnsupportedCovariance, [&] { (void)validate_model(m); });
}

TEST(MarkovPathProb, AbsorbingChain) {
  auto m = two_regime(1);
  m.transition = Mat::Identity(2, 2);
  m.initial_dist = (Vec(2) << 1.0, 0.0).finished();
  EXPECT_DOUBLE_EQ(markov_path_prob(ValidatedModel(m), {0, 0, 0, 0}, 0), 1.0);
}

TEST(MarkovPathProb, IidUniformChain) {
  auto m = two_regime(1);
  m.transition = Mat::Constant(2, 2, 0.5);
  const ValidatedModel vm(m);
  for (const auto& p : enumerate_paths(2, 3, 100)) EXPECT_DOUBLE_EQ(markov_path_prob(vm, p, 0), 0.125);
}

TEST(MarkovPathProb, TotalProbabilityOverFuturePaths) {
  const ValidatedModel vm(two_regime(1));
  for (int t = 0; t < 4; ++t) {
    double total = 0.0;
    for (const auto& fut : enumerate_paths(2, 4 - t, 1000)) {
      RegimePath p(static_cast<std::size_t>(t), 1);
      p.insert(p.end(), fut.begin(), fut.end());
      total += markov_path_prob(vm, p, t);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  expect_error(ErrorKind::IndexOutOfRange, [&] { (void)markov_path_prob(vm, {0, 0}, 2); });
}

TEST(CovariancePath, ConstantPerRegime) {
  const ValidatedModel vm(two_regime(2));
  const auto s = covariance_path(vm, {0, 1, 0});
  EXPECT_EQ(s[0], vm.sigma(0));
  EXPECT_EQ(s[1], vm.sigma(1));
  EXPECT_EQ(s[2], vm.sigma(0));
}

TEST(CovariancePath, GarchWithZeroFeedbackIsUnvechOfIntercept) {
  auto m = two_regime(2);
  GarchCovariance g;
  g.b0 = {vech((Mat(2, 2) << 1.0, 0.2, 0.2, 2.0).finished()), vech((Mat(2, 2) << 3.0, -0.5, -0.5, 1.0).finished())};
  g.b = {{Mat::Zero(3, 3)}, {Mat::Zero(3, 3)}};
  g.initial = {Mat::Identity(2, 2)};
  m.cov = g;
  const ValidatedModel vm(m);
  const auto s = covariance_path(vm, {1, 0, 1});
  EXPECT_EQ(s[0], unvech(g.b0[1], 2));
  EXPECT_EQ(s[1], unvech(g.b0[0], 2));
  EXPECT_EQ(s[2], unvech(g.b0[1], 2));
}

TEST(CovariancePath, ScalarGarchFixedPoint) {
  auto m = two_regime(1);
  GarchCovariance g;
  g.b0 = {Vec::Constant(1, 0.5), Vec::Constant(1, 0.5)};
  g.b = {{scalar(0.5)}, {scalar(0.5)}};
  g.initial = {scalar(1.0)};
  m.cov = g;
  for (const auto& s : covariance_path(ValidatedModel(m), {0, 1, 0, 1, 1})) EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
}

TEST(CovariancePath, OutputsSymmetricAndFactorizable) {
  auto m = two_regime(3);
  GarchCovariance g;
  std::mt19937_64 gen(9);
  for (int j = 0; j < 2; ++j) {
    g.b0.push_back(vech(random_spd(3, gen)));
    g.b.push_back({0.3 * Mat::Identity(6, 6), 0.2 * Mat::Identity(6, 6)});
  }
  g.initial = {random_spd(3, gen), random_spd(3, gen)};
  m.cov = g;
  const ValidatedModel vm(m);
  for (const auto& s : covariance_path(vm, {0, 1, 1, 0, 1, 0})) {
    EXPECT_LE(asymmetry(s), 1e-12);
    EXPECT_NO_THROW((void)checked_cholesky(s, "sigma"));
  }
}

TEST(CompanionForm, LagOneIsTheLagMatrix) {
  const ValidatedModel vm(two_regime(2));
  const auto c = companion_form(vm, {0, 1}, simple_state(Vec::Zero(2), 2));
  EXPECT_EQ(c[0].a, vm.lag(0, 1));
  EXPECT_EQ(c[1].a, vm.lag(1, 1));
  EXPECT_EQ(companion_extraction(2, 1), Mat::Identity(2, 2));
}

TEST(CompanionForm, ZeroCoefficientsLeaveOnlyTheShift) {
  MsVarModel m = make_raw({Mat::Zero(2, 5)}, {Mat::Identity(2, 2)}, scalar(1.0), Vec::Ones(1), 2);
  const auto c = companion_form(ValidatedModel(m), {0}, simple_state(Vec::Zero(2), 1, 2));
  Mat expected = Mat::Zero(4, 4);
  expected.bottomLeftCorner(2, 2).setIdentity();
  EXPECT_EQ(c[0].a, expected);
}

TEST(CompanionForm, SimulationMatchesDirectRecursion) {
  std::mt19937_64 g(4);
  MsVarModel m = make_raw({random_matrix(3, 1 + 6, g, 0.3), random_matrix(3, 1 + 6, g, 0.3)},
                          {random_spd(3, g), random_spd(3, g)}, (Mat(2, 2) << 0.7, 0.3, 0.4, 0.6).finished(),
                          (Vec(2) << 0.5, 0.5).finished(), 2);
  const ValidatedModel vm(m);
  PathState st = simple_state(random_vec(3, g), 6, 2);
  st.initial[0] = random_vec(3, g);
  st.observed = {random_vec(3, g)};
  const RegimePath path{0, 1, 1, 0, 1, 0};
  for (std::uint64_t seed : {1u, 2u, 99u}) {
    const auto a = simulate_real_path(vm, st, path, seed);
    const auto b = simulate_companion_path(vm, st, path, seed);
    for (int s = -1; s <= 6; ++s) EXPECT_LE((a.at(s) - b.at(s)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(SimulateRealPath, PureNoiseHasZeroMean) {
  const ValidatedModel vm(ar1(0.0, 0.0, 1.0));
  const PathState st = simple_state(Vec::Zero(1), 2);
  MomentAccumulator acc;
  for (std::uint64_t i = 0; i < 1000000; ++i) acc.add(simulate_real_path(vm, st, {0, 0}, i).at(2)(0));
  EXPECT_WITHIN_SE(acc.estimate(), 0.0, 4.0);
}

TEST(SimulateRealPath, NoiselessLimitIsTheRecursion) {
  const ValidatedModel vm(ar1(1.0, 0.5, 1e-20));
  const auto y = simulate_real_path(vm, simple_state(Vec::Zero(1), 3), {0, 0, 0}, 5);
  EXPECT_NEAR(y.at(1)(0), 1.0, 1e-9);
  EXPECT_NEAR(y.at(2)(0), 1.5, 1e-9);
  EXPECT_NEAR(y.at(3)(0), 1.75, 1e-9);
}

TEST(SimulateRealPath, Ar1MeanAtThree) {
  const ValidatedModel vm(ar1(1.0, 0.5, 1.0));
  const PathState st = simple_state(Vec::Zero(1), 3);
  MomentAccumulator acc;
  for (std::uint64_t i = 0; i < 200000; ++i) acc.add(simulate_real_path(vm, st, {0, 0, 0}, i).at(3)(0));
  EXPECT_WITHIN_SE(acc.estimate(), 1.75, 4.0);
}

TEST(SimulateRealPath, SameSeedSameTrajectory) {
  const ValidatedModel vm(two_regime(2));
  const PathState st = simple_state(Vec::Ones(2), 4);
  const auto a = simulate_real_path(vm, st, {0, 1, 0, 1}, 17);
  const auto b = simulate_real_path(vm, st, {0, 1, 0, 1}, 17);
  for (int s = 0; s <= 4; ++s) EXPECT_EQ(a.at(s), b.at(s));
}

TEST(PathState, ExogenousLeadingOneRequired) {
  const ValidatedModel vm(ar1(0.0, 0.5, 1.0));
  PathState st = simple_state(Vec::Zero(1), 2);
  st.exogenous[1](0) = 2.0;
  EXPECT_THROW(validate_state(vm, st), Error);
}
