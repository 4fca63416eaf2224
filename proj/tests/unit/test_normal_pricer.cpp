#include "msvar/normal_pricer.hpp"
#include "msvar/oracle.hpp"
#include "test_support.hpp"

using namespace msvar;
using namespace msvar::test;

namespace {

struct Desk {
  ValidatedModel model;
  NormalMarket market;
  PathState state;
};

Desk desk_normal(int T) {
  const auto f = desk("desk_normal.json");
  PathState st = f.state;
  st.exogenous.resize(static_cast<std::size_t>(T));
  return {ValidatedModel(f.model), f.market.normal, st};
}

PathFunctional weighted_payoff(const WeightScheme& w, double strike, OptionSide side) {
  return [w, strike, side](const Trajectory& y) {
    double x = 0.0;
    for (int m = 1; m <= w.weights.rows(); ++m) x += w.weights.row(m - 1).dot(y.at(m).tail(w.weights.cols()));
    return side == OptionSide::Call ? std::max(x - strike, 0.0) : std::max(strike - x, 0.0);
  };
}

}  // namespace

TEST(WeightBuilder, European) {
  const auto w = arithmetic_weight_builder(WeightKind::European, 2, 3, 0);
  EXPECT_EQ(w.weights, (Mat(3, 2) << 0, 0, 0, 0, 1, 0).finished());
}

TEST(WeightBuilder, Asian) {
  const auto w = arithmetic_weight_builder(WeightKind::Asian, 2, 4, 1);
  for (int t = 0; t < 4; ++t) EXPECT_EQ(w.weights.row(t), (Eigen::RowVector2d(0.0, 0.25)));
}

TEST(WeightBuilder, Basket) {
  const auto w = arithmetic_weight_builder(WeightKind::Basket, 2, 3, 0, Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(w.weights, (Mat(3, 2) << 0, 0, 0, 0, 0.5, 0.5).finished());
}

TEST(WeightBuilder, BadIndex) {
  expect_error(ErrorKind::IndexOutOfRange, [] { (void)arithmetic_weight_builder(WeightKind::European, 2, 3, 2); });
  expect_error(ErrorKind::IndexOutOfRange,
               [] { (void)arithmetic_weight_builder(WeightKind::Basket, 2, 3, 0, Vec::Ones(3)); });
}

TEST(TruncatedNormal, AtTheMoney) {
  EXPECT_NEAR(truncated_call(1.0, 1.0, 1.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(truncated_put(1.0, 1.0, 1.0), 0.3989422804014327, 1e-15);
}

TEST(TruncatedNormal, CallPutParity) {
  std::mt19937_64 g(1);
  for (int i = 0; i < 100; ++i) {
    const Vec v = random_vec(3, g, 2.0);
    const double s = std::abs(v(1));
    EXPECT_NEAR(truncated_call(v(0), s, v(2)) - truncated_put(v(0), s, v(2)), v(0) - v(2), 1e-12);
  }
}

TEST(TruncatedNormal, MatchesQuadrature) {
  const double q = quad_expectation_1d([](double x) { return std::max(x - 1.0, 0.0); }, 2.0, 1.0, 1e-12, {1.0});
  EXPECT_NEAR(truncated_call(2.0, 1.0, 1.0), q, 1e-10);
}

TEST(TruncatedNormal, DegenerateIsIntrinsic) {
  EXPECT_EQ(truncated_call(3.0, 0.0, 1.0), 2.0);
  EXPECT_EQ(truncated_put(3.0, 0.0, 1.0), 0.0);
}

TEST(WeightedPriceLaw, PastWeightsOnly) {
  auto d = desk_normal(3);
  d.state.observed = {(Vec(3) << 0.1, 101.0, 49.0).finished()};
  WeightScheme w{Mat::Zero(3, 2)};
  w.weights.row(0) << 0.5, 2.0;
  const RegimePath path{0, 1, 1};
  const StackedSystem sys(d.model, path, normal_kernel(d.model, d.market)(path, covariance_path(d.model, path)),
                          d.state);
  const auto law = weighted_price_law(d.market, w, sys, d.state);
  EXPECT_EQ(law.variance, 0.0);
  EXPECT_DOUBLE_EQ(law.mean, 0.5 * 101.0 + 2.0 * 49.0);
}

TEST(WeightedPriceLaw, LastPeriodIsTheOneStepLaw) {
  auto d = desk_normal(3);
  d.state.observed = {(Vec(3) << 0.1, 101.0, 49.0).finished(), (Vec(3) << -0.2, 102.0, 50.5).finished()};
  const RegimePath path{0, 1, 0};
  const auto deltas = normal_kernel(d.model, d.market)(path, covariance_path(d.model, path));
  const StackedSystem sys(d.model, path, deltas, d.state);
  const auto law = weighted_price_law(d.market, arithmetic_weight_builder(WeightKind::European, 2, 3, 1), sys, d.state);
  const auto one = law_one_step(d.model, 0, contract_kernel(deltas[2], d.state, 3), d.model.sigma(0), d.state, 3);
  EXPECT_NEAR(law.mean, one.mean(2), 1e-10);
  EXPECT_NEAR(law.variance, one.cov(2, 2), 1e-10);
  // Martingale: the Q mean of x_3 is (1+r) x_2.
  EXPECT_NEAR(law.mean, 1.01 * 50.5, 1e-9);
}

TEST(WeightedPriceLaw, MatchesSimulatedMoments) {
  const auto d = desk_normal(5);
  const RegimePath path{1, 1, 0, 1, 0};
  const auto deltas = normal_kernel(d.model, d.market)(path, covariance_path(d.model, path));
  const StackedSystem sys(d.model, path, deltas, d.state);
  const auto w = arithmetic_weight_builder(WeightKind::Asian, 2, 5, 0);
  const auto law = weighted_price_law(d.market, w, sys, d.state);
  MomentAccumulator acc;
  for (const auto& y : simulate_under_q(d.model, d.state, path, deltas, 3, 200000)) {
    double x = 0.0;
    for (int m = 1; m <= 5; ++m) x += w.weights.row(m - 1).dot(y.at(m).tail(2));
    acc.add(x);
  }
  EXPECT_WITHIN_SE(acc.estimate(), law.mean, 4.0);
  EXPECT_LE(std::abs(acc.variance() - law.variance), 4.0 * std::sqrt(2.0 / 200000) * law.variance);
}

TEST(NormalOption, SingleRegimeBachelier) {
  std::mt19937_64 g(5);
  const ValidatedModel vm(make_raw({(Mat(1, 2) << 0.0, 1.0).finished()}, {scalar(4.0)}, scalar(1.0), Vec::Ones(1)));
  const NormalMarket mk{0, 1, 0.0};
  const PathState st = simple_state(Vec::Constant(1, 100.0), 2);
  const auto q = price_normal_option(vm, mk, arithmetic_weight_builder(WeightKind::European, 1, 2), 101.0,
                                     OptionSide::Call, st, Conditioning::known({}));
  EXPECT_NEAR(q.price, truncated_call(100.0, std::sqrt(8.0), 101.0), 1e-12);
}

TEST(NormalOption, PutCallParityUnderMixing) {
  auto d = desk_normal(5);
  d.state.observed = {(Vec(3) << 0.1, 101.0, 49.0).finished()};
  const double disc = std::pow(1.01, -4);
  for (const auto& cond : {Conditioning::known({1}), Conditioning::filtered()})
    for (const auto& w : {arithmetic_weight_builder(WeightKind::Asian, 2, 5, 1),
                          arithmetic_weight_builder(WeightKind::Basket, 2, 5, 0, Eigen::Vector2d(0.3, 0.7))}) {
      const auto c = price_normal_option(d.model, d.market, w, 80.0, OptionSide::Call, d.state, cond);
      const auto p = price_normal_option(d.model, d.market, w, 80.0, OptionSide::Put, d.state, cond);
      EXPECT_NEAR(c.price - p.price, disc * (c.expected_underlying - 80.0), 1e-10);
    }
}

TEST(NormalOption, MonotoneInStrike) {
  const auto d = desk_normal(5);
  const auto w = arithmetic_weight_builder(WeightKind::European, 2, 5, 0);
  double last_call = 1e300, last_put = -1.0;
  for (double k = 80.0; k <= 120.0; k += 2.5) {
    const double c = price_normal_option(d.model, d.market, w, k, OptionSide::Call, d.state, Conditioning::known({})).price;
    const double p = price_normal_option(d.model, d.market, w, k, OptionSide::Put, d.state, Conditioning::known({})).price;
    EXPECT_LT(c, last_call);
    EXPECT_GT(p, last_put);
    last_call = c;
    last_put = p;
  }
}

TEST(NormalOption, DeskModelAgainstMonteCarlo) {
  const auto d = desk_normal(3);
  const auto w = arithmetic_weight_builder(WeightKind::Basket, 2, 3, 0, Eigen::Vector2d(0.5, 0.5));
  const double strike = 75.0;
  const auto exact = price_normal_option(d.model, d.market, w, strike, OptionSide::Call, d.state, Conditioning::known({}));
  const auto paths = conditioning_paths(d.model, d.state, Conditioning::known({}), normal_kernel(d.model, d.market));
  const auto mc = mc_price(d.model, d.state, paths, normal_kernel(d.model, d.market),
                           weighted_payoff(w, strike, OptionSide::Call), constant_discount(0.01, 0, 3),
                           mc_opts(1000000, 42));
  EXPECT_WITHIN_SE(mc, exact.price, 3.0);
}

TEST(NormalOption, KnownPrefixMustMatchObservations) {
  auto d = desk_normal(5);
  d.state.observed = {(Vec(3) << 0.1, 101.0, 49.0).finished()};
  const auto w = arithmetic_weight_builder(WeightKind::European, 2, 5, 0);
  expect_error(ErrorKind::ShapeMismatch, [&] {
    (void)price_normal_option(d.model, d.market, w, 100.0, OptionSide::Call, d.state, Conditioning::known({}));
  });
}
