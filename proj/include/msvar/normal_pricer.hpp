#pragma once

#include "msvar/market.hpp"
#include "msvar/model.hpp"
#include "msvar/regime_mixture.hpp"
#include "msvar/stacked.hpp"

namespace msvar {

/// Per-period weights w_1..w_T (row m-1 holds w_m, length n_x).
struct WeightScheme {
  Mat weights;
};

enum class WeightKind { European, Asian, Basket };

/// European(i): w_T = e_i. Asian(i): w_t = e_i / T. Basket(v): w_T = v. Indices are 0-based.
[[nodiscard]] WeightScheme arithmetic_weight_builder(WeightKind kind, int n_x, int T, int asset = 0,
                                                     const Vec& basket = Vec());

struct ScalarLaw {
  double mean = 0.0;
  double variance = 0.0;
};

/// Law of Σ_m w_m'x_m given the observed prefix, along one regime path.
[[nodiscard]] ScalarLaw weighted_price_law(const NormalMarket& market, const WeightScheme& scheme,
                                           const StackedSystem& sys, const PathState& state);

/// E[(X - K)^+] and E[(K - X)^+] for X ~ N(μ, σ²); σ = 0 gives the intrinsic value.
[[nodiscard]] double truncated_call(double mu, double sigma, double strike);
[[nodiscard]] double truncated_put(double mu, double sigma, double strike);

struct NormalQuote {
  double price = 0.0;
  double expected_underlying = 0.0;  ///< mixture mean of the weighted price under the pricing measure
};

/// (1+r)^{-(T-t)} Σ_paths truncated_call(μ, σ, K) f(path | conditioning).
[[nodiscard]] NormalQuote price_normal_option(const ValidatedModel& model, const NormalMarket& market,
                                              const WeightScheme& scheme, double strike, OptionSide side,
                                              const PathState& state, const Conditioning& cond);

}  // namespace msvar
