#pragma once

#include "msvar/market.hpp"
#include "msvar/model.hpp"
#include "msvar/monte_carlo.hpp"
#include "msvar/regime_mixture.hpp"
#include "msvar/stacked.hpp"

#include <functional>
#include <optional>

namespace msvar {

/// Stacked system and risk-neutral conditional law of y_{t+1..T} along one regime path.
struct PathLaw {
  int t = 0;
  int T = 0;
  int n = 0;
  StackedSystem sys;
  GaussianLaw law;
  Mat factor;  ///< F F' = law.cov
  Vec y_now;   ///< y_t
};

[[nodiscard]] PathLaw make_path_law(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas,
                                    const PathState& state);

/// γ_{t,u}: ones at coordinate `coord` of the blocks of y_{t+1}..y_{u-1}, so that
/// Σ_{m=t+1}^u r̃_m = r̃_{t+1} + γ'ȳ^c_t when r̃_{m+1} = y_m[coord].
[[nodiscard]] Vec rate_path_selector(int n, int T, int t, int u, int coord);

/// a = -y_t[coord] - γ'μ + ½γ'Σγ.
[[nodiscard]] double bond_exponent(const PathLaw& pl, int u, int coord, const Vec& mean);
[[nodiscard]] inline double bond_exponent(const PathLaw& pl, int u, int coord) {
  return bond_exponent(pl, u, coord, pl.law.mean);
}

/// μ - Σγ_{t,u} on coordinate `coord`: the mean under the (t,u)-forward measure.
[[nodiscard]] Vec forward_measure_mean(const PathLaw& pl, int u, int coord = 0);

struct BondQuote {
  double exponent = 0.0;  ///< log of the price
  double price = 1.0;
  bool mixture = false;
};

[[nodiscard]] BondQuote zcb_domestic(const ValidatedModel& model, const FxMarket& market, const PathState& state, int u,
                                     const Conditioning& cond);
[[nodiscard]] BondQuote zcb_foreign(const ValidatedModel& model, const FxMarket& market, int country,
                                    const PathState& state, int u, const Conditioning& cond);

/// E[(e^{X1} - e^{X2})^+] for a bivariate normal X. A vanishing difference variance gives the
/// deterministic payoff of the common law.
[[nodiscard]] double margrabe_psi(double mu1, double mu2, double var1, double var2, double cov12);

/// Payoff (w_0 x^w - ŵ_0 x^ŵ)^+ paid at `maturity`, x^w = exp(Σ_m w_m' x̃_m).
/// Rows m-1 of `w`, `w_hat` hold w_m and ŵ_m (length n_x); rows after the maturity must be zero.
struct ExchangeSpec {
  double w0 = 1.0;
  double w0_hat = 1.0;
  Mat w;
  Mat w_hat;
  int maturity = 1;
};

/// One side of an exchange: an asset in domestic currency or a cash amount.
struct AssetLeg {
  enum class Kind { Domestic, Foreign, Currency, Cash };
  Kind kind = Kind::Cash;
  int index = 0;  ///< asset, or country for Foreign/Currency (0-based)
  int sub = 0;    ///< asset within the country for Foreign
  double units = 1.0;
};

/// Exchange of `short_leg` into `long_leg` at `maturity`.
[[nodiscard]] ExchangeSpec exchange_from_legs(const FxMarket& market, const AssetLeg& long_leg,
                                              const AssetLeg& short_leg, int maturity, int T);

struct SpecialCase {
  int case_no = 1;  ///< 1..9
  OptionSide side = OptionSide::Call;
  int first = 0;
  int first_sub = 0;
  int second = 0;
  int second_sub = 0;
  double first_units = 1.0;
  double second_units = 1.0;
  std::optional<double> strike;  ///< required for cases 1-3
  int maturity = 1;
};

/// Legs of the nine listed cases: 1 domestic/cash, 2 foreign/cash, 3 currency/cash, 4 domestic/domestic,
/// 5 domestic/foreign, 6 domestic/currency, 7 foreign/foreign, 8 foreign/currency, 9 currency/currency.
/// Call is long the first leg; Put is long the second.
[[nodiscard]] std::pair<AssetLeg, AssetLeg> special_case_legs(const FxMarket& market, const SpecialCase& sc);
[[nodiscard]] ExchangeSpec special_case_weights(const FxMarket& market, const SpecialCase& sc, int T);

/// Σ_paths B_{t,u} Ψ(μ1, μ2, σ1², σ2², σ12) f(path), parameters from the (t,u)-forward law.
[[nodiscard]] double price_exchange_option(const ValidatedModel& model, const FxMarket& market, const ExchangeSpec& ex,
                                           const PathState& state, const Conditioning& cond);

/// μ + Ψ_22^{-1} Σ̄^c (i_{t,u} ⊗ R̃'e_row): mean under the measure using the discounted asset in `x_row` as numeraire.
[[nodiscard]] Vec measure_shift_mean(const PathLaw& pl, const FxMarket& market, int u, int x_row);

/// exp(ã^{i,q}) 𝒩(A; μ̃^{i,q}, Σ_22.1): the currency-measure expectation of D^f_{i,u} 1_A divided by D^f_{i,t}.
/// `event_prob` maps a mean vector of y_{t+1..T} to 𝒩(A; mean, Σ_22.1).
[[nodiscard]] double currency_discount_expectation(const PathLaw& pl, const FxMarket& market, int country, int u,
                                                   const std::function<double(const Vec&)>& event_prob);

/// Payoff [Σ_u D_u Σ_j W(u,j) X_{j,u} - D_v K]^+ / D_t with X_j the domestic-currency value of x-row j:
/// domestic asset, foreign asset times its currency, or the currency itself.
struct GeneralCallSpec {
  Mat weights;  ///< T x n_x; row u-1 holds the weights paid at u
  double strike = 0.0;
  int strike_time = 0;  ///< v >= t
};

/// Event probabilities are estimated by Gaussian sampling with one set of normals shared by every
/// measure shift and every regime path; the standard error is that of the combined estimate.
[[nodiscard]] Estimate price_general_call(const ValidatedModel& model, const FxMarket& market,
                                          const GeneralCallSpec& spec, const PathState& state,
                                          const Conditioning& cond, const McOptions& mc);

/// Current domestic-currency value of x-row j: exp(e_j'R_2 M_2 y_t).
[[nodiscard]] double current_value(const FxMarket& market, const Vec& y, int x_row);

}  // namespace msvar
