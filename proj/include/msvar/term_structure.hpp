#pragma once

#include "msvar/girsanov.hpp"
#include "msvar/lognormal_pricer.hpp"
#include "msvar/market.hpp"
#include "msvar/normal_pricer.hpp"
#include "msvar/regime_mixture.hpp"

namespace msvar {

/// Rows u = t+2..T of the no-arbitrage restriction on θ_{t+1..T}.
struct HjmConstraintSet {
  int t = 0;
  KernelConstraint constraint;  ///< a is (T-t-1) x n(T-t)
};

/// Row u, block m (m = 1..u-t-1):
///   a_{m,u} = e_1'J Σ_{i=m}^{u-t-1} Φ_{t+i}···Φ_{t+m+1} J'   (empty product = I)
/// b_u = ½Σ_i a_iΣ_{t+i}a_i' - Σ_i a_iν_{t+i} - e_1'J Σ_{m=1}^{u-t-1} Φ_{t+m}···Φ_{t+1} y*_t + Σ_{m=2}^{u-t} e_m'y_t.
/// Product order and limits are the ones that make E_Q[D_u/D_t] = B_{t,u} hold; the
/// unit-expectation Monte Carlo test in the term-structure suite pins them down.
[[nodiscard]] HjmConstraintSet hjm_constraints(const ValidatedModel& model, const HjmLayout& layout,
                                               const RegimePath& path, const PathState& state);

/// Entropy kernel for the constraints, placed in the intercept column of Δ_0 for t+1..T.
[[nodiscard]] KernelDeltas hjm_kernel_deltas(const ValidatedModel& model, const HjmLayout& layout,
                                             const RegimePath& path, const PathState& state);

/// Factory bound to one state; prefix periods get a zero kernel.
[[nodiscard]] KernelFactory hjm_kernel(const ValidatedModel& model, const HjmLayout& layout, const PathState& state);

/// log B_{t,u} read off the current forward curve: -Σ_{j=1}^{u-t} e_j'y_t.
[[nodiscard]] double curve_log_bond(const Vec& y_t, int t, int u);

/// Σ_paths exp(a_{t,u}) f(path) with the kernel installed; equals the curve price when the kernel holds.
[[nodiscard]] BondQuote hjm_zcb(const ValidatedModel& model, const HjmLayout& layout, const PathState& state, int u,
                                const Conditioning& cond);

/// Law of f_{v,u1,u2} = (1/(u2-u1)) Σ_{m=u1}^{u2-1} e_{m-v+1}'y_v under the Gaussian with the given mean.
[[nodiscard]] ScalarLaw forward_rate_law(const PathLaw& pl, int v, int u1, int u2, const Vec& mean);

/// E[(e^X - K)^+] and E[(K - e^X)^+] for X ~ N(μ, σ²).
[[nodiscard]] double lognormal_call(double mu, double sigma, double strike);
[[nodiscard]] double lognormal_put(double mu, double sigma, double strike);

struct RateOptionSpec {
  int v = 1;   ///< fixing time
  int u1 = 1;  ///< accrual start
  int u2 = 2;  ///< accrual end and payment time
  double strike = 0.0;
  OptionSide side = OptionSide::Call;
};

/// Pays (f_{v,u1,u2} - κ)^+ (call) at u2: Σ_paths exp(a_{t,u2}) E_fwd[(f - κ)^+].
[[nodiscard]] double price_forward_caplet(const ValidatedModel& model, const HjmLayout& layout,
                                          const PathState& state, const RateOptionSpec& spec,
                                          const Conditioning& cond);

/// Pays (L - κ)^+ at u2 with L = (exp(Δf) - 1)/Δ, Δ = u2 - u1.
[[nodiscard]] double price_libor_caplet(const ValidatedModel& model, const HjmLayout& layout, const PathState& state,
                                        const RateOptionSpec& spec, const Conditioning& cond);

/// Pays (B_{v,u} - K)^+ (call) at v, with B_{v,u} = exp(-(u-v) f_{v,v,u}).
[[nodiscard]] double price_zcb_option(const ValidatedModel& model, const HjmLayout& layout, const PathState& state,
                                      int v, int u, double strike, OptionSide side, const Conditioning& cond);

/// Conditioning paths for the rate pricers. The filter uses the real-measure density.
[[nodiscard]] std::vector<WeightedPath> hjm_paths(const ValidatedModel& model, const PathState& state,
                                                  const Conditioning& cond);

}  // namespace msvar
