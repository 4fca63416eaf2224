#pragma once

#include "msvar/market.hpp"
#include "msvar/model.hpp"
#include "msvar/stacked.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace msvar {

/// Linear restriction A θ = b on the stacked kernel (θ_1', ..., θ_T')'.
struct KernelConstraint {
  Mat a;
  Vec b;
};

/// Minimizer of ½ θ'Σ̄^{-1}θ subject to the constraint: θ = Σ̄A'(AΣ̄A')^{-1}b.
[[nodiscard]] Vec entropy_kernel(const std::vector<Mat>& sigma, const KernelConstraint& c);

struct VarianceKernelOptions {
  double tol = 1e-12;
  int max_iter = 200000;
  double damping = 0.5;
};

struct VarianceKernelResult {
  Vec theta;
  int iterations = 0;
  double residual = 0.0;
};

/// Fixed point θ = Σ̄Λ^{-1}A'(AΣ̄Λ^{-1}A')^{-1}b, Λ_t^{-1} = 1 - exp(-θ_t'Σ_t^{-1}θ_t),
/// reached by damped iteration from the entropy kernel.
[[nodiscard]] VarianceKernelResult variance_kernel(const std::vector<Mat>& sigma, const KernelConstraint& c,
                                                   const VarianceKernelOptions& opts = {});

/// θ_t'Σ_t^{-1}θ_t for each block.
[[nodiscard]] Vec kernel_quadratic_forms(const std::vector<Mat>& sigma, const Vec& theta);
[[nodiscard]] double entropy_objective(const std::vector<Mat>& sigma, const Vec& theta);
/// ∏_t (exp(x_t) - 1).
[[nodiscard]] double variance_objective(const std::vector<Mat>& sigma, const Vec& theta);

/// Per-period kernels plus their Δ representation.
struct GirsanovKernel {
  std::vector<Vec> theta;  ///< θ_t for the periods whose lags are known, t = 1..min(t_obs + 1, T)
  KernelDeltas deltas;
};

/// Builds the Δ matrices of a kernel for one regime path with covariances Σ_1..Σ_T.
using KernelFactory = std::function<KernelDeltas(const RegimePath&, const std::vector<Mat>&)>;

[[nodiscard]] KernelFactory zero_kernel(const ValidatedModel& model);

/// Θ_t = Σ_t M_2'(M_2Σ_tM_2')^{-1} = [(Σ_12Σ_22^{-1})' : I]'.
[[nodiscard]] Mat asset_projection(const Mat& sigma, const Mat& m2);

/// Δ_{·,t} of the normal-market kernel for one regime and covariance.
[[nodiscard]] StepMatrices normal_kernel_step(const ValidatedModel& model, const NormalMarket& market, int regime,
                                              const Mat& sigma);
/// Δ_{·,t} of the log-normal kernel, intercept column absorbing -Θ_t α_t.
[[nodiscard]] StepMatrices lognormal_kernel_step(const ValidatedModel& model, const FxMarket& market, int regime,
                                                 const Mat& sigma);
/// α_t = ½ R_2^{-1} diag(R_2 Σ_22 R_2').
[[nodiscard]] Vec lognormal_alpha(const FxMarket& market, const Mat& sigma);

/// θ̂_{2,t} straight from its defining expression, for checking the Δ representation.
[[nodiscard]] Vec normal_theta_hat(const ValidatedModel& model, const NormalMarket& market, int regime,
                                   const PathState& state, int t);
[[nodiscard]] Vec lognormal_theta_hat(const ValidatedModel& model, const FxMarket& market, int regime,
                                      const PathState& state, int t);

/// θ_t = Δ_{0,t}ψ_t + Σ_m Δ_{m,t} y_{t-m}.
[[nodiscard]] Vec contract_kernel(const StepMatrices& deltas, const PathState& state, int t);

[[nodiscard]] KernelFactory normal_kernel(const ValidatedModel& model, const NormalMarket& market);
[[nodiscard]] KernelFactory lognormal_kernel(const ValidatedModel& model, const FxMarket& market);

[[nodiscard]] GirsanovKernel market_kernel_normal(const ValidatedModel& model, const NormalMarket& market,
                                                  const RegimePath& path, const PathState& state);
[[nodiscard]] GirsanovKernel market_kernel_lognormal(const ValidatedModel& model, const FxMarket& market,
                                                     const RegimePath& path, const PathState& state);

struct StatePriceStats {
  double entropy = 0.0;
  double variance_formula = 0.0;  ///< ∏(exp(x_t) - 1)
  double variance_exact = 0.0;    ///< exp(Σ x_t) - 1 for deterministic θ
  double variance_mc = 0.0;
  double variance_mc_se = 0.0;
};

/// Diagnostics of L_T = ∏ exp(θ_t'Σ_t^{-1}ξ_t - ½θ_t'Σ_t^{-1}θ_t) with ξ_t ~ N(0, Σ_t).
[[nodiscard]] StatePriceStats state_price_stats(const std::vector<Mat>& sigma, const Vec& theta, std::uint64_t seed,
                                                std::size_t paths);

}  // namespace msvar
