#pragma once

#include "msvar/girsanov.hpp"
#include "msvar/model.hpp"
#include "msvar/monte_carlo.hpp"
#include "msvar/regime_mixture.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace msvar {

/// y_s = Π(s_s)𝖸_{s-1} + θ_s + Σ_s^{1/2}ε_s for s = t+1..T, θ_s = Δ_{0,s}ψ_s + Σ_m Δ_{m,s}y_{s-m}
/// evaluated on the simulated lags. Empty deltas reproduce simulate_real_path on the same seed.
[[nodiscard]] Trajectory simulate_under_q(const ValidatedModel& model, const PathState& state,
                                          const RegimePath& path, const KernelDeltas& deltas, std::uint64_t seed);

/// n_paths trajectories; trajectory i uses seed substream_seed(seed, i).
[[nodiscard]] std::vector<Trajectory> simulate_under_q(const ValidatedModel& model, const PathState& state,
                                                       const RegimePath& path, const KernelDeltas& deltas,
                                                       std::uint64_t seed, std::size_t n_paths);

using PathFunctional = std::function<double(const Trajectory&)>;

/// exp(-Σ_{m=t}^{u-1} y_m[coord]) = D_u / D_t.
[[nodiscard]] PathFunctional rate_discount(int coord, int t, int u);
/// (1 + r)^{-(u-t)}.
[[nodiscard]] PathFunctional constant_discount(double rate, int t, int u);

/// Sample mean of discount(y)·payoff(y) with y drawn under Q: regime paths from `paths`, one
/// Gaussian trajectory per draw with the kernel from `kernel`. Antithetic pairs share the regime path.
[[nodiscard]] Estimate mc_price(const ValidatedModel& model, const PathState& state,
                                const std::vector<WeightedPath>& paths, const KernelFactory& kernel,
                                const PathFunctional& payoff, const PathFunctional& discount, const McOptions& mc);

/// Several payoffs on the same draws; returns one estimate per payoff.
[[nodiscard]] std::vector<Estimate> mc_price_many(const ValidatedModel& model, const PathState& state,
                                                  const std::vector<WeightedPath>& paths, const KernelFactory& kernel,
                                                  const std::vector<PathFunctional>& discounted_payoffs,
                                                  const McOptions& mc);

/// E[f(X)], X ~ N(μ, σ²), by adaptive Gauss-Kronrod over μ ± 10σ split at `breaks`.
[[nodiscard]] double quad_expectation_1d(const std::function<double(double)>& f, double mu, double sigma, double tol,
                                         const std::vector<double>& breaks = {});

/// E[f(X)], X ~ N(mean, cov) in two dimensions, by nested adaptive quadrature over ±10 standard
/// deviations of the whitened variables. `inner_breaks(x1)` lists x2 values where f(x1, ·) has a kink.
[[nodiscard]] double quad_expectation_2d(const std::function<double(double, double)>& f, const Vec& mean,
                                         const Mat& cov, double tol,
                                         const std::function<std::vector<double>(double)>& inner_breaks = {});

/// Plain Monte Carlo of E[f(X)] for a bivariate normal.
[[nodiscard]] Estimate mc_expectation_2d(const std::function<double(double, double)>& f, const Vec& mean,
                                         const Mat& cov, std::size_t n, std::uint64_t seed);

}  // namespace msvar
