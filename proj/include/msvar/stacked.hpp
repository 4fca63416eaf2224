#pragma once

#include "msvar/model.hpp"

#include <vector>

namespace msvar {

/// Δ_{0,t}, Δ_{1,t}, ..., Δ_{p,t} for t = 1..T. An empty vector means the zero kernel.
using KernelDeltas = std::vector<StepMatrices>;

struct GaussianLaw {
  Vec mean;
  Mat cov;
};

/// (Ψ, δ, Σ̄) for one regime path and kernel.
/// Ψ is unit lower block triangular with block (t, t-m) = -(A_m(s_t) + Δ_{m,t}).
/// All laws are obtained by triangular solves; Ψ is never inverted explicitly.
class StackedSystem {
 public:
  StackedSystem(const ValidatedModel& model, const RegimePath& path, const KernelDeltas& deltas,
                const PathState& state);

  [[nodiscard]] int horizon() const { return horizon_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const Mat& psi() const { return psi_; }
  [[nodiscard]] const Vec& delta() const { return delta_; }
  [[nodiscard]] const std::vector<Mat>& sigma_blocks() const { return sigma_; }
  [[nodiscard]] const std::vector<Mat>& sigma_factors() const { return factors_; }
  [[nodiscard]] const RegimePath& path() const { return path_; }
  /// A_m(s_t) + Δ_{m,t} for t = 1..T (index t-1).
  [[nodiscard]] const std::vector<StepMatrices>& effective_steps() const { return steps_; }

  /// Ψ_22^{-1} rhs where Ψ_22 covers times t+1..T.
  [[nodiscard]] Vec solve_future(int t, const Vec& rhs) const;
  /// Σ̄^c_t v, block-diagonal product over times t+1..T.
  [[nodiscard]] Vec sigma_future_times(int t, const Vec& v) const;

  [[nodiscard]] GaussianLaw law_full() const;
  /// Law of (y_{t+1}, ..., y_T) given y_1..y_t stacked in `observed` (length nt).
  [[nodiscard]] GaussianLaw law_conditional_future(int t, const Vec& observed) const;
  /// Lower factor F with F F' equal to the conditional covariance at t.
  [[nodiscard]] Mat future_factor(int t) const;

  /// Log of the prefix density of y_1..y_t (t = observed.size() / n).
  [[nodiscard]] double log_likelihood_prefix(const Vec& observed) const;
  [[nodiscard]] double likelihood_prefix(const Vec& observed) const;

 private:
  int horizon_;
  int dim_;
  RegimePath path_;
  std::vector<StepMatrices> steps_;
  std::vector<Mat> sigma_;
  std::vector<Mat> factors_;
  Mat psi_;
  Vec delta_;
};

[[nodiscard]] StackedSystem build_stacked(const ValidatedModel& model, const RegimePath& path,
                                          const KernelDeltas& deltas, const PathState& state);

/// ȳ_t = (y_1', ..., y_t')' from the state's observed prefix.
[[nodiscard]] Vec stack_observed(const PathState& state);

/// Law of y_t given y_{t-1}, ..., y_{t-p}: mean Π(regime) 𝖸_{t-1} + θ_t, covariance Σ_t.
[[nodiscard]] GaussianLaw law_one_step(const ValidatedModel& model, int regime, const Vec& theta, const Mat& sigma,
                                       const PathState& state, int t);

}  // namespace msvar
