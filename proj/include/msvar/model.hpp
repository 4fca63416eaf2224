#pragma once

#include "msvar/linalg.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace msvar {

/// Constant covariance Σ(j) per regime.
struct ConstantCovariance {
  std::vector<Mat> sigma;
};

/// vech(Σ_t) = B_0(s_t) + Σ_{j=1..q*} B_j(s_t) vech(Σ_{t-j}).
/// ARCH terms are not representable: arch_order must stay 0.
struct GarchCovariance {
  int arch_order = 0;
  std::vector<Vec> b0;              ///< [regime], length n(n+1)/2
  std::vector<std::vector<Mat>> b;  ///< [regime][j-1], j = 1..q*
  std::vector<Mat> initial;         ///< Σ_{1-q*}, ..., Σ_0
  [[nodiscard]] int q_star() const { return static_cast<int>(initial.size()); }
};

using CovarianceSpec = std::variant<ConstantCovariance, GarchCovariance>;

/// Raw parameter set. Regime indices are 0-based throughout the library.
struct MsVarModel {
  int n_regimes = 1;
  int lag_order = 1;
  int dim = 1;
  int exo_dim = 1;
  std::vector<Mat> coeff;  ///< Π(j) = [A_0(j) : A_1(j) : ... : A_p(j)], n x (k + np)
  Mat transition;          ///< row-stochastic N x N
  Vec initial_dist;        ///< distribution of s_1
  CovarianceSpec cov;
};

/// Intercept block and lag blocks of one period: [M_0 : M_1 : ... : M_p].
/// Used both for effective VAR coefficients and for kernel Δ matrices.
struct StepMatrices {
  Mat m0;                 ///< n x k
  std::vector<Mat> lags;  ///< p blocks, n x n

  [[nodiscard]] static StepMatrices zero(int n, int k, int p);
  StepMatrices& operator+=(const StepMatrices& other);
};

using RegimePath = std::vector<int>;

/// Model whose invariants have been checked. Immutable.
class ValidatedModel {
 public:
  explicit ValidatedModel(MsVarModel model);

  [[nodiscard]] const MsVarModel& raw() const { return model_; }
  [[nodiscard]] int N() const { return model_.n_regimes; }
  [[nodiscard]] int p() const { return model_.lag_order; }
  [[nodiscard]] int n() const { return model_.dim; }
  [[nodiscard]] int k() const { return model_.exo_dim; }
  [[nodiscard]] double transition(int from, int to) const { return model_.transition(from, to); }
  [[nodiscard]] const Mat& transition() const { return model_.transition; }
  [[nodiscard]] const Vec& initial_dist() const { return model_.initial_dist; }

  [[nodiscard]] Mat intercept(int regime) const;
  [[nodiscard]] Mat lag(int regime, int m) const;  ///< A_m(regime), m = 1..p
  [[nodiscard]] const StepMatrices& step(int regime) const { return steps_[regime]; }

  [[nodiscard]] bool constant_covariance() const { return std::holds_alternative<ConstantCovariance>(model_.cov); }
  /// Only valid for constant covariance.
  [[nodiscard]] const Mat& sigma(int regime) const;
  [[nodiscard]] const Mat& sigma_factor(int regime) const;

  void check_path(const RegimePath& path, std::size_t expected_length) const;

 private:
  MsVarModel model_;
  std::vector<StepMatrices> steps_;
  std::vector<Mat> factors_;
};

[[nodiscard]] ValidatedModel validate_model(MsVarModel model);

/// Initial lags, exogenous inputs and an observed prefix.
struct PathState {
  std::vector<Vec> initial;    ///< y_{1-p}, ..., y_0
  std::vector<Vec> exogenous;  ///< ψ_1, ..., ψ_T
  std::vector<Vec> observed;   ///< y_1, ..., y_t

  [[nodiscard]] int horizon() const { return static_cast<int>(exogenous.size()); }
  [[nodiscard]] int time() const { return static_cast<int>(observed.size()); }
  /// y_s for 1-p <= s <= t.
  [[nodiscard]] const Vec& y(int s) const;
  /// Same state with the observed prefix cut to length t.
  [[nodiscard]] PathState truncated(int t) const;
};

void validate_state(const ValidatedModel& model, const PathState& state);

/// y_{1-p}, ..., y_T for one simulated or observed trajectory.
struct Trajectory {
  int lag_order = 1;
  std::vector<Vec> values;
  [[nodiscard]] const Vec& at(int s) const { return values[static_cast<std::size_t>(s + lag_order - 1)]; }
  [[nodiscard]] Vec& at(int s) { return values[static_cast<std::size_t>(s + lag_order - 1)]; }
  [[nodiscard]] int horizon() const { return static_cast<int>(values.size()) - lag_order; }
};

/// Trajectory holding the state's initial lags and observed prefix; later entries are zero.
[[nodiscard]] Trajectory trajectory_from_state(const PathState& state, int n);

/// M_0 ψ_s + Σ_m M_m y_{s-m}.
[[nodiscard]] Vec apply_step(const StepMatrices& step, const Vec& psi, const Trajectory& traj, int s);

/// ∏_{m=t+1}^T p_{s_{m-1} s_m}, with the initial distribution supplying the m = 1 factor.
[[nodiscard]] double markov_path_prob(const ValidatedModel& model, const RegimePath& path, int from_time);

/// Σ_1..Σ_T along the path.
[[nodiscard]] std::vector<Mat> covariance_path(const ValidatedModel& model, const RegimePath& path);

struct CompanionStep {
  Vec nu;  ///< [A_0 ψ_t ; 0]
  Mat a;   ///< np x np companion matrix
};

[[nodiscard]] std::vector<CompanionStep> companion_form(const ValidatedModel& model, const RegimePath& path,
                                                        const PathState& state);

/// Extraction matrix [I_n : 0 : ... : 0].
[[nodiscard]] Mat companion_extraction(int n, int p);

/// Simulates y_{t+1}..y_T under the real measure, t being the observed prefix length.
[[nodiscard]] Trajectory simulate_real_path(const ValidatedModel& model, const PathState& state,
                                            const RegimePath& path, std::uint64_t seed);

/// Same law through the VAR(1) embedding; shares the noise stream with simulate_real_path.
[[nodiscard]] Trajectory simulate_companion_path(const ValidatedModel& model, const PathState& state,
                                                 const RegimePath& path, std::uint64_t seed);

}  // namespace msvar
