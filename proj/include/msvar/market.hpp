#pragma once

#include "msvar/linalg.hpp"

#include <vector>

namespace msvar {

/// y_t = (z_t, x_t): n_z economic variables followed by n_x asset prices, constant rate r per period.
struct NormalMarket {
  int n_z = 0;
  int n_x = 1;
  double rate = 0.0;

  [[nodiscard]] int n() const { return n_z + n_x; }
  [[nodiscard]] Mat m2() const;  ///< [0 : I_{n_x}]
  void validate(int model_dim) const;
};

/// Domestic-foreign log-normal layout.
/// y_t = (z_t, x̃^d_t, x̃^f_t, x̃^q_t); z_t starts with the domestic log rate and the n_q foreign log rates.
struct FxMarket {
  int n_z = 1;
  int n_d = 1;
  std::vector<int> n_f_country;  ///< foreign assets per country; size n_q

  [[nodiscard]] int n_q() const { return static_cast<int>(n_f_country.size()); }
  [[nodiscard]] int n_f() const;
  [[nodiscard]] int n_x() const { return n_d + n_f() + n_q(); }
  [[nodiscard]] int n() const { return n_z + n_x(); }

  /// Rows of the price vector x_t (0-based).
  [[nodiscard]] int domestic_row(int i) const { return i; }
  [[nodiscard]] int foreign_row(int country, int k) const;
  [[nodiscard]] int currency_row(int country) const { return n_d + n_f() + country; }
  [[nodiscard]] int country_of_foreign_row(int row) const;

  /// Coordinates of y_t holding the log rates for the following period.
  [[nodiscard]] int domestic_rate_coord() const { return 0; }
  [[nodiscard]] int foreign_rate_coord(int country) const { return 1 + country; }

  [[nodiscard]] Mat m2() const;  ///< n_x x n
  [[nodiscard]] Mat j() const;   ///< n_f x n_q, country blocks of ones
  [[nodiscard]] Mat r2() const;  ///< n_x x n_x, [[I,0,0],[0,I,J],[0,0,I]]
  [[nodiscard]] Mat c() const;   ///< n_x x n, rate carry rows
  void validate(int model_dim) const;
};

/// Forward-rate layout: y_t = (f̃_{t,t}, ..., f̃_{t,t+T-1}, economic variables), T <= n.
struct HjmLayout {
  int horizon = 1;
  int dim = 1;
  void validate() const;
};

enum class OptionSide { Call, Put };

}  // namespace msvar
