#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace msvar {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Standard normal density and distribution function.
[[nodiscard]] inline double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
[[nodiscard]] inline double norm_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Stacks the on-and-below-diagonal entries column by column.
[[nodiscard]] Vec vech(const Mat& m);
[[nodiscard]] Mat unvech(const Vec& v, int n);
[[nodiscard]] inline int vech_size(int n) { return n * (n + 1) / 2; }

/// Largest |m(i,j) - m(j,i)|.
[[nodiscard]] double asymmetry(const Mat& m);
[[nodiscard]] inline Mat symmetrize(const Mat& m) { return 0.5 * (m + m.transpose()); }

/// Lower Cholesky factor; throws NonPositiveDefiniteCovariance naming `what` on failure.
/// No jitter is ever added.
[[nodiscard]] Mat checked_cholesky(const Mat& m, const std::string& what);

/// Rank of `a` from a column-pivoted QR with a relative threshold.
[[nodiscard]] int numerical_rank(const Mat& a, double rel_tol = 1e-12);

}  // namespace msvar
