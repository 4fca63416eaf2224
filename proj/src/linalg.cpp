#include "msvar/linalg.hpp"

#include "msvar/errors.hpp"

#include <algorithm>

namespace msvar {

Vec vech(const Mat& m) {
  const int n = static_cast<int>(m.rows());
  Vec v(vech_size(n));
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) v(k++) = m(i, j);
  return v;
}

Mat unvech(const Vec& v, int n) {
  if (v.size() != vech_size(n)) fail(ErrorKind::ShapeMismatch, "vech vector length does not match dimension");
  Mat m(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j)
    for (int i = j; i < n; ++i) {
      m(i, j) = v(k);
      m(j, i) = v(k);
      ++k;
    }
  return m;
}

double asymmetry(const Mat& m) {
  double worst = 0.0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < i; ++j) worst = std::max(worst, std::abs(m(i, j) - m(j, i)));
  return worst;
}

Mat checked_cholesky(const Mat& m, const std::string& what) {
  if (m.rows() != m.cols()) fail(ErrorKind::ShapeMismatch, what + " is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (!m.allFinite() || asymmetry(m) > 1e-12 * scale)
    fail(ErrorKind::NonPositiveDefiniteCovariance, what + " is not symmetric");
  Eigen::LLT<Mat> llt(m);
  if (llt.info() != Eigen::Success)
    fail(ErrorKind::NonPositiveDefiniteCovariance, what + " is not positive definite");
  Mat l = llt.matrixL();
  if ((l.diagonal().array() <= 0.0).any() || !l.allFinite())
    fail(ErrorKind::NonPositiveDefiniteCovariance, what + " is not positive definite");
  return l;
}

int numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::ColPivHouseholderQR<Mat> qr(a);
  qr.setThreshold(rel_tol);
  return static_cast<int>(qr.rank());
}

}  // namespace msvar
