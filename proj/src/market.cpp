#include "msvar/market.hpp"

#include "msvar/errors.hpp"

#include <numeric>
#include <string>

namespace msvar {

Mat NormalMarket::m2() const {
  Mat m = Mat::Zero(n_x, n());
  m.rightCols(n_x).setIdentity();
  return m;
}

void NormalMarket::validate(int model_dim) const {
  if (n_z < 0 || n_x < 1) fail(ErrorKind::ValidationError, "normal market needs n_z >= 0 and n_x >= 1");
  if (n() != model_dim) fail(ErrorKind::ShapeMismatch, "n_z + n_x must equal the model dimension");
  if (!(rate > -1.0)) fail(ErrorKind::ValidationError, "risk-free rate must exceed -1");
}

int FxMarket::n_f() const { return std::accumulate(n_f_country.begin(), n_f_country.end(), 0); }

int FxMarket::foreign_row(int country, int k) const {
  int row = n_d;
  for (int j = 0; j < country; ++j) row += n_f_country[static_cast<std::size_t>(j)];
  return row + k;
}

int FxMarket::country_of_foreign_row(int row) const {
  int start = n_d;
  for (int i = 0; i < n_q(); ++i) {
    start += n_f_country[static_cast<std::size_t>(i)];
    if (row < start) return i;
  }
  return -1;
}

Mat FxMarket::m2() const {
  Mat m = Mat::Zero(n_x(), n());
  m.rightCols(n_x()).setIdentity();
  return m;
}

Mat FxMarket::j() const {
  Mat m = Mat::Zero(n_f(), n_q());
  for (int i = 0; i < n_q(); ++i)
    for (int k = 0; k < n_f_country[static_cast<std::size_t>(i)]; ++k) m(foreign_row(i, k) - n_d, i) = 1.0;
  return m;
}

Mat FxMarket::r2() const {
  Mat r = Mat::Identity(n_x(), n_x());
  r.block(n_d, n_d + n_f(), n_f(), n_q()) = j();
  return r;
}

Mat FxMarket::c() const {
  Mat m = Mat::Zero(n_x(), n());
  for (int i = 0; i < n_d; ++i) m(domestic_row(i), domestic_rate_coord()) = 1.0;
  for (int i = 0; i < n_q(); ++i) {
    for (int k = 0; k < n_f_country[static_cast<std::size_t>(i)]; ++k) m(foreign_row(i, k), foreign_rate_coord(i)) = 1.0;
    m(currency_row(i), domestic_rate_coord()) = 1.0;
    m(currency_row(i), foreign_rate_coord(i)) = -1.0;
  }
  return m;
}

void FxMarket::validate(int model_dim) const {
  if (n_d < 0 || n_z < 1) fail(ErrorKind::ValidationError, "fx market needs n_d >= 0 and n_z >= 1");
  for (int c : n_f_country)
    if (c < 0) fail(ErrorKind::ValidationError, "foreign asset counts must be nonnegative");
  if (n_z < n_q() + 1) fail(ErrorKind::ValidationError, "n_z must hold the domestic and every foreign rate");
  if (n_x() < 1) fail(ErrorKind::ValidationError, "fx market has no assets");
  if (n() != model_dim) fail(ErrorKind::ShapeMismatch, "n_z + n_d + n_f + n_q must equal the model dimension");
}

void HjmLayout::validate() const {
  if (horizon < 1 || dim < 1) fail(ErrorKind::ValidationError, "hjm layout needs positive horizon and dimension");
  if (horizon > dim) fail(ErrorKind::ValidationError, "hjm layout requires T <= n");
}

}  // namespace msvar
