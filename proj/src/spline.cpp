#include "geovar/spline.hpp"

#include <algorithm>
#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

namespace {

// one-sided derivative estimate from up to five knots (Lagrange differentiation)
double end_slope(const std::vector<double>& x, const std::vector<double>& y, bool left) {
  std::size_t n = x.size();
  std::size_t k = std::min<std::size_t>(5, n);
  std::size_t off = left ? 0 : n - k;
  double z = left ? x.front() : x.back();
  double slope = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    // derivative of the i-th Lagrange basis at z
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      double prod = 1.0;
      for (std::size_t l = 0; l < k; ++l) {
        if (l == i || l == j) continue;
        prod *= (z - x[off + l]) / (x[off + i] - x[off + l]);
      }
      sum += prod / (x[off + i] - x[off + j]);
    }
    slope += sum * y[off + i];
  }
  return slope;
}

}  // namespace

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)) {
  std::size_t n = x_.size();
  require(n >= 2 && y.size() == n, ErrorKind::Internal, "spline needs >= 2 knots");
  std::size_t seg = n - 1;
  a_.resize(seg);
  b_.resize(seg);
  c_.resize(seg);
  d_.resize(seg);
  if (n == 2) {
    a_[0] = y[0];
    b_[0] = (y[1] - y[0]) / (x_[1] - x_[0]);
    c_[0] = d_[0] = 0.0;
    return;
  }
  // clamped spline: end slopes from one-sided high-order estimates keep the
  // boundary layers at interpolation accuracy
  double s_lo = end_slope(x_, y, true);
  double s_hi = end_slope(x_, y, false);
  std::vector<double> h(seg);
  for (std::size_t i = 0; i < seg; ++i) h[i] = x_[i + 1] - x_[i];
  std::vector<double> m(n, 0.0), diag(n, 0.0), rhs(n, 0.0), sub(n, 0.0), sup(n, 0.0);
  diag[0] = 2.0 * h[0];
  sup[0] = h[0];
  rhs[0] = 6.0 * ((y[1] - y[0]) / h[0] - s_lo);
  diag[n - 1] = 2.0 * h[seg - 1];
  sub[n - 1] = h[seg - 1];
  rhs[n - 1] = 6.0 * (s_hi - (y[n - 1] - y[n - 2]) / h[seg - 1]);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sub[i] = h[i - 1];
    diag[i] = 2.0 * (h[i - 1] + h[i]);
    sup[i] = h[i];
    rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h[i] - (y[i] - y[i - 1]) / h[i - 1]);
  }
  for (std::size_t i = 1; i < n; ++i) {
    double w = sub[i] / diag[i - 1];
    diag[i] -= w * sup[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  m[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t ii = n - 1; ii-- > 0;) m[ii] = (rhs[ii] - sup[ii] * m[ii + 1]) / diag[ii];
  for (std::size_t i = 0; i < seg; ++i) {
    a_[i] = y[i];
    c_[i] = m[i] / 2.0;
    d_[i] = (m[i + 1] - m[i]) / (6.0 * h[i]);
    b_[i] = (y[i + 1] - y[i]) / h[i] - h[i] * (2.0 * m[i] + m[i + 1]) / 6.0;
  }
}

std::size_t CubicSpline::segment(double t) const {
  if (t <= x_.front()) return 0;
  if (t >= x_.back()) return x_.size() - 2;
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double CubicSpline::value(double t) const {
  std::size_t i = segment(t);
  double dt = t - x_[i];
  return a_[i] + dt * (b_[i] + dt * (c_[i] + dt * d_[i]));
}

double CubicSpline::deriv(double t) const {
  std::size_t i = segment(t);
  double dt = t - x_[i];
  return b_[i] + dt * (2.0 * c_[i] + 3.0 * dt * d_[i]);
}

double CubicSpline::deriv2(double t) const {
  std::size_t i = segment(t);
  double dt = t - x_[i];
  return 2.0 * c_[i] + 6.0 * dt * d_[i];
}

double smoothstep5(double w) {
  if (w <= 0.0) return 0.0;
  if (w >= 1.0) return 1.0;
  return w * w * w * (10.0 + w * (-15.0 + 6.0 * w));
}

double smoothstep5_d(double w) {
  if (w <= 0.0 || w >= 1.0) return 0.0;
  return 30.0 * w * w * (1.0 - w) * (1.0 - w);
}

double smoothstep5_dd(double w) {
  if (w <= 0.0 || w >= 1.0) return 0.0;
  return 60.0 * w * (1.0 - w) * (1.0 - 2.0 * w);
}

double PlateauCutoff::value(double z) const {
  if (z <= z0) return 1.0;
  if (z >= 1.0) return 0.0;
  return 1.0 - smoothstep5((z - z0) / (1.0 - z0));
}

double PlateauCutoff::deriv(double z) const {
  if (z <= z0 || z >= 1.0) return 0.0;
  return -smoothstep5_d((z - z0) / (1.0 - z0)) / (1.0 - z0);
}

double PlateauCutoff::deriv2(double z) const {
  if (z <= z0 || z >= 1.0) return 0.0;
  double s = (z - z0) / (1.0 - z0);
  return -smoothstep5_dd(s) / ((1.0 - z0) * (1.0 - z0));
}

double bump_profile(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double p = s * (1.0 - s);
  return 64.0 * p * p * p;
}

double bump_profile_d(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double p = s * (1.0 - s);
  return 64.0 * 3.0 * p * p * (1.0 - 2.0 * s);
}

double bump_profile_dd(double s) {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  double p = s * (1.0 - s);
  return 64.0 * (6.0 * p * (1.0 - 2.0 * s) * (1.0 - 2.0 * s) - 6.0 * p * p);
}

}  // namespace geovar
