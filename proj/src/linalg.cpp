#include "geovar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geovar/errors.hpp"
#include "geovar/kernels.hpp"

namespace geovar {

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Mat& Mat::operator+=(const Mat& o) {
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Mat& Mat::operator-=(const Mat& o) {
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Mat& Mat::operator*=(double a) {
  kern::active().scal(a, data_.data(), data_.size());
  return *this;
}

Vecd vadd(const Vecd& a, const Vecd& b) {
  Vecd r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

Vecd vsub(const Vecd& a, const Vecd& b) {
  Vecd r(a);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

Vecd vscale(double s, const Vecd& a) {
  Vecd r(a);
  kern::active().scal(s, r.data(), r.size());
  return r;
}

void vaxpy_inplace(double a, const Vecd& x, Vecd& y) {
  kern::active().axpy(a, x.data(), y.data(), y.size());
}

double vdot(const Vecd& a, const Vecd& b) { return kern::active().dot(a.data(), b.data(), a.size()); }

double vnorm(const Vecd& a) { return std::sqrt(kern::active().nrm2sq(a.data(), a.size())); }

double vnorm_inf(const Vecd& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

Vecd matvec(const Mat& m, const Vecd& x) {
  Vecd y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) y[i] = kern::active().dot(m.row(i), x.data(), m.cols());
  return y;
}

Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik != 0.0) kern::active().axpy(aik, b.row(k), c.row(i), b.cols());
    }
  return c;
}

double max_abs(const Mat& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r = std::max(r, std::abs(m(i, j)));
  return r;
}

Mat symmetrize(const Mat& m) {
  Mat s(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

Lu::Lu(const Mat& a) : n_(a.rows()), lu_(a), piv_(a.rows()), det_(1.0) {
  for (std::size_t i = 0; i < n_; ++i) piv_[i] = i;
  for (std::size_t k = 0; k < n_; ++k) {
    std::size_t p = k;
    double best = std::abs(lu_(k, k));
    for (std::size_t i = k + 1; i < n_; ++i) {
      double v = std::abs(lu_(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (p != k) {
      for (std::size_t j = 0; j < n_; ++j) std::swap(lu_(k, j), lu_(p, j));
      std::swap(piv_[k], piv_[p]);
      det_ = -det_;
    }
    double pivot = lu_(k, k);
    det_ *= pivot;
    if (pivot == 0.0) continue;  // singular; det stays 0, solve will blow up deliberately
    for (std::size_t i = k + 1; i < n_; ++i) {
      lu_(i, k) /= pivot;
      double lik = lu_(i, k);
      if (lik != 0.0)
        kern::active().axpy(-lik, lu_.row(k) + k + 1, lu_.row(i) + k + 1, n_ - k - 1);
    }
  }
}

Vecd Lu::solve(const Vecd& rhs) const {
  Vecd x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = rhs[piv_[i]];
  for (std::size_t i = 1; i < n_; ++i)
    x[i] -= kern::active().dot(lu_.row(i), x.data(), i);
  for (std::size_t ii = n_; ii-- > 0;) {
    x[ii] -= kern::active().dot(lu_.row(ii) + ii + 1, x.data() + ii + 1, n_ - ii - 1);
    x[ii] /= lu_(ii, ii);
  }
  return x;
}

Cholesky::Cholesky(const Mat& a) : n_(a.rows()), l_(a.rows(), a.rows(), 0.0) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j) - kern::active().dot(l_.row(i), l_.row(j), j);
      if (i == j) {
        require(s > 0.0, ErrorKind::Internal, "matrix not positive definite in Cholesky");
        l_(i, i) = std::sqrt(s);
      } else {
        l_(i, j) = s / l_(j, j);
      }
    }
  }
}

Vecd Cholesky::solve_lower(const Vecd& b) const {
  Vecd y(b);
  for (std::size_t i = 0; i < n_; ++i) {
    y[i] -= kern::active().dot(l_.row(i), y.data(), i);
    y[i] /= l_(i, i);
  }
  return y;
}

Vecd Cholesky::solve_upper(const Vecd& y) const {
  Vecd x(y);
  for (std::size_t ii = n_; ii-- > 0;) {
    double s = x[ii];
    for (std::size_t k = ii + 1; k < n_; ++k) s -= l_(k, ii) * x[k];
    x[ii] = s / l_(ii, ii);
  }
  return x;
}

namespace {

double offdiag_norm(const Mat& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
  return std::sqrt(2.0 * s);
}

}  // namespace

EigResult sym_eig(const Mat& a_in) {
  std::size_t n = a_in.rows();
  Mat a = symmetrize(a_in);
  // eigenvectors accumulated as rows of vt so rotations stay contiguous
  Mat vt = Mat::identity(n);
  double scale = max_abs(a);
  if (scale == 0.0) scale = 1.0;
  const double tol = 1e-14 * scale;
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol * std::sqrt(static_cast<double>(n))) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double app = a(p, p);
        double aqq = a(q, q);
        double theta = 0.5 * (aqq - app) / apq;
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        // two-sided rotation A <- J^T A J with J(p,p)=J(q,q)=c, J(p,q)=s,
        // J(q,p)=-s: rows first, then columns
        kern::active().rot(a.row(p), a.row(q), n, c, -s);
        for (std::size_t i = 0; i < n; ++i) {
          double aip = a(i, p);
          double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        kern::active().rot(vt.row(p), vt.row(q), n, c, -s);
      }
    }
  }
  EigResult r;
  r.values.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.values[i] = a(i, i);
    order[i] = i;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });
  EigResult out;
  out.values.resize(n);
  out.vectors = Mat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = vt(order[k], i);
  }
  return out;
}

EigResult sym_eig_generalized(const Mat& a, const Mat& g) {
  std::size_t n = a.rows();
  Cholesky chol(g);
  // B = L^{-1} A L^{-T}
  Mat b(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    Vecd col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = a(i, j);
    Vecd w = chol.solve_lower(col);
    for (std::size_t i = 0; i < n; ++i) b(i, j) = w[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    Vecd rowv(n);
    for (std::size_t j = 0; j < n; ++j) rowv[j] = b(i, j);
    Vecd w = chol.solve_lower(rowv);
    for (std::size_t j = 0; j < n; ++j) b(i, j) = w[j];
  }
  EigResult inner = sym_eig(b);
  EigResult out;
  out.values = inner.values;
  out.vectors = Mat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    Vecd y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = inner.vectors(i, k);
    Vecd x = chol.solve_upper(y);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = x[i];
  }
  return out;
}

SvdResult svd(const Mat& a_in) {
  std::size_t m = a_in.rows();
  std::size_t n = a_in.cols();
  // one-sided Jacobi on columns of A: A V = U Sigma
  Mat a = a_in;
  Mat v = Mat::identity(n);
  const int max_sweeps = 60;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double app = 0.0, aqq = 0.0, apq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          app += a(i, p) * a(i, p);
          aqq += a(i, q) * a(i, q);
          apq += a(i, p) * a(i, q);
        }
        if (std::abs(apq) > 1e-30 &&
            std::abs(apq) > 1e-16 * std::sqrt(app * aqq)) {
          converged = false;
          double theta = 0.5 * (aqq - app) / apq;
          double t = (theta >= 0.0 ? 1.0 : -1.0) /
                     (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          double c = 1.0 / std::sqrt(t * t + 1.0);
          double s = t * c;
          for (std::size_t i = 0; i < m; ++i) {
            double aip = a(i, p);
            double aiq = a(i, q);
            a(i, p) = c * aip - s * aiq;
            a(i, q) = s * aip + c * aiq;
          }
          for (std::size_t i = 0; i < n; ++i) {
            double vip = v(i, p);
            double viq = v(i, q);
            v(i, p) = c * vip - s * viq;
            v(i, q) = s * vip + c * viq;
          }
        }
      }
    }
    if (converged) break;
  }
  SvdResult r;
  r.sigma.resize(n);
  r.u = Mat(m, n);
  r.v = Mat(n, n);
  std::vector<std::size_t> order(n);
  Vecd norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    norms[j] = std::sqrt(s);
    order[j] = j;
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t j = order[k];
    r.sigma[k] = norms[j];
    double inv = norms[j] > 0.0 ? 1.0 / norms[j] : 0.0;
    for (std::size_t i = 0; i < m; ++i) r.u(i, k) = a(i, j) * inv;
    for (std::size_t i = 0; i < n; ++i) r.v(i, k) = v(i, j);
  }
  return r;
}

double cond2(const Mat& a) {
  SvdResult s = svd(a);
  double smin = s.sigma.back();
  double smax = s.sigma.front();
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

}  // namespace geovar
