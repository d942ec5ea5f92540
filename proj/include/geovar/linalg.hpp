#pragma once
// Dense real linear algebra sized for this project: chart dimensions n <= 6
// for the pointwise tensor work and a few hundred for the discretized index
// form. Row-major storage; the hot loops route through kern::active().

#include <cstddef>
#include <vector>

namespace geovar {

using Vecd = std::vector<double>;

class Mat {
public:
  Mat() : rows_(0), cols_(0) {}
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool empty() const { return data_.empty(); }

  Mat transposed() const;

  Mat& operator+=(const Mat& o);
  Mat& operator-=(const Mat& o);
  Mat& operator*=(double a);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(double s, Mat a) { return a *= s; }

private:
  std::size_t rows_, cols_;
  Vecd data_;
};

// vector helpers
Vecd vadd(const Vecd& a, const Vecd& b);
Vecd vsub(const Vecd& a, const Vecd& b);
Vecd vscale(double s, const Vecd& a);
void vaxpy_inplace(double a, const Vecd& x, Vecd& y);
double vdot(const Vecd& a, const Vecd& b);
double vnorm(const Vecd& a);
double vnorm_inf(const Vecd& a);

Vecd matvec(const Mat& m, const Vecd& x);
Mat matmul(const Mat& a, const Mat& b);
double max_abs(const Mat& m);
Mat symmetrize(const Mat& m);

// LU with partial pivoting. Factor once, solve many.
class Lu {
public:
  explicit Lu(const Mat& a);
  Vecd solve(const Vecd& rhs) const;
  double det() const { return det_; }
  std::size_t n() const { return n_; }

private:
  std::size_t n_;
  Mat lu_;
  std::vector<std::size_t> piv_;
  double det_;
};

// Cholesky of an SPD matrix; throws Error(Internal) if not positive definite.
class Cholesky {
public:
  explicit Cholesky(const Mat& a);
  // solve L y = b
  Vecd solve_lower(const Vecd& b) const;
  // solve L^T x = y
  Vecd solve_upper(const Vecd& y) const;
  Vecd solve(const Vecd& b) const { return solve_upper(solve_lower(b)); }
  const Mat& lower() const { return l_; }

private:
  std::size_t n_;
  Mat l_;
};

struct EigResult {
  Vecd values;   // ascending
  Mat vectors;   // column k is the eigenvector for values[k]
};

// Cyclic Jacobi eigensolver for symmetric matrices.
EigResult sym_eig(const Mat& a);

// Generalized symmetric problem A v = lambda G v with G SPD.
EigResult sym_eig_generalized(const Mat& a, const Mat& g);

struct SvdResult {
  Vecd sigma;  // descending, nonnegative
  Mat u;       // left singular vectors (columns)
  Mat v;       // right singular vectors (columns)
};

// One-sided Jacobi SVD; keeps small singular values to near machine accuracy.
// Intended for the small n x n endpoint matrices.
SvdResult svd(const Mat& a);

// 2-norm condition number via svd (small matrices only).
double cond2(const Mat& a);

}  // namespace geovar
