// Reference kernels. These define the semantics the SIMD variants must match.

#include "geovar/kernels.hpp"

namespace geovar::kern {

namespace {

double dot_scalar(const double* x, const double* y, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) y[i] += a * x[i];
}

void scal_scalar(double a, double* x, std::size_t len) {
  for (std::size_t i = 0; i < len; ++i) x[i] *= a;
}

void rot_scalar(double* x, double* y, std::size_t len, double c, double s) {
  for (std::size_t i = 0; i < len; ++i) {
    double xi = x[i];
    double yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -s * xi + c * yi;
  }
}

double nrm2sq_scalar(const double* x, std::size_t len) {
  double acc = 0.0;
  for (std::size_t i = 0; i < len; ++i) acc += x[i] * x[i];
  return acc;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{dot_scalar, axpy_scalar, scal_scalar, rot_scalar, nrm2sq_scalar, "scalar"};
  return ops;
}

}  // namespace geovar::kern
