#pragma once
// Scalar reference kernels plus AVX2 variants for the dense linear-algebra
// inner loops (dots, axpys, Givens row rotations). The implementation is
// selected once at startup from CPU capabilities; GEOVAR_FORCE_SCALAR=1 in
// the environment pins the scalar path. Both variants are equivalence-tested.

#include <cstddef>

namespace geovar::kern {

struct Ops {
  double (*dot)(const double* x, const double* y, std::size_t len);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t len);
  // x *= a
  void (*scal)(double a, double* x, std::size_t len);
  // simultaneous rotation of two vectors: [x; y] <- [c*x + s*y; -s*x + c*y]
  void (*rot)(double* x, double* y, std::size_t len, double c, double s);
  // sum of squares
  double (*nrm2sq)(const double* x, std::size_t len);
  const char* name;
};

// scalar reference implementation (always available)
const Ops& scalar_ops();

// AVX2+FMA implementation; null if unsupported at build or run time
const Ops* avx2_ops();

// runtime-selected active implementation
const Ops& active();

}  // namespace geovar::kern
