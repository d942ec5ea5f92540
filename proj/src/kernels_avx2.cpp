// AVX2+FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// must only be reached after a runtime cpuid check (see kernels.cpp).

#include "geovar/kernels.hpp"

#if defined(GEOVAR_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))

#include <immintrin.h>

namespace geovar::kern {

namespace {

double dot_avx2(const double* x, const double* y, std::size_t len) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= len; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= len; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  __m128d sum2 = _mm_add_pd(lo, hi);
  double out = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
  for (; i < len; ++i) out += x[i] * y[i];
  return out;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t len) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    yv = _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), yv);
    _mm256_storeu_pd(y + i, yv);
  }
  for (; i < len; ++i) y[i] += a * x[i];
}

void scal_avx2(double a, double* x, std::size_t len) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  for (; i < len; ++i) x[i] *= a;
}

void rot_avx2(double* x, double* y, std::size_t len, double c, double s) {
  __m256d cv = _mm256_set1_pd(c);
  __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= len; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    _mm256_storeu_pd(x + i, _mm256_fmadd_pd(cv, xv, _mm256_mul_pd(sv, yv)));
    _mm256_storeu_pd(y + i, _mm256_fmsub_pd(cv, yv, _mm256_mul_pd(sv, xv)));
  }
  for (; i < len; ++i) {
    double xi = x[i];
    double yi = y[i];
    x[i] = c * xi + s * yi;
    y[i] = -s * xi + c * yi;
  }
}

double nrm2sq_avx2(const double* x, std::size_t len) { return dot_avx2(x, x, len); }

}  // namespace

const Ops* avx2_ops() {
  static const Ops ops{dot_avx2, axpy_avx2, scal_avx2, rot_avx2, nrm2sq_avx2, "avx2"};
  return &ops;
}

}  // namespace geovar::kern

#else

namespace geovar::kern {
const Ops* avx2_ops() { return nullptr; }
}  // namespace geovar::kern

#endif
