// Equivalence of the SIMD kernels with the scalar reference implementation.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "geovar/kernels.hpp"
#include "geovar/rng.hpp"

using namespace geovar;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t len) {
  std::vector<double> v(len);
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

}  // namespace

TEST_CASE("scalar kernels compute the obvious things") {
  const auto& ops = kern::scalar_ops();
  std::vector<double> x{1.0, 2.0, 3.0};
  std::vector<double> y{4.0, -5.0, 6.0};
  CHECK(ops.dot(x.data(), y.data(), 3) == doctest::Approx(12.0));
  ops.axpy(2.0, x.data(), y.data(), 3);
  CHECK(y[0] == doctest::Approx(6.0));
  CHECK(y[2] == doctest::Approx(12.0));
  CHECK(ops.nrm2sq(x.data(), 3) == doctest::Approx(14.0));
}

TEST_CASE("avx2 variant matches the scalar reference") {
  const kern::Ops* simd = kern::avx2_ops();
  if (!simd) {
    MESSAGE("AVX2 kernels not built on this platform; nothing to compare");
    return;
  }
  const auto& ref = kern::scalar_ops();
  Rng rng(20240601);
  for (std::size_t len : {std::size_t(1), std::size_t(3), std::size_t(4), std::size_t(7),
                          std::size_t(8), std::size_t(17), std::size_t(64), std::size_t(513)}) {
    auto x = random_vec(rng, len);
    auto y = random_vec(rng, len);

    double d_ref = ref.dot(x.data(), y.data(), len);
    double d_simd = simd->dot(x.data(), y.data(), len);
    CHECK(std::abs(d_ref - d_simd) <= 1e-13 * (1.0 + std::abs(d_ref)));

    auto y1 = y, y2 = y;
    ref.axpy(0.37, x.data(), y1.data(), len);
    simd->axpy(0.37, x.data(), y2.data(), len);
    for (std::size_t i = 0; i < len; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));

    auto x1 = x, x2 = x;
    auto z1 = y, z2 = y;
    double c = std::cos(0.7), s = std::sin(0.7);
    ref.rot(x1.data(), z1.data(), len, c, s);
    simd->rot(x2.data(), z2.data(), len, c, s);
    for (std::size_t i = 0; i < len; ++i) {
      CHECK(x1[i] == doctest::Approx(x2[i]).epsilon(1e-14));
      CHECK(z1[i] == doctest::Approx(z2[i]).epsilon(1e-14));
    }

    double n_ref = ref.nrm2sq(x.data(), len);
    double n_simd = simd->nrm2sq(x.data(), len);
    CHECK(std::abs(n_ref - n_simd) <= 1e-13 * (1.0 + n_ref));
  }
}

TEST_CASE("active dispatch returns a working implementation") {
  const auto& ops = kern::active();
  std::vector<double> x{1.0, 1.0, 1.0, 1.0, 1.0};
  CHECK(ops.nrm2sq(x.data(), 5) == doctest::Approx(5.0));
  MESSAGE("active kernel set: ", ops.name);
}
