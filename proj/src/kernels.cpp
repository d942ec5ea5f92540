// Runtime kernel selection.

#include "geovar/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "geovar/rng.hpp"

#include <cmath>

namespace geovar {

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace geovar

namespace geovar::kern {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* select() {
  const char* force = std::getenv("GEOVAR_FORCE_SCALAR");
  if (force && std::strcmp(force, "0") != 0) return &scalar_ops();
  if (cpu_has_avx2_fma()) {
    const Ops* v = avx2_ops();
    if (v) return v;
  }
  return &scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops* selected = select();
  return *selected;
}

}  // namespace geovar::kern
