#pragma once
// 1-D cubic splines with exact derivative evaluation, and the C^2 quintic
// smoothstep used for cutoff profiles. The perturbation constructions are
// closed forms built from these, so their first and second derivatives are
// the true derivatives of the implemented formula.

#include <cstddef>
#include <vector>

namespace geovar {

// natural cubic spline on a strictly increasing knot vector
class CubicSpline {
public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);

  double value(double t) const;
  double deriv(double t) const;
  double deriv2(double t) const;

  double x_front() const { return x_.front(); }
  double x_back() const { return x_.back(); }

private:
  std::size_t segment(double t) const;
  std::vector<double> x_, a_, b_, c_, d_;  // per-segment a + b dt + c dt^2 + d dt^3
};

// quintic smoothstep: 0 for w<=0, 1 for w>=1, C^2 across both ends
double smoothstep5(double w);
double smoothstep5_d(double w);
double smoothstep5_dd(double w);

// plateau cutoff: 1 on [0, z0], 0 on [1, inf), C^2 monotone between
struct PlateauCutoff {
  double z0 = 0.25;
  double value(double z) const;
  double deriv(double z) const;
  double deriv2(double z) const;
};

// compactly supported C^2 bump profile on [0,1], max 1 at s=1/2:
// 64 * (s(1-s))^3, zero to third order at both ends
double bump_profile(double s);
double bump_profile_d(double s);
double bump_profile_dd(double s);

}  // namespace geovar
