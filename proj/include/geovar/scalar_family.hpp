#pragma once
// Closed-form scalar families on a chart: value, gradient, Hessian.
// These serve as conformal factors psi, stationary beta coefficients, and the
// scalar components of perturbation tensors.

#include <memory>

#include "geovar/linalg.hpp"

namespace geovar {

class ScalarFamily {
public:
  virtual ~ScalarFamily() = default;
  virtual int dim() const = 0;
  virtual double value(const Vecd& x) const = 0;
  virtual Vecd grad(const Vecd& x) const = 0;
  virtual Mat hess(const Vecd& x) const = 0;
};

using ScalarPtr = std::shared_ptr<const ScalarFamily>;

// c
ScalarPtr scalar_constant(int dim, double c);

// c0 + sum_i a_i (x_i - p_i)^2
ScalarPtr scalar_quadratic(double c0, Vecd a, Vecd p);

// c0 + amp * cos(freq * x_axis + phase)
ScalarPtr scalar_cosine(int dim, double c0, double amp, int axis, double freq, double phase);

// exp(|x - p|^2)
ScalarPtr scalar_exp_dist2(Vecd p);

// (c0 + b.(x-p) + (x-p)^T Q (x-p)) * window(x), window a C^2 plateau bump
// supported in the box p +- radii
ScalarPtr scalar_windowed_poly(Vecd p, Vecd radii, double c0, Vecd b, Mat q);

// product of two families
ScalarPtr scalar_product(ScalarPtr a, ScalarPtr b);

// a + s * b
ScalarPtr scalar_linear_comb(ScalarPtr a, double s, ScalarPtr b);

}  // namespace geovar
