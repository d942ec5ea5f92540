#pragma once
// Symmetric (0,2)-tensor families on a chart with analytic derivatives.
// Perturbation fields implement this interface; the perturbed metric kind
// composes one of these with a base family.

#include <memory>
#include <vector>

#include "geovar/linalg.hpp"

namespace geovar {

class SymTensorFamily {
public:
  virtual ~SymTensorFamily() = default;
  virtual int dim() const = 0;
  virtual Mat value(const Vecd& x) const = 0;
  // d1[k] = d_k h
  virtual std::vector<Mat> deriv1(const Vecd& x) const = 0;
  // d2[k][l] = d_k d_l h
  virtual std::vector<std::vector<Mat>> deriv2(const Vecd& x) const = 0;
};

using TensorPtr = std::shared_ptr<const SymTensorFamily>;

}  // namespace geovar
