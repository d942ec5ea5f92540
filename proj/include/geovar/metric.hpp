#pragma once
// Metric families on a single chart of R^n with exact first and second
// coordinate derivatives, plus Christoffel tensors (relative to the flat
// chart connection), curvature, and signature index.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geovar/alpha_beta.hpp"
#include "geovar/linalg.hpp"
#include "geovar/scalar_family.hpp"
#include "geovar/tensor_family.hpp"

namespace geovar {

enum class MetricKind {
  FlatEuclidean,
  Minkowski,
  RoundSphereChart,
  LorentzCylinder,
  SplitProduct,
  StandardStationary,
  GAlphaBeta,
  ConformalRescale,
  Perturbed,
};

const char* metric_kind_name(MetricKind k);
std::optional<MetricKind> metric_kind_from_name(const std::string& s);

struct ChristoffelData {
  Vecd point;
  std::vector<Mat> gamma;  // gamma[i](j,k) = Gamma^i_{jk}, symmetric in (j,k)
};

struct CurvatureData {
  Vecd point;
  // riemann[i][j](k,l) = R^i_{jkl} with R(d_k, d_l) d_j = R^i_{jkl} d_i,
  // sign convention R(X,Y) = [nabla_X, nabla_Y] - nabla_{[X,Y]}
  std::vector<std::vector<Mat>> riemann;
};

// value, Christoffel tensor, and curvature computed in one pass
struct PointGeometry {
  Mat g;
  ChristoffelData ch;
  CurvatureData cu;
};

// Gamma(v,w) as a vector, and Gamma(v,.) as a matrix
Vecd christoffel_vv(const ChristoffelData& ch, const Vecd& v, const Vecd& w);
Mat christoffel_v(const ChristoffelData& ch, const Vecd& v);
// (R(v, w) v)^i contracted for the Jacobi operator: row i, column l over w
Mat jacobi_operator(const CurvatureData& cu, const Vecd& v);

class MetricFamily {
public:
  static constexpr double kDetTol = 1e-12;
  static constexpr double kCondTol = 1e12;

  static MetricFamily flat_euclidean(int n);
  static MetricFamily minkowski(int n);
  static MetricFamily round_sphere_chart(double theta_margin = 0.15);
  static MetricFamily lorentz_cylinder(double theta_margin = 0.15);
  static MetricFamily split_product(int n1, int n2, double c1 = 0.0, double c2 = 0.0);
  static MetricFamily standard_stationary(int n0, ScalarPtr beta, double halfwidth = 50.0);
  static MetricFamily g_alpha_beta(AlphaBetaPair pair);
  static MetricFamily conformal_rescale(const MetricFamily& base, ScalarPtr psi);
  static MetricFamily perturbed(const MetricFamily& base, TensorPtr h, double eps);

  int dim() const { return n_; }
  MetricKind kind() const { return kind_; }
  const Box& domain() const { return domain_; }
  const Vecd& periods() const { return periods_; }
  const Vecd& params() const { return params_; }

  bool in_domain(const Vecd& x) const;
  Vecd wrap(const Vecd& x) const;
  // chart distance with periodic identifications
  double wrapped_distance(const Vecd& a, const Vecd& b) const;
  Vecd wrapped_delta(const Vecd& a, const Vecd& b) const;  // a - b, wrapped componentwise

  // metric value; assembled exactly symmetric
  Mat eval(const Vecd& x) const;
  // order 1 fills dg; order 2 additionally fills d2g
  void derivatives(const Vecd& x, int order, std::vector<Mat>& dg,
                   std::vector<std::vector<Mat>>* d2g) const;

  ChristoffelData christoffel(const Vecd& x) const;
  // also computes dGamma[l][i](j,k) = d_l Gamma^i_{jk}
  void christoffel_with_derivs(const Vecd& x, ChristoffelData& ch,
                               std::vector<std::vector<Mat>>& dgamma) const;
  CurvatureData curvature(const Vecd& x) const;
  PointGeometry geometry(const Vecd& x) const;
  int metric_index(const Vecd& x) const;

  double scalar_g(const Vecd& x, const Vecd& v, const Vecd& w) const;  // g_x(v,w)

  // kind-specific accessors
  const MetricFamily* base() const { return base_.get(); }
  const ScalarFamily* psi() const { return psi_.get(); }
  const ScalarFamily* stationary_beta() const { return beta_.get(); }
  int stationary_base_dim() const { return n0_; }
  const SymTensorFamily* perturbation() const { return bump_.get(); }
  double perturbation_eps() const { return eps_; }
  const AlphaBetaPair* alpha_beta() const { return ab_ ? &*ab_ : nullptr; }
  int split_n1() const { return n0_; }

private:
  MetricFamily() = default;
  void check_in_domain(const Vecd& x) const;
  void check_nondegenerate(const Mat& g, const Vecd& x) const;
  Mat eval_raw(const Vecd& x) const;

  int n_ = 0;
  MetricKind kind_ = MetricKind::FlatEuclidean;
  Vecd params_;
  Box domain_;
  Vecd periods_;
  std::shared_ptr<const MetricFamily> base_;
  ScalarPtr psi_;
  ScalarPtr beta_;
  TensorPtr bump_;
  double eps_ = 0.0;
  std::optional<AlphaBetaPair> ab_;
  int n0_ = 0;  // split n1 / stationary base dim
};

}  // namespace geovar
