#include "geovar/alpha_beta.hpp"

#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void AlphaBetaPair::validate() const {
  require(sigma_dim >= 1, ErrorKind::ValidationError, "sigma_dim must be >= 1");
  require(static_cast<int>(base_point.size()) == sigma_dim, ErrorKind::ValidationError,
          "base_point dimension mismatch");
  if (alpha_kind == AlphaKind::ConstDiag)
    require(static_cast<int>(alpha_params.size()) == sigma_dim, ErrorKind::ValidationError,
            "const-diag alpha needs sigma_dim entries");
  if (alpha_kind == AlphaKind::CosIsotropic)
    require(alpha_params.size() == 2, ErrorKind::ValidationError,
            "cos-isotropic alpha needs two params");
  if (geom == SigmaGeom::Circle)
    require(sigma_dim == 1, ErrorKind::ValidationError, "circle Sigma is one-dimensional");
}

void AlphaBetaPair::alpha_eval(const Vecd& x, double s, Mat& a, std::vector<Mat>* da,
                               std::vector<std::vector<Mat>>* d2a) const {
  (void)s;  // all shipped alpha presets are s-independent
  int k = sigma_dim;
  int n = k + 1;  // chart derivative count includes d/ds
  a = Mat(k, k, 0.0);
  if (da) da->assign(n, Mat(k, k, 0.0));
  if (d2a) d2a->assign(n, std::vector<Mat>(n, Mat(k, k, 0.0)));
  switch (alpha_kind) {
    case AlphaKind::Identity:
      for (int i = 0; i < k; ++i) a(i, i) = 1.0;
      break;
    case AlphaKind::ConstDiag:
      for (int i = 0; i < k; ++i) a(i, i) = alpha_params[i];
      break;
    case AlphaKind::CosIsotropic: {
      double a0 = alpha_params[0], a1 = alpha_params[1];
      double f = a0 + a1 * std::cos(x[0]);
      for (int i = 0; i < k; ++i) a(i, i) = f;
      if (da)
        for (int i = 0; i < k; ++i) (*da)[0](i, i) = -a1 * std::sin(x[0]);
      if (d2a)
        for (int i = 0; i < k; ++i) (*d2a)[0][0](i, i) = -a1 * std::cos(x[0]);
      break;
    }
    case AlphaKind::OnePlusDist2: {
      double scale = alpha_params.empty() ? 1.0 : alpha_params[0];
      double d2 = 0.0;
      for (int i = 0; i < k; ++i) d2 += (x[i] - base_point[i]) * (x[i] - base_point[i]);
      double f = scale * (1.0 + d2);
      for (int i = 0; i < k; ++i) a(i, i) = f;
      if (da)
        for (int c = 0; c < k; ++c)
          for (int i = 0; i < k; ++i) (*da)[c](i, i) = scale * 2.0 * (x[c] - base_point[c]);
      if (d2a)
        for (int c = 0; c < k; ++c)
          for (int i = 0; i < k; ++i) (*d2a)[c][c](i, i) = 2.0 * scale;
      break;
    }
  }
}

void AlphaBetaPair::beta_eval(const Vecd& x, double s, double& b, Vecd* db, Mat* d2b) const {
  int k = sigma_dim;
  int n = k + 1;
  if (db) db->assign(n, 0.0);
  if (d2b) *d2b = Mat(n, n, 0.0);
  switch (beta_kind) {
    case BetaKind::Const:
      b = beta_params.empty() ? 1.0 : beta_params[0];
      break;
    case BetaKind::OnePlusS2: {
      double b0 = beta_params.empty() ? 1.0 : beta_params[0];
      b = b0 + s * s;
      if (db) (*db)[k] = 2.0 * s;
      if (d2b) (*d2b)(k, k) = 2.0;
      break;
    }
    case BetaKind::ExpDist2: {
      double d2 = 0.0;
      for (int i = 0; i < k; ++i) d2 += (x[i] - base_point[i]) * (x[i] - base_point[i]);
      b = std::exp(d2);
      if (db)
        for (int i = 0; i < k; ++i) (*db)[i] = 2.0 * (x[i] - base_point[i]) * b;
      if (d2b)
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            (*d2b)(i, j) = 4.0 * (x[i] - base_point[i]) * (x[j] - base_point[j]) * b;
            if (i == j) (*d2b)(i, j) += 2.0 * b;
          }
      break;
    }
  }
}

double AlphaBetaPair::dist0(const Vecd& x) const {
  if (geom == SigmaGeom::Circle) {
    double d = std::fmod(std::abs(x[0] - base_point[0]), kTwoPi);
    return std::min(d, kTwoPi - d);
  }
  double s = 0.0;
  for (int i = 0; i < sigma_dim; ++i) s += (x[i] - base_point[i]) * (x[i] - base_point[i]);
  return std::sqrt(s);
}

}  // namespace geovar
