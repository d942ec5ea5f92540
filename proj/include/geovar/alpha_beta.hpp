#pragma once
// Data for the orthogonally split metrics on Sigma x R:
//   g((v,r),(w,rbar)) = g0(alpha v, w) - beta r rbar
// with g0 the flat chart metric on Sigma (the circle chart also has g0 = dx^2)
// and alpha a positive g0-symmetric operator family.

#include "geovar/linalg.hpp"

namespace geovar {

struct Box {
  Vecd lo, hi;
};

struct AlphaBetaPair {
  enum class SigmaGeom { FlatLine, Circle };  // Circle: arc-length chart, period 2*pi
  enum class AlphaKind { Identity, ConstDiag, CosIsotropic, OnePlusDist2 };
  enum class BetaKind { Const, OnePlusS2, ExpDist2 };

  int sigma_dim = 1;
  SigmaGeom geom = SigmaGeom::FlatLine;
  AlphaKind alpha_kind = AlphaKind::Identity;
  Vecd alpha_params;  // ConstDiag: entries; CosIsotropic: a0 a1 -> (a0 + a1 cos x1) Id; OnePlusDist2: scale
  BetaKind beta_kind = BetaKind::Const;
  Vecd beta_params;   // Const / OnePlusS2: b0
  Vecd base_point;    // x0 on Sigma for the distance function d0
  Box sigma_box;      // Sigma sampling box (ignored for Circle domain checks)
  double s_halfwidth = 50.0;

  // alpha block and its chart derivatives; the chart orders coordinates as
  // (x_1..x_k, s), so derivative index k = sigma_dim means d/ds.
  void alpha_eval(const Vecd& x, double s, Mat& a, std::vector<Mat>* da,
                  std::vector<std::vector<Mat>>* d2a) const;
  void beta_eval(const Vecd& x, double s, double& b, Vecd* db, Mat* d2b) const;

  double dist0(const Vecd& x) const;  // g0 distance to base_point (exact chart formula)

  void validate() const;
};

}  // namespace geovar
