#include "geovar/hyperbolicity.hpp"

#include <algorithm>
#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double frob2(const Mat& m) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) s += m(i, j) * m(i, j);
  return s;
}

// Sigma sampling nodes for one axis over a fraction of the declared box
Vecd axis_samples(const AlphaBetaPair& pair, int axis, int grid_n, double fraction) {
  Vecd out;
  if (pair.geom == AlphaBetaPair::SigmaGeom::Circle) {
    for (int i = 0; i < grid_n; ++i) out.push_back(kTwoPi * i / grid_n);
    return out;
  }
  double lo = pair.sigma_box.lo[axis] * fraction;
  double hi = pair.sigma_box.hi[axis] * fraction;
  for (int i = 0; i < grid_n; ++i)
    out.push_back(lo + (hi - lo) * i / std::max(1, grid_n - 1));
  return out;
}

// iterate over the Sigma grid (dim <= 2 in the shipped presets)
template <typename F>
void for_sigma_grid(const AlphaBetaPair& pair, int grid_n, double fraction, F&& f) {
  if (pair.sigma_dim == 1) {
    for (double x : axis_samples(pair, 0, grid_n, fraction)) f(Vecd{x});
  } else if (pair.sigma_dim == 2) {
    for (double x : axis_samples(pair, 0, grid_n, fraction))
      for (double y : axis_samples(pair, 1, grid_n, fraction)) f(Vecd{x, y});
  } else {
    fail(ErrorKind::ValidationError, "sampled checks support sigma_dim <= 2");
  }
}

}  // namespace

MetricFamily build_galphabeta(const AlphaBetaPair& pair) {
  pair.validate();
  // positivity on a deterministic sample grid
  for_sigma_grid(pair, 17, 1.0, [&](const Vecd& x) {
    for (int is = -4; is <= 4; ++is) {
      double s = pair.s_halfwidth * is / 4.0;
      Mat a;
      pair.alpha_eval(x, s, a, nullptr, nullptr);
      EigResult e = sym_eig(symmetrize(a));
      require(e.values.front() > 0.0, ErrorKind::AlphaNotPositive,
              "alpha is not positive definite on the sample grid");
      double b;
      pair.beta_eval(x, s, b, nullptr, nullptr);
      require(b > 0.0, ErrorKind::BetaNotPositive, "beta is not positive on the sample grid");
    }
  });
  return MetricFamily::g_alpha_beta(pair);
}

LambdaMin lambda_min_alpha(const AlphaBetaPair& pair, const Vecd& x, double s) {
  Mat a;
  pair.alpha_eval(x, s, a, nullptr, nullptr);
  a = symmetrize(a);
  EigResult e = sym_eig(a);
  require(e.values.front() > 0.0, ErrorKind::AlphaNotPositive, "alpha not positive definite");
  LambdaMin out;
  out.value = e.values.front();
  // second route: operator norm of the inverse
  Lu lu(a);
  int k = pair.sigma_dim;
  Mat inv(k, k);
  Vecd rhs(k, 0.0);
  for (int c = 0; c < k; ++c) {
    rhs.assign(k, 0.0);
    rhs[c] = 1.0;
    Vecd col = lu.solve(rhs);
    for (int r = 0; r < k; ++r) inv(r, c) = col[r];
  }
  SvdResult sv = svd(inv);
  out.via_inverse = 1.0 / sv.sigma.front();
  return out;
}

HyperbolicityReport hyperbolicity_check(const AlphaBetaPair& pair, int grid_n, int n_max) {
  HyperbolicityReport rep;
  rep.eps_realized = 1e300;
  rep.b_realized = 0.0;
  auto ratio = [&](const Vecd& x, double s) {
    LambdaMin lm = lambda_min_alpha(pair, x, s);
    double d0 = pair.dist0(x);
    double b;
    pair.beta_eval(x, s, b, nullptr, nullptr);
    double lam_d = lm.value * (1.0 + d0 * d0);
    rep.eps_realized = std::min(rep.eps_realized, lam_d);
    rep.b_realized = std::max(rep.b_realized, b);
    return std::sqrt(b / lam_d);
  };
  for (int nstrip = 1; nstrip <= n_max; ++nstrip) {
    double sup = 0.0;
    for_sigma_grid(pair, grid_n, 1.0, [&](const Vecd& x) {
      for (int is = -6; is <= 6; ++is) {
        double s = nstrip * is / 6.0;
        sup = std::max(sup, ratio(x, s));
      }
    });
    rep.strips.push_back({nstrip, sup});
  }
  // growth of the supremum over nested Sigma boxes (an unbounded trend is a
  // flag, never a proof)
  for (double frac : {0.25, 0.5, 0.75, 1.0}) {
    double sup = 0.0;
    for_sigma_grid(pair, grid_n, frac, [&](const Vecd& x) {
      for (int is = -4; is <= 4; ++is) sup = std::max(sup, ratio(x, n_max * is / 4.0));
    });
    rep.nested_sups.push_back(sup);
  }
  bool growing = true;
  for (std::size_t i = 1; i < rep.nested_sups.size(); ++i)
    growing = growing && rep.nested_sups[i] > rep.nested_sups[i - 1] * 1.02;
  rep.flagged_unbounded = growing && rep.nested_sups.back() > 2.0 * rep.nested_sups.front();
  rep.satisfied_on_sample = !rep.flagged_unbounded;
  return rep;
}

SeminormEstimates seminorms(const AlphaBetaPair& pair, int grid_n, double s_halfwidth) {
  SeminormEstimates est;
  for_sigma_grid(pair, grid_n, 1.0, [&](const Vecd& x) {
    for (int is = -6; is <= 6; ++is) {
      double s = s_halfwidth * is / 6.0;
      Mat a;
      std::vector<Mat> da;
      std::vector<std::vector<Mat>> d2a;
      pair.alpha_eval(x, s, a, &da, &d2a);
      double b;
      Vecd db;
      Mat d2b;
      pair.beta_eval(x, s, b, &db, &d2b);
      double d0 = pair.dist0(x);
      // operator norm of alpha (SPD: largest eigenvalue)
      EigResult e = sym_eig(symmetrize(a));
      est.C0 = std::max(est.C0, e.values.back() * (1.0 + d0 * d0));
      double c1 = 0.0, c2 = 0.0;
      for (const Mat& d : da) c1 += frob2(d);
      for (const auto& rowv : d2a)
        for (const Mat& d : rowv) c2 += frob2(d);
      est.C1 = std::max(est.C1, std::sqrt(c1));
      est.C2 = std::max(est.C2, std::sqrt(c2));
      est.D0 = std::max(est.D0, std::abs(b));
      est.D1 = std::max(est.D1, vnorm(db));
      est.D2 = std::max(est.D2, std::sqrt(frob2(d2b)));
    }
  });
  return est;
}

LipschitzReport lambda_lipschitz_property(int samples, std::uint64_t seed) {
  Rng rng(seed);
  LipschitzReport rep;
  rep.samples = samples;
  for (int k = 0; k < samples; ++k) {
    int n = 2 + static_cast<int>(rng.below(3));
    Mat a(n, n), b(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        a(i, j) = a(j, i) = rng.normal();
        b(i, j) = b(j, i) = rng.normal();
      }
    auto lam_star = [](const Mat& mmat) {
      EigResult e = sym_eig(mmat);
      double best = 1e300;
      for (double v : e.values) best = std::min(best, std::abs(v));
      return best;
    };
    auto op_norm = [](const Mat& mmat) {
      EigResult e = sym_eig(mmat);
      return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
    };
    double lhs = std::abs(lam_star(a) - lam_star(b));
    double rhs = op_norm(a - b);
    if (rhs > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs / rhs);
    if (lhs > rhs + 1e-12) ++rep.violations;
    // SPD variant with the plain smallest eigenvalue
    Mat sa = matmul(a.transposed(), a);
    Mat sb = matmul(b.transposed(), b);
    for (int i = 0; i < n; ++i) {
      sa(i, i) += 0.1;
      sb(i, i) += 0.1;
    }
    auto lam_min = [](const Mat& mmat) { return sym_eig(mmat).values.front(); };
    double lhs2 = std::abs(lam_min(sa) - lam_min(sb));
    double rhs2 = op_norm(sa - sb);
    if (rhs2 > 0.0) rep.max_ratio = std::max(rep.max_ratio, lhs2 / rhs2);
    if (lhs2 > rhs2 + 1e-12) ++rep.violations;
  }
  return rep;
}

}  // namespace geovar
