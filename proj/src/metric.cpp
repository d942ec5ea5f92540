#include "geovar/metric.hpp"

#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

namespace {
constexpr double kBig = 1e300;
}

const char* metric_kind_name(MetricKind k) {
  switch (k) {
    case MetricKind::FlatEuclidean: return "flat-euclidean";
    case MetricKind::Minkowski: return "minkowski";
    case MetricKind::RoundSphereChart: return "round-sphere-chart";
    case MetricKind::LorentzCylinder: return "lorentz-cylinder";
    case MetricKind::SplitProduct: return "split-product";
    case MetricKind::StandardStationary: return "standard-stationary";
    case MetricKind::GAlphaBeta: return "g-alpha-beta";
    case MetricKind::ConformalRescale: return "conformal-rescale";
    case MetricKind::Perturbed: return "perturbed";
  }
  return "?";
}

std::optional<MetricKind> metric_kind_from_name(const std::string& s) {
  for (MetricKind k :
       {MetricKind::FlatEuclidean, MetricKind::Minkowski, MetricKind::RoundSphereChart,
        MetricKind::LorentzCylinder, MetricKind::SplitProduct, MetricKind::StandardStationary,
        MetricKind::GAlphaBeta, MetricKind::ConformalRescale, MetricKind::Perturbed})
    if (s == metric_kind_name(k)) return k;
  return std::nullopt;
}

Vecd christoffel_vv(const ChristoffelData& ch, const Vecd& v, const Vecd& w) {
  std::size_t n = ch.gamma.size();
  Vecd out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) s += ch.gamma[i](j, k) * v[j] * w[k];
    out[i] = s;
  }
  return out;
}

Mat christoffel_v(const ChristoffelData& ch, const Vecd& v) {
  std::size_t n = ch.gamma.size();
  Mat m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += ch.gamma[i](j, k) * v[j];
      m(i, k) = s;
    }
  return m;
}

Mat jacobi_operator(const CurvatureData& cu, const Vecd& v) {
  // (R(v, w) v)^i = R^i_{jkl} v^j v^k w^l  ->  row i, column l
  std::size_t n = cu.riemann.size();
  Mat m(n, n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) s += cu.riemann[i][j](k, l) * v[j] * v[k];
      m(i, l) = s;
    }
  return m;
}

MetricFamily MetricFamily::flat_euclidean(int n) {
  MetricFamily f;
  f.n_ = n;
  f.kind_ = MetricKind::FlatEuclidean;
  f.domain_ = {Vecd(n, -50.0), Vecd(n, 50.0)};
  f.periods_ = Vecd(n, 0.0);
  return f;
}

MetricFamily MetricFamily::minkowski(int n) {
  MetricFamily f = flat_euclidean(n);
  f.kind_ = MetricKind::Minkowski;
  return f;
}

MetricFamily MetricFamily::round_sphere_chart(double theta_margin) {
  MetricFamily f;
  f.n_ = 2;
  f.kind_ = MetricKind::RoundSphereChart;
  f.params_ = {theta_margin};
  f.domain_ = {{theta_margin, -kBig}, {3.141592653589793 - theta_margin, kBig}};
  f.periods_ = {0.0, 6.283185307179586};
  return f;
}

MetricFamily MetricFamily::lorentz_cylinder(double theta_margin) {
  MetricFamily f;
  f.n_ = 3;
  f.kind_ = MetricKind::LorentzCylinder;
  f.params_ = {theta_margin};
  f.domain_ = {{-50.0, theta_margin, -kBig}, {50.0, 3.141592653589793 - theta_margin, kBig}};
  f.periods_ = {0.0, 0.0, 6.283185307179586};
  return f;
}

MetricFamily MetricFamily::split_product(int n1, int n2, double c1, double c2) {
  MetricFamily f;
  f.n_ = n1 + n2;
  f.kind_ = MetricKind::SplitProduct;
  f.params_ = {static_cast<double>(n1), static_cast<double>(n2), c1, c2};
  f.n0_ = n1;
  f.domain_ = {Vecd(f.n_, -50.0), Vecd(f.n_, 50.0)};
  f.periods_ = Vecd(f.n_, 0.0);
  return f;
}

MetricFamily MetricFamily::standard_stationary(int n0, ScalarPtr beta, double halfwidth) {
  MetricFamily f;
  f.n_ = n0 + 1;
  f.kind_ = MetricKind::StandardStationary;
  f.n0_ = n0;
  f.beta_ = std::move(beta);
  f.domain_ = {Vecd(f.n_, -halfwidth), Vecd(f.n_, halfwidth)};
  f.periods_ = Vecd(f.n_, 0.0);
  return f;
}

MetricFamily MetricFamily::g_alpha_beta(AlphaBetaPair pair) {
  pair.validate();
  MetricFamily f;
  f.n_ = pair.sigma_dim + 1;
  f.kind_ = MetricKind::GAlphaBeta;
  f.domain_.lo = pair.sigma_box.lo;
  f.domain_.hi = pair.sigma_box.hi;
  f.domain_.lo.push_back(-pair.s_halfwidth);
  f.domain_.hi.push_back(pair.s_halfwidth);
  f.periods_ = Vecd(f.n_, 0.0);
  if (pair.geom == AlphaBetaPair::SigmaGeom::Circle) {
    f.periods_[0] = 6.283185307179586;
    f.domain_.lo[0] = -kBig;
    f.domain_.hi[0] = kBig;
  }
  f.ab_ = std::move(pair);
  return f;
}

MetricFamily MetricFamily::conformal_rescale(const MetricFamily& base, ScalarPtr psi) {
  require(psi && psi->dim() == base.dim(), ErrorKind::ValidationError,
          "conformal factor dimension mismatch");
  MetricFamily f;
  f.n_ = base.dim();
  f.kind_ = MetricKind::ConformalRescale;
  f.base_ = std::make_shared<MetricFamily>(base);
  f.psi_ = std::move(psi);
  f.domain_ = base.domain_;
  f.periods_ = base.periods_;
  return f;
}

MetricFamily MetricFamily::perturbed(const MetricFamily& base, TensorPtr h, double eps) {
  require(h && h->dim() == base.dim(), ErrorKind::ValidationError,
          "perturbation dimension mismatch");
  MetricFamily f;
  f.n_ = base.dim();
  f.kind_ = MetricKind::Perturbed;
  f.base_ = std::make_shared<MetricFamily>(base);
  f.bump_ = std::move(h);
  f.eps_ = eps;
  f.domain_ = base.domain_;
  f.periods_ = base.periods_;
  return f;
}

bool MetricFamily::in_domain(const Vecd& x) const {
  for (int i = 0; i < n_; ++i) {
    if (periods_[i] > 0.0) continue;
    if (x[i] < domain_.lo[i] || x[i] > domain_.hi[i]) return false;
  }
  return true;
}

Vecd MetricFamily::wrap(const Vecd& x) const {
  Vecd w(x);
  for (int i = 0; i < n_; ++i) {
    double p = periods_[i];
    if (p > 0.0) {
      w[i] = std::fmod(w[i], p);
      if (w[i] < 0.0) w[i] += p;
    }
  }
  return w;
}

Vecd MetricFamily::wrapped_delta(const Vecd& a, const Vecd& b) const {
  Vecd d(n_);
  for (int i = 0; i < n_; ++i) {
    d[i] = a[i] - b[i];
    double p = periods_[i];
    if (p > 0.0) {
      d[i] = std::fmod(d[i], p);
      if (d[i] > 0.5 * p) d[i] -= p;
      if (d[i] < -0.5 * p) d[i] += p;
    }
  }
  return d;
}

double MetricFamily::wrapped_distance(const Vecd& a, const Vecd& b) const {
  return vnorm(wrapped_delta(a, b));
}

void MetricFamily::check_in_domain(const Vecd& x) const {
  require(in_domain(x), ErrorKind::PointOutsideDomain, "point outside chart domain");
}

void MetricFamily::check_nondegenerate(const Mat& g, const Vecd& x) const {
  (void)x;
  Lu lu(g);
  require(std::abs(lu.det()) > kDetTol, ErrorKind::DegenerateMetric,
          "|det g| below degeneracy threshold");
  require(cond2(g) < kCondTol, ErrorKind::DegenerateMetric,
          "metric condition number above threshold");
}

Mat MetricFamily::eval_raw(const Vecd& x_in) const {
  Vecd x = wrap(x_in);
  Mat g(n_, n_, 0.0);
  switch (kind_) {
    case MetricKind::FlatEuclidean:
      for (int i = 0; i < n_; ++i) g(i, i) = 1.0;
      break;
    case MetricKind::Minkowski:
      g(0, 0) = -1.0;
      for (int i = 1; i < n_; ++i) g(i, i) = 1.0;
      break;
    case MetricKind::RoundSphereChart: {
      double st = std::sin(x[0]);
      g(0, 0) = 1.0;
      g(1, 1) = st * st;
      break;
    }
    case MetricKind::LorentzCylinder: {
      double st = std::sin(x[1]);
      g(0, 0) = -1.0;
      g(1, 1) = 1.0;
      g(2, 2) = st * st;
      break;
    }
    case MetricKind::SplitProduct: {
      int n1 = n0_;
      double c1 = params_[2], c2 = params_[3];
      double r1 = 0.0, r2 = 0.0;
      for (int i = 0; i < n1; ++i) r1 += x[i] * x[i];
      for (int i = n1; i < n_; ++i) r2 += x[i] * x[i];
      double f1 = 1.0 + c1 * r1;
      double f2 = 1.0 + c2 * r2;
      for (int i = 0; i < n1; ++i) g(i, i) = f1;
      for (int i = n1; i < n_; ++i) g(i, i) = -f2;
      break;
    }
    case MetricKind::StandardStationary: {
      for (int i = 0; i < n0_; ++i) g(i, i) = 1.0;
      Vecd xb(x.begin(), x.begin() + n0_);
      g(n0_, n0_) = -beta_->value(xb);
      break;
    }
    case MetricKind::GAlphaBeta: {
      int k = ab_->sigma_dim;
      Vecd xs(x.begin(), x.begin() + k);
      Mat a;
      ab_->alpha_eval(xs, x[k], a, nullptr, nullptr);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = a(i, j);
      double b;
      ab_->beta_eval(xs, x[k], b, nullptr, nullptr);
      g(k, k) = -b;
      break;
    }
    case MetricKind::ConformalRescale: {
      g = base_->eval_raw(x);
      g *= psi_->value(x);
      break;
    }
    case MetricKind::Perturbed: {
      g = base_->eval_raw(x);
      Mat h = bump_->value(x);
      h *= eps_;
      g += h;
      break;
    }
  }
  return g;
}

Mat MetricFamily::eval(const Vecd& x) const {
  check_in_domain(x);
  return symmetrize(eval_raw(x));
}

void MetricFamily::derivatives(const Vecd& x_in, int order, std::vector<Mat>& dg,
                               std::vector<std::vector<Mat>>* d2g) const {
  require(order == 1 || order == 2, ErrorKind::OrderUnsupportedForFamily,
          "derivative order must be 1 or 2");
  require(order == 1 || d2g != nullptr, ErrorKind::Internal, "order 2 needs output");
  check_in_domain(x_in);
  Vecd x = wrap(x_in);
  dg.assign(n_, Mat(n_, n_, 0.0));
  if (d2g) d2g->assign(n_, std::vector<Mat>(n_, Mat(n_, n_, 0.0)));
  switch (kind_) {
    case MetricKind::FlatEuclidean:
    case MetricKind::Minkowski:
      break;
    case MetricKind::RoundSphereChart: {
      dg[0](1, 1) = std::sin(2.0 * x[0]);
      if (d2g) (*d2g)[0][0](1, 1) = 2.0 * std::cos(2.0 * x[0]);
      break;
    }
    case MetricKind::LorentzCylinder: {
      dg[1](2, 2) = std::sin(2.0 * x[1]);
      if (d2g) (*d2g)[1][1](2, 2) = 2.0 * std::cos(2.0 * x[1]);
      break;
    }
    case MetricKind::SplitProduct: {
      int n1 = n0_;
      double c1 = params_[2], c2 = params_[3];
      for (int k = 0; k < n1; ++k)
        for (int i = 0; i < n1; ++i) dg[k](i, i) = 2.0 * c1 * x[k];
      for (int k = n1; k < n_; ++k)
        for (int i = n1; i < n_; ++i) dg[k](i, i) = -2.0 * c2 * x[k];
      if (d2g) {
        for (int k = 0; k < n1; ++k)
          for (int i = 0; i < n1; ++i) (*d2g)[k][k](i, i) = 2.0 * c1;
        for (int k = n1; k < n_; ++k)
          for (int i = n1; i < n_; ++i) (*d2g)[k][k](i, i) = -2.0 * c2;
      }
      break;
    }
    case MetricKind::StandardStationary: {
      Vecd xb(x.begin(), x.begin() + n0_);
      Vecd gb = beta_->grad(xb);
      for (int k = 0; k < n0_; ++k) dg[k](n0_, n0_) = -gb[k];
      if (d2g) {
        Mat hb = beta_->hess(xb);
        for (int k = 0; k < n0_; ++k)
          for (int l = 0; l < n0_; ++l) (*d2g)[k][l](n0_, n0_) = -hb(k, l);
      }
      break;
    }
    case MetricKind::GAlphaBeta: {
      int k = ab_->sigma_dim;
      Vecd xs(x.begin(), x.begin() + k);
      Mat a;
      std::vector<Mat> da;
      std::vector<std::vector<Mat>> d2a;
      ab_->alpha_eval(xs, x[k], a, &da, d2g ? &d2a : nullptr);
      double b;
      Vecd db;
      Mat d2b;
      ab_->beta_eval(xs, x[k], b, &db, d2g ? &d2b : nullptr);
      for (int c = 0; c < n_; ++c) {
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) dg[c](i, j) = da[c](i, j);
        dg[c](k, k) = -db[c];
      }
      if (d2g)
        for (int c = 0; c < n_; ++c)
          for (int e = 0; e < n_; ++e) {
            for (int i = 0; i < k; ++i)
              for (int j = 0; j < k; ++j) (*d2g)[c][e](i, j) = d2a[c][e](i, j);
            (*d2g)[c][e](k, k) = -d2b(c, e);
          }
      break;
    }
    case MetricKind::ConformalRescale: {
      Mat gb = base_->eval_raw(x);
      std::vector<Mat> dgb;
      std::vector<std::vector<Mat>> d2gb;
      base_->derivatives(x, order, dgb, d2g ? &d2gb : nullptr);
      double p = psi_->value(x);
      Vecd gp = psi_->grad(x);
      for (int c = 0; c < n_; ++c) {
        dg[c] = dgb[c];
        dg[c] *= p;
        Mat t = gb;
        t *= gp[c];
        dg[c] += t;
      }
      if (d2g) {
        Mat hp = psi_->hess(x);
        for (int c = 0; c < n_; ++c)
          for (int e = 0; e < n_; ++e) {
            Mat t = d2gb[c][e];
            t *= p;
            Mat t2 = dgb[c];
            t2 *= gp[e];
            t += t2;
            Mat t3 = dgb[e];
            t3 *= gp[c];
            t += t3;
            Mat t4 = gb;
            t4 *= hp(c, e);
            t += t4;
            (*d2g)[c][e] = t;
          }
      }
      break;
    }
    case MetricKind::Perturbed: {
      std::vector<Mat> dgb;
      std::vector<std::vector<Mat>> d2gb;
      base_->derivatives(x, order, dgb, d2g ? &d2gb : nullptr);
      std::vector<Mat> dh = bump_->deriv1(x);
      for (int c = 0; c < n_; ++c) {
        dg[c] = dgb[c];
        Mat t = dh[c];
        t *= eps_;
        dg[c] += t;
      }
      if (d2g) {
        std::vector<std::vector<Mat>> d2h = bump_->deriv2(x);
        for (int c = 0; c < n_; ++c)
          for (int e = 0; e < n_; ++e) {
            (*d2g)[c][e] = d2gb[c][e];
            Mat t = d2h[c][e];
            t *= eps_;
            (*d2g)[c][e] += t;
          }
      }
      break;
    }
  }
  // enforce symmetry in the metric indices exactly
  for (int c = 0; c < n_; ++c) dg[c] = symmetrize(dg[c]);
  if (d2g)
    for (int c = 0; c < n_; ++c)
      for (int e = 0; e < n_; ++e) (*d2g)[c][e] = symmetrize((*d2g)[c][e]);
}

ChristoffelData MetricFamily::christoffel(const Vecd& x) const {
  Mat g = eval(x);
  check_nondegenerate(g, x);
  std::vector<Mat> dg;
  derivatives(x, 1, dg, nullptr);
  Lu lu(g);
  ChristoffelData ch;
  ch.point = x;
  ch.gamma.assign(n_, Mat(n_, n_, 0.0));
  Vecd rhs(n_);
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      // g(Gamma(e_j,e_k), e_i) = (dg[j](i,k) + dg[k](i,j) - dg[i](j,k)) / 2
      for (int i = 0; i < n_; ++i) rhs[i] = 0.5 * (dg[j](i, k) + dg[k](i, j) - dg[i](j, k));
      Vecd gam = lu.solve(rhs);
      for (int i = 0; i < n_; ++i) {
        ch.gamma[i](j, k) = gam[i];
        ch.gamma[i](k, j) = gam[i];
      }
    }
  return ch;
}

void MetricFamily::christoffel_with_derivs(const Vecd& x, ChristoffelData& ch,
                                           std::vector<std::vector<Mat>>& dgamma) const {
  Mat g = eval(x);
  check_nondegenerate(g, x);
  std::vector<Mat> dg;
  std::vector<std::vector<Mat>> d2g;
  derivatives(x, 2, dg, &d2g);
  Lu lu(g);
  ch.point = x;
  ch.gamma.assign(n_, Mat(n_, n_, 0.0));
  dgamma.assign(n_, std::vector<Mat>(n_, Mat(n_, n_, 0.0)));
  Vecd rhs(n_), drhs(n_);
  for (int j = 0; j < n_; ++j)
    for (int k = j; k < n_; ++k) {
      for (int i = 0; i < n_; ++i) rhs[i] = 0.5 * (dg[j](i, k) + dg[k](i, j) - dg[i](j, k));
      Vecd gam = lu.solve(rhs);
      for (int i = 0; i < n_; ++i) {
        ch.gamma[i](j, k) = gam[i];
        ch.gamma[i](k, j) = gam[i];
      }
      // differentiate the linear system: g dGamma = d(rhs) - dg Gamma
      for (int l = 0; l < n_; ++l) {
        for (int i = 0; i < n_; ++i) {
          drhs[i] = 0.5 * (d2g[l][j](i, k) + d2g[l][k](i, j) - d2g[l][i](j, k));
          for (int a = 0; a < n_; ++a) drhs[i] -= dg[l](i, a) * gam[a];
        }
        Vecd dgam = lu.solve(drhs);
        for (int i = 0; i < n_; ++i) {
          dgamma[l][i](j, k) = dgam[i];
          dgamma[l][i](k, j) = dgam[i];
        }
      }
    }
}

CurvatureData MetricFamily::curvature(const Vecd& x) const { return geometry(x).cu; }

PointGeometry MetricFamily::geometry(const Vecd& x) const {
  PointGeometry out;
  out.g = eval(x);
  std::vector<std::vector<Mat>> dgamma;
  christoffel_with_derivs(x, out.ch, dgamma);
  out.cu.point = x;
  out.cu.riemann.assign(n_, std::vector<Mat>(n_, Mat(n_, n_, 0.0)));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        for (int l = 0; l < n_; ++l) {
          double v = dgamma[k][i](l, j) - dgamma[l][i](k, j);
          for (int m = 0; m < n_; ++m)
            v += out.ch.gamma[i](k, m) * out.ch.gamma[m](l, j) -
                 out.ch.gamma[i](l, m) * out.ch.gamma[m](k, j);
          out.cu.riemann[i][j](k, l) = v;
        }
  return out;
}

int MetricFamily::metric_index(const Vecd& x) const {
  Mat g = eval(x);
  check_nondegenerate(g, x);
  EigResult e = sym_eig(g);
  int count = 0;
  for (double v : e.values)
    if (v < 0.0) ++count;
  return count;
}

double MetricFamily::scalar_g(const Vecd& x, const Vecd& v, const Vecd& w) const {
  Mat g = eval(x);
  return vdot(matvec(g, v), w);
}

}  // namespace geovar
