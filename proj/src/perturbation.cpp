#include "geovar/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "geovar/errors.hpp"
#include "geovar/kernels.hpp"
#include "geovar/spline.hpp"

namespace geovar {

const char* perturbation_class_name(PerturbationClass c) {
  switch (c) {
    case PerturbationClass::General: return "general";
    case PerturbationClass::Conformal: return "conformal";
    case PerturbationClass::Split: return "split";
    case PerturbationClass::Stationary: return "stationary";
  }
  return "?";
}

namespace {

// scalar quantity with first and second chart derivatives
struct Chain {
  double v = 0.0;
  Vecd d;
  Mat dd;
  explicit Chain(int n) : d(n, 0.0), dd(n, n, 0.0) {}
};

Chain chain_mul(const Chain& a, const Chain& b) {
  int n = static_cast<int>(a.d.size());
  Chain r(n);
  r.v = a.v * b.v;
  for (int i = 0; i < n; ++i) r.d[i] = a.d[i] * b.v + a.v * b.d[i];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      r.dd(i, k) = a.dd(i, k) * b.v + a.d[i] * b.d[k] + a.d[k] * b.d[i] + a.v * b.dd(i, k);
  return r;
}

Chain chain_add(const Chain& a, const Chain& b) {
  int n = static_cast<int>(a.d.size());
  Chain r(n);
  r.v = a.v + b.v;
  for (int i = 0; i < n; ++i) r.d[i] = a.d[i] + b.d[i];
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) r.dd(i, k) = a.dd(i, k) + b.dd(i, k);
  return r;
}

// geometry of the transversal-sheet construction shared by the tensor and
// scalar bumps
struct BumpFrame {
  int n = 0;
  Vecd periods;
  Vecd y_ref;          // wrap anchor (mid-arc point)
  Vecd y0;             // gamma(a)
  Vecd dir;            // unit chord direction; u(x) = dir . (x - y0)
  double u_len = 0.0;
  double tube_radius = 0.0;
  std::vector<CubicSpline> spine;   // gamma-tilde components over u
  std::vector<CubicSpline> covec;   // c-tilde components over u
  PlateauCutoff cutoff;

  Vecd wrap_rep(const Vecd& x) const {
    Vecd r(x);
    for (int i = 0; i < n; ++i) {
      double p = periods[i];
      if (p > 0.0) {
        double delta = std::fmod(x[i] - y_ref[i], p);
        if (delta > 0.5 * p) delta -= p;
        if (delta < -0.5 * p) delta += p;
        r[i] = y_ref[i] + delta;
      }
    }
    return r;
  }

  struct Pieces {
    double u = 0.0, uc = 0.0, ind = 0.0;
    Chain Q, lam;
    Pieces(int n) : Q(n), lam(n) {}
  };

  Pieces pieces(const Vecd& x_rep) const {
    Pieces p(n);
    p.u = 0.0;
    for (int i = 0; i < n; ++i) p.u += dir[i] * (x_rep[i] - y0[i]);
    p.uc = std::clamp(p.u, 0.0, u_len);
    p.ind = (p.u > 0.0 && p.u < u_len) ? 1.0 : 0.0;

    Vecd sp(n), sp1(n), sp2(n), cv(n), cv1(n), cv2(n);
    for (int i = 0; i < n; ++i) {
      sp[i] = spine[i].value(p.uc);
      sp1[i] = spine[i].deriv(p.uc);
      sp2[i] = spine[i].deriv2(p.uc);
      cv[i] = covec[i].value(p.uc);
      cv1[i] = covec[i].deriv(p.uc);
      cv2[i] = covec[i].deriv2(p.uc);
    }
    Vecd r(n);
    for (int i = 0; i < n; ++i) r[i] = x_rep[i] - sp[i];
    // dr[j][i] = d r_j / d x_i = delta_ij - sp1_j dir_i ind
    // rho^2 and its derivatives
    double rho2 = vdot(r, r);
    double r_dot_sp1 = vdot(r, sp1);
    double r_dot_sp2 = vdot(r, sp2);
    double sp1_dot_sp1 = vdot(sp1, sp1);
    Vecd drho2(n);
    for (int i = 0; i < n; ++i) drho2[i] = 2.0 * (r[i] - r_dot_sp1 * dir[i] * p.ind);
    Mat d2rho2(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        // sum_j dr_j/dx_i dr_j/dx_k
        double term = (i == k ? 1.0 : 0.0);
        term += p.ind * (-sp1[i] * dir[k] - sp1[k] * dir[i] + sp1_dot_sp1 * dir[i] * dir[k]);
        // sum_j r_j d2r_j = -(r . sp2) d_i d_k ind
        double term2 = -r_dot_sp2 * dir[i] * dir[k] * p.ind;
        d2rho2(i, k) = 2.0 * (term + term2);
      }
    double R2 = tube_radius * tube_radius;
    double z = rho2 / R2;
    p.Q.v = cutoff.value(z);
    double Pz = cutoff.deriv(z);
    double Pzz = cutoff.deriv2(z);
    for (int i = 0; i < n; ++i) p.Q.d[i] = Pz * drho2[i] / R2;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        p.Q.dd(i, k) = Pzz * drho2[i] * drho2[k] / (R2 * R2) + Pz * d2rho2(i, k) / R2;

    // lambda = c(u) . r
    double c_dot_r = vdot(cv, r);
    double c1_dot_r = vdot(cv1, r);
    double c2_dot_r = vdot(cv2, r);
    double c_dot_sp1 = vdot(cv, sp1);
    double c1_dot_sp1 = vdot(cv1, sp1);
    double c_dot_sp2 = vdot(cv, sp2);
    p.lam.v = c_dot_r;
    for (int i = 0; i < n; ++i)
      p.lam.d[i] = c1_dot_r * dir[i] * p.ind + cv[i] - c_dot_sp1 * dir[i] * p.ind;
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        double t = c2_dot_r * dir[i] * dir[k];
        t += (cv1[k] - c1_dot_sp1 * dir[k]) * dir[i];
        t += (cv1[i] - c1_dot_sp1 * dir[i]) * dir[k];
        t -= c_dot_sp2 * dir[i] * dir[k];
        p.lam.dd(i, k) = t * p.ind;
      }
    return p;
  }

  Chain chain_of(const CubicSpline& s, const Pieces& p) const {
    Chain c(n);
    c.v = s.value(p.uc);
    double d1 = s.deriv(p.uc) * p.ind;
    double d2 = s.deriv2(p.uc) * p.ind;
    for (int i = 0; i < n; ++i) c.d[i] = d1 * dir[i];
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) c.dd(i, k) = d2 * dir[i] * dir[k];
    return c;
  }
};

// samples along the arc used to construct the frame
struct ArcSamples {
  Vecd t, u;
  std::vector<Vecd> gamma, vel, field;
};

BumpFrame build_frame(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                      double b, const FieldAlongCurve& V, double tube_radius, ArcSamples& samples) {
  int n = metric.dim();
  int M = std::max(32, 4 * static_cast<int>(std::ceil((b - a) * curve.m)));
  samples.t.resize(M + 1);
  samples.u.resize(M + 1);
  samples.gamma.clear();
  samples.vel.clear();
  samples.field.clear();
  for (int k = 0; k <= M; ++k) {
    double t = a + (b - a) * k / M;
    samples.t[k] = t;
    CurvePoint cp = curve_eval(metric, curve, t);
    samples.gamma.push_back(cp.x);
    samples.vel.push_back(cp.v);
    samples.field.push_back(V(t));
  }
  BumpFrame fr;
  fr.n = n;
  fr.periods = metric.periods();
  fr.y_ref = samples.gamma[M / 2];
  fr.y0 = samples.gamma[0];
  fr.tube_radius = tube_radius;
  Vecd chord = vsub(samples.gamma[M], samples.gamma[0]);
  double clen = vnorm(chord);
  require(clen > 1e-12, ErrorKind::ValidationError, "arc chord degenerate");
  fr.dir = vscale(1.0 / clen, chord);
  // u must be strictly monotone along the arc
  double prev = -1e300;
  for (int k = 0; k <= M; ++k) {
    double u = vdot(fr.dir, vsub(samples.gamma[k], fr.y0));
    require(u > prev, ErrorKind::ValidationError,
            "arc is not monotone along its chord; shrink the interval");
    samples.u[k] = u;
    prev = u;
  }
  fr.u_len = samples.u[M];
  // periodic-extent check: support must fit inside half a period
  for (int i = 0; i < n; ++i) {
    double p = fr.periods[i];
    if (p <= 0.0) continue;
    double lo = 1e300, hi = -1e300;
    for (auto& g : samples.gamma) {
      lo = std::min(lo, g[i]);
      hi = std::max(hi, g[i]);
    }
    require(hi - lo + 4.0 * tube_radius < 0.5 * p, ErrorKind::ValidationError,
            "bump support too large for the periodic chart");
  }
  // transversal covector c with c.v = 0 and c.V = 1
  std::vector<Vecd> cov(M + 1);
  for (int k = 0; k <= M; ++k) {
    const Vecd& v = samples.vel[k];
    const Vecd& Vt = samples.field[k];
    double vv = vdot(v, v);
    require(vv > 1e-20, ErrorKind::ValidationError, "curve velocity vanishes on the arc");
    Vecd vperp = Vt;
    vaxpy_inplace(-vdot(Vt, v) / vv, v, vperp);
    double nperp2 = vdot(vperp, vperp);
    require(nperp2 > 1e-16 * std::max(1.0, vdot(Vt, Vt)), ErrorKind::VParallel,
            "field is parallel to the tangent on the arc");
    cov[k] = vscale(1.0 / nperp2, vperp);
  }
  fr.spine.reserve(n);
  fr.covec.reserve(n);
  for (int i = 0; i < n; ++i) {
    Vecd gy(M + 1), cy(M + 1);
    for (int k = 0; k <= M; ++k) {
      gy[k] = samples.gamma[k][i];
      cy[k] = cov[k][i];
    }
    fr.spine.emplace_back(samples.u, gy);
    fr.covec.emplace_back(samples.u, cy);
  }
  return fr;
}

void check_tube_clearance(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                          double b, const BumpFrame& fr, const ArcSamples& samples) {
  // the along-track continuation within one tube radius of the arc ends is
  // harmless (the chord slab clamps the profile to zero there); exclude the
  // parameter window the curve needs to traverse that distance
  double min_speed = 1e300;
  for (const auto& v : samples.vel) min_speed = std::min(min_speed, vnorm(v));
  double buffer =
      2.0 / curve.m + std::min(0.2, 1.3 * fr.tube_radius / std::max(min_speed, 1e-6));
  for (int j = 0; j <= curve.m; ++j) {
    double t = curve.grid[j];
    if (t >= a - buffer && t <= b + buffer) continue;
    Vecd x = curve.pos(j);
    double dmin = 1e300;
    std::size_t knear = 0;
    for (std::size_t k = 0; k < samples.gamma.size(); ++k) {
      double d = metric.wrapped_distance(x, samples.gamma[k]);
      if (d < dmin) {
        dmin = d;
        knear = k;
      }
    }
    if (dmin > 1.3 * fr.tube_radius + buffer) continue;
    // a revisit along the same spine (periodic wrap) is admissible; a
    // transversal pass through the tube is not
    const Vecd& vs = samples.vel[knear];
    const Vecd& vj = curve.vel(j);
    double cosang = vdot(vs, vj) / std::max(1e-300, vnorm(vs) * vnorm(vj));
    require(std::abs(cosang) > 0.99, ErrorKind::TubeIntersectsCurve,
            "curve re-enters the bump tube away from the arc");
  }
}

// symmetric tensor bump: h = Q(x) lambda(x) K(u(x))
class BumpTensorFamily final : public SymTensorFamily {
public:
  BumpTensorFamily(BumpFrame frame, std::vector<CubicSpline> ksplines)
      : fr_(std::move(frame)), k_(std::move(ksplines)) {}

  int dim() const override { return fr_.n; }

  Mat value(const Vecd& x) const override {
    int n = fr_.n;
    Vecd xr = fr_.wrap_rep(x);
    BumpFrame::Pieces p = fr_.pieces(xr);
    Mat h(n, n, 0.0);
    if (p.Q.v == 0.0) return h;
    double ql = p.Q.v * p.lam.v;
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) {
        double v = ql * k_[idx].value(p.uc);
        h(i, j) = v;
        h(j, i) = v;
      }
    return h;
  }

  std::vector<Mat> deriv1(const Vecd& x) const override {
    int n = fr_.n;
    Vecd xr = fr_.wrap_rep(x);
    BumpFrame::Pieces p = fr_.pieces(xr);
    std::vector<Mat> dh(n, Mat(n, n, 0.0));
    Chain ql = chain_mul(p.Q, p.lam);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) {
        Chain s = fr_.chain_of(k_[idx], p);
        Chain hij = chain_mul(ql, s);
        for (int c = 0; c < n; ++c) {
          dh[c](i, j) = hij.d[c];
          dh[c](j, i) = hij.d[c];
        }
      }
    return dh;
  }

  std::vector<std::vector<Mat>> deriv2(const Vecd& x) const override {
    int n = fr_.n;
    Vecd xr = fr_.wrap_rep(x);
    BumpFrame::Pieces p = fr_.pieces(xr);
    std::vector<std::vector<Mat>> d2(n, std::vector<Mat>(n, Mat(n, n, 0.0)));
    Chain ql = chain_mul(p.Q, p.lam);
    int idx = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j, ++idx) {
        Chain s = fr_.chain_of(k_[idx], p);
        Chain hij = chain_mul(ql, s);
        for (int c = 0; c < n; ++c)
          for (int e = 0; e < n; ++e) {
            d2[c][e](i, j) = hij.dd(c, e);
            d2[c][e](j, i) = hij.dd(c, e);
          }
      }
    return d2;
  }

private:
  BumpFrame fr_;
  std::vector<CubicSpline> k_;  // upper-triangle components over u
};

// scalar bump: psi = Q (H(u) + lambda K(u))
class ScalarBumpFamily final : public ScalarFamily {
public:
  ScalarBumpFamily(BumpFrame frame, CubicSpline hspline, CubicSpline kspline)
      : fr_(std::move(frame)), h_(std::move(hspline)), k_(std::move(kspline)) {}

  int dim() const override { return fr_.n; }

  double value(const Vecd& x) const override { return chain(x).v; }
  Vecd grad(const Vecd& x) const override { return chain(x).d; }
  Mat hess(const Vecd& x) const override { return chain(x).dd; }

private:
  Chain chain(const Vecd& x) const {
    Vecd xr = fr_.wrap_rep(x);
    BumpFrame::Pieces p = fr_.pieces(xr);
    Chain H = fr_.chain_of(h_, p);
    Chain K = fr_.chain_of(k_, p);
    return chain_mul(p.Q, chain_add(H, chain_mul(p.lam, K)));
  }

  BumpFrame fr_;
  CubicSpline h_, k_;
};

// h = psi . g0 with analytic product-rule derivatives; exact zero wherever
// psi and its derivatives vanish
class ConformalTensorFamily final : public SymTensorFamily {
public:
  ConformalTensorFamily(MetricFamily base, ScalarPtr psi)
      : base_(std::move(base)), psi_(std::move(psi)) {}

  int dim() const override { return base_.dim(); }

  Mat value(const Vecd& x) const override {
    double p = psi_->value(x);
    if (p == 0.0) return Mat(base_.dim(), base_.dim(), 0.0);
    Mat g = base_.eval(x);
    g *= p;
    return g;
  }

  std::vector<Mat> deriv1(const Vecd& x) const override {
    int n = base_.dim();
    double p = psi_->value(x);
    Vecd gp = psi_->grad(x);
    std::vector<Mat> out(n, Mat(n, n, 0.0));
    if (p == 0.0 && vnorm(gp) == 0.0) return out;
    Mat g = base_.eval(x);
    std::vector<Mat> dg;
    base_.derivatives(x, 1, dg, nullptr);
    for (int c = 0; c < n; ++c) {
      out[c] = dg[c];
      out[c] *= p;
      Mat t = g;
      t *= gp[c];
      out[c] += t;
    }
    return out;
  }

  std::vector<std::vector<Mat>> deriv2(const Vecd& x) const override {
    int n = base_.dim();
    double p = psi_->value(x);
    Vecd gp = psi_->grad(x);
    Mat hp = psi_->hess(x);
    std::vector<std::vector<Mat>> out(n, std::vector<Mat>(n, Mat(n, n, 0.0)));
    if (p == 0.0 && vnorm(gp) == 0.0 && max_abs(hp) == 0.0) return out;
    Mat g = base_.eval(x);
    std::vector<Mat> dg;
    std::vector<std::vector<Mat>> d2g;
    base_.derivatives(x, 2, dg, &d2g);
    for (int c = 0; c < n; ++c)
      for (int e = 0; e < n; ++e) {
        Mat t = d2g[c][e];
        t *= p;
        Mat t2 = dg[c];
        t2 *= gp[e];
        t += t2;
        Mat t3 = dg[e];
        t3 *= gp[c];
        t += t3;
        Mat t4 = g;
        t4 *= hp(c, e);
        t += t4;
        out[c][e] = t;
      }
    return out;
  }

private:
  MetricFamily base_;
  ScalarPtr psi_;
};

// s-independent stationary variation on the (x, s) chart
class StationaryTensorFamily final : public SymTensorFamily {
public:
  explicit StationaryTensorFamily(StationaryComponents comp) : comp_(std::move(comp)) {}

  int dim() const override { return comp_.n0 + 1; }

  Mat value(const Vecd& x) const override {
    int n0 = comp_.n0;
    Vecd xb(x.begin(), x.begin() + n0);
    Mat h(n0 + 1, n0 + 1, 0.0);
    for (int i = 0; i < n0; ++i)
      for (int j = i; j < n0; ++j) {
        double v = comp_.hmat[i][j]->value(xb);
        h(i, j) = v;
        h(j, i) = v;
      }
    for (int i = 0; i < n0; ++i) {
      double v = comp_.rho[i]->value(xb);
      h(i, n0) = v;
      h(n0, i) = v;
    }
    h(n0, n0) = comp_.zeta->value(xb);
    return h;
  }

  std::vector<Mat> deriv1(const Vecd& x) const override {
    int n0 = comp_.n0;
    int n = n0 + 1;
    Vecd xb(x.begin(), x.begin() + n0);
    std::vector<Mat> dh(n, Mat(n, n, 0.0));
    for (int i = 0; i < n0; ++i)
      for (int j = i; j < n0; ++j) {
        Vecd g = comp_.hmat[i][j]->grad(xb);
        for (int c = 0; c < n0; ++c) {
          dh[c](i, j) = g[c];
          dh[c](j, i) = g[c];
        }
      }
    for (int i = 0; i < n0; ++i) {
      Vecd g = comp_.rho[i]->grad(xb);
      for (int c = 0; c < n0; ++c) {
        dh[c](i, n0) = g[c];
        dh[c](n0, i) = g[c];
      }
    }
    Vecd g = comp_.zeta->grad(xb);
    for (int c = 0; c < n0; ++c) dh[c](n0, n0) = g[c];
    return dh;
  }

  std::vector<std::vector<Mat>> deriv2(const Vecd& x) const override {
    int n0 = comp_.n0;
    int n = n0 + 1;
    Vecd xb(x.begin(), x.begin() + n0);
    std::vector<std::vector<Mat>> d2(n, std::vector<Mat>(n, Mat(n, n, 0.0)));
    auto put = [&](int i, int j, const Mat& hess) {
      for (int c = 0; c < n0; ++c)
        for (int e = 0; e < n0; ++e) {
          d2[c][e](i, j) = hess(c, e);
          d2[c][e](j, i) = hess(c, e);
        }
    };
    for (int i = 0; i < n0; ++i)
      for (int j = i; j < n0; ++j) put(i, j, comp_.hmat[i][j]->hess(xb));
    for (int i = 0; i < n0; ++i) put(i, n0, comp_.rho[i]->hess(xb));
    Mat hz = comp_.zeta->hess(xb);
    for (int c = 0; c < n0; ++c)
      for (int e = 0; e < n0; ++e) d2[c][e](n0, n0) = hz(c, e);
    return d2;
  }

private:
  StationaryComponents comp_;
};

Box tube_box(const ArcSamples& samples, double tube_radius, int n) {
  Box b;
  b.lo.assign(n, 1e300);
  b.hi.assign(n, -1e300);
  for (const auto& g : samples.gamma)
    for (int i = 0; i < n; ++i) {
      b.lo[i] = std::min(b.lo[i], g[i] - 2.0 * tube_radius);
      b.hi[i] = std::max(b.hi[i], g[i] + 2.0 * tube_radius);
    }
  return b;
}

void verify_prescription(const PerturbationField& f, const MetricFamily& metric,
                         const DiscretizedCurve& curve, double a, double b,
                         const FieldAlongCurve& V, const KProfile& K) {
  double scale = 0.0;
  std::vector<double> probes;
  for (int k = 0; k <= 16; ++k) probes.push_back(a + (b - a) * k / 16.0);
  for (double t : probes) scale = std::max(scale, max_abs(K(t)));
  scale = std::max(scale, 1e-12);
  for (double t : probes) {
    CurvePoint cp = curve_eval(metric, curve, t);
    Mat hval = f.tensor->value(cp.x);
    require(max_abs(hval) <= 1e-6 * std::max(1.0, scale), ErrorKind::Internal,
            "bump value prescription failed");
    std::vector<Mat> dh = f.tensor->deriv1(cp.x);
    Vecd Vt = V(t);
    Mat dV(f.tensor->dim(), f.tensor->dim(), 0.0);
    for (int c = 0; c < f.tensor->dim(); ++c) {
      Mat t2 = dh[c];
      t2 *= Vt[c];
      dV += t2;
    }
    Mat expect = K(t);
    require(max_abs(dV - expect) <= 1e-6 * std::max(1.0, scale), ErrorKind::Internal,
            "bump derivative prescription failed");
  }
}

}  // namespace

bool PerturbationField::in_support_box(const Vecd& x) const {
  int n = static_cast<int>(support_box.lo.size());
  for (int i = 0; i < n; ++i) {
    double xi = x[i];
    double p = i < static_cast<int>(periods.size()) ? periods[i] : 0.0;
    if (p > 0.0) {
      double c = 0.5 * (support_box.lo[i] + support_box.hi[i]);
      double delta = std::fmod(xi - c, p);
      if (delta > 0.5 * p) delta -= p;
      if (delta < -0.5 * p) delta += p;
      xi = c + delta;
    }
    if (xi < support_box.lo[i] || xi > support_box.hi[i]) return false;
  }
  return true;
}

PerturbationField bump_tensor(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                              double b, const FieldAlongCurve& V, const KProfile& K,
                              double tube_radius) {
  int n = metric.dim();
  ArcSamples samples;
  BumpFrame fr = build_frame(metric, curve, a, b, V, tube_radius, samples);
  check_tube_clearance(metric, curve, a, b, fr, samples);
  // K-component splines over u
  std::vector<CubicSpline> ks;
  int M = static_cast<int>(samples.t.size()) - 1;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Vecd y(M + 1);
      for (int k = 0; k <= M; ++k) y[k] = K(samples.t[k])(i, j);
      ks.emplace_back(samples.u, y);
    }
  PerturbationField f;
  f.cls = PerturbationClass::General;
  f.tensor = std::make_shared<BumpTensorFamily>(std::move(fr), std::move(ks));
  f.support_box = tube_box(samples, tube_radius, n);
  f.periods = metric.periods();
  f.interval_a = a;
  f.interval_b = b;
  f.tube_radius = tube_radius;
  verify_prescription(f, metric, curve, a, b, V, K);
  return f;
}

PerturbationField split_bump(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                             double b, const FieldAlongCurve& V, const KProfile& K1,
                             const KProfile& K2, double tube_radius) {
  require(metric.kind() == MetricKind::SplitProduct, ErrorKind::ValidationError,
          "split bump needs a split-product chart");
  int n1 = metric.split_n1();
  int n = metric.dim();
  // both factor velocities must not vanish simultaneously on the arc
  for (int k = 0; k <= 8; ++k) {
    double t = a + (b - a) * k / 8.0;
    Vecd v = curve_eval(metric, curve, t).v;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n1; ++i) s1 += v[i] * v[i];
    for (int i = n1; i < n; ++i) s2 += v[i] * v[i];
    require(s1 + s2 > 1e-20, ErrorKind::BothVelocitiesVanish,
            "both factor velocities vanish on the arc");
  }
  KProfile K = [K1, K2, n1, n](double t) {
    Mat k(n, n, 0.0);
    Mat b1 = K1(t);
    Mat b2 = K2(t);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n1; ++j) k(i, j) = b1(i, j);
    for (int i = 0; i < n - n1; ++i)
      for (int j = 0; j < n - n1; ++j) k(n1 + i, n1 + j) = b2(i, j);
    return k;
  };
  PerturbationField f = bump_tensor(metric, curve, a, b, V, K, tube_radius);
  f.cls = PerturbationClass::Split;
  return f;
}

PerturbationField conformal_bump(const MetricFamily& metric, const DiscretizedCurve& curve,
                                 double a, double b, const FieldAlongCurve& V,
                                 const std::function<double(double)>& alpha, double tube_radius) {
  int n = metric.dim();
  ArcSamples samples;
  BumpFrame fr = build_frame(metric, curve, a, b, V, tube_radius, samples);
  check_tube_clearance(metric, curve, a, b, fr, samples);
  int M = static_cast<int>(samples.t.size()) - 1;
  // plateau value profile
  auto plateau_unit = [](double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    if (s < 0.25) return smoothstep5(s / 0.25);
    if (s > 0.75) return smoothstep5((1.0 - s) / 0.25);
    return 1.0;
  };
  Vecd hy(M + 1);
  for (int k = 0; k <= M; ++k)
    hy[k] = plateau_unit((samples.t[k] - a) / (b - a));
  CubicSpline hspline(samples.u, hy);
  // derivative prescription, corrected for the value profile's own gradient
  Vecd ky(M + 1);
  for (int k = 0; k <= M; ++k) {
    double dV = vdot(fr.dir, samples.field[k]);
    ky[k] = alpha(samples.t[k]) - hspline.deriv(samples.u[k]) * dV;
  }
  CubicSpline kspline(samples.u, ky);
  ScalarPtr psi =
      std::make_shared<ScalarBumpFamily>(fr, std::move(hspline), std::move(kspline));
  PerturbationField f;
  f.cls = PerturbationClass::Conformal;
  f.conformal_psi = psi;
  f.tensor = std::make_shared<ConformalTensorFamily>(metric, psi);
  f.support_box = tube_box(samples, tube_radius, n);
  f.periods = metric.periods();
  f.interval_a = a;
  f.interval_b = b;
  f.tube_radius = tube_radius;
  return f;
}

PerturbationField stationary_field(const StationaryComponents& comp, Vecd x_support_lo,
                                   Vecd x_support_hi) {
  PerturbationField f;
  f.cls = PerturbationClass::Stationary;
  f.tensor = std::make_shared<StationaryTensorFamily>(comp);
  f.support_box.lo = std::move(x_support_lo);
  f.support_box.hi = std::move(x_support_hi);
  f.support_box.lo.push_back(-1e300);  // s-independent
  f.support_box.hi.push_back(1e300);
  f.periods = Vecd(comp.n0 + 1, 0.0);
  return f;
}

namespace {
constexpr double kGaussA = 0.21132486540518711775;
constexpr double kGaussB = 0.78867513459481288225;
}  // namespace

double transversality_pairing(const PerturbationField& h, const MetricFamily& metric,
                              const DiscretizedCurve& curve, const JacobiSolution& V) {
  require(V.m == curve.m && V.n == curve.n, ErrorKind::GridMismatch,
          "field grid does not match the curve");
  int m = curve.m, n = curve.n;
  double hstep = 1.0 / m;
  double acc = 0.0;
  for (int e = 0; e < m; ++e) {
    for (double s : {kGaussA, kGaussB}) {
      double t = (e + s) * hstep;
      CurvePoint cp = curve_eval(metric, curve, t);
      Vecd J = jacobi_interp_J(V, t);
      Vecd DJcov = jacobi_interp_DJ(V, t);
      // plain parameter derivative: DV = J' (flat chart connection)
      Vecd Jdot = vsub(DJcov, matvec(christoffel_v(metric.christoffel(cp.x), cp.v), J));
      Mat hx = h.tensor->value(cp.x);
      std::vector<Mat> dh = h.tensor->deriv1(cp.x);
      double term1 = vdot(matvec(hx, cp.v), Jdot);
      double term2 = 0.0;
      for (int c = 0; c < n; ++c) term2 += J[c] * vdot(matvec(dh[c], cp.v), cp.v);
      acc += 0.5 * hstep * (term1 + 0.5 * term2);
    }
  }
  return acc;
}

MixedDerivativeReport pairing_is_mixed_derivative_check(const PerturbationField& h,
                                                        const MetricFamily& metric,
                                                        const DiscretizedCurve& curve,
                                                        const JacobiSolution& V, double eps) {
  MixedDerivativeReport rep;
  rep.analytic = transversality_pairing(h, metric, curve, V);
  MetricFamily gp = MetricFamily::perturbed(metric, h.tensor, eps);
  MetricFamily gm = MetricFamily::perturbed(metric, h.tensor, -eps);
  double dp = action_gradient(gp, metric, curve, V);
  double dm = action_gradient(gm, metric, curve, V);
  rep.finite_difference = (dp - dm) / (2.0 * eps);
  rep.rel_error = std::abs(rep.finite_difference - rep.analytic) /
                  std::max(std::abs(rep.analytic), 1e-12);
  return rep;
}

ConformalPairingResult conformal_pairing(const ScalarFamily& psi, const MetricFamily& metric,
                                         const DiscretizedCurve& curve, const JacobiSolution& V) {
  // V must be an endpoint-vanishing Jacobi field of this metric
  double maxJ = 0.0;
  for (int i = 0; i <= V.m; ++i) maxJ = std::max(maxJ, vnorm(V.j(i)));
  require(maxJ > 0.0, ErrorKind::NotJacobi, "field is trivial");
  require(vnorm(V.j(0)) <= 1e-8 * maxJ && vnorm(V.j(V.m)) <= 1e-8 * maxJ, ErrorKind::NotJacobi,
          "field does not vanish at the endpoints");
  double resid = jacobi_residual(metric, curve, V);
  require(resid <= 1e-4 * std::max(1.0, maxJ), ErrorKind::NotJacobi,
          "field does not satisfy the Jacobi equation");
  int m = curve.m;
  double hstep = 1.0 / m;
  ConformalPairingResult out;
  double intVpsi = 0.0, direct = 0.0;
  for (int e = 0; e < m; ++e) {
    for (double s : {kGaussA, kGaussB}) {
      double t = (e + s) * hstep;
      CurvePoint cp = curve_eval(metric, curve, t);
      Vecd J = jacobi_interp_J(V, t);
      Vecd DJ = jacobi_interp_DJ(V, t);  // g-covariant derivative
      Mat g = metric.eval(cp.x);
      double vpsi = vdot(psi.grad(cp.x), J);
      intVpsi += 0.5 * hstep * vpsi;
      double pv = psi.value(cp.x);
      direct += 0.5 * hstep * (pv * vdot(matvec(g, cp.v), DJ) + 0.5 * vpsi * curve.energy);
    }
  }
  out.direct = direct;
  out.closed_form = 0.5 * curve.energy * intVpsi;
  out.agreement = std::abs(out.direct - out.closed_form);
  return out;
}

StationaryPairingResult stationary_family_pairing(const StationaryComponents& comp,
                                                  const MetricFamily& metric,
                                                  const DiscretizedCurve& curve,
                                                  const JacobiSolution& V) {
  require(metric.kind() == MetricKind::StandardStationary, ErrorKind::ValidationError,
          "stationary pairing needs a standard-stationary metric");
  int n0 = metric.stationary_base_dim();
  // vertical check: the base-factor position is frozen
  Vecd x0(curve.positions.row(0), curve.positions.row(0) + n0);
  for (int i = 0; i <= curve.m; ++i)
    for (int a = 0; a < n0; ++a)
      require(std::abs(curve.positions(i, a) - x0[a]) <= 1e-10, ErrorKind::NotVertical,
              "geodesic is not an integral line of the Killing field");
  PerturbationField f = stationary_field(comp, Vecd(n0, -1e300), Vecd(n0, 1e300));
  StationaryPairingResult out;
  out.value = transversality_pairing(f, metric, curve, V);
  // analytic certificates for the vanishing mechanism
  Vecd rho0(n0);
  for (int a = 0; a < n0; ++a) rho0[a] = comp.rho[a]->value(x0);
  Vecd dxi(n0);
  for (int a = 0; a < n0; ++a) dxi[a] = V.J(curve.m, a) - V.J(0, a);
  out.cert_endpoint = std::abs(vdot(rho0, dxi));
  Vecd gz = comp.zeta->grad(x0);
  Vecd intxi(n0, 0.0);
  double hstep = 1.0 / curve.m;
  for (int e = 0; e < curve.m; ++e)
    for (double s : {kGaussA, kGaussB}) {
      double t = (e + s) * hstep;
      Vecd J = jacobi_interp_J(V, t);
      for (int a = 0; a < n0; ++a) intxi[a] += 0.5 * hstep * J[a];
    }
  out.cert_integral = std::abs(vdot(gz, intxi));
  return out;
}

SurjectivityReport surjectivity_criterion(const std::vector<JacobiSolution>& kernel_fields,
                                          const std::vector<PerturbationField>& candidates,
                                          const MetricFamily& metric,
                                          const DiscretizedCurve& curve, double quadrature_tol) {
  SurjectivityReport rep;
  rep.threshold = 10.0 * quadrature_tol;
  if (kernel_fields.empty()) {
    rep.overall = OverallVerdict::EmptyKernel;
    return rep;
  }
  rep.pairings = Mat(kernel_fields.size(), std::max<std::size_t>(candidates.size(), 1), 0.0);
  bool all_certified = true;
  for (std::size_t i = 0; i < kernel_fields.size(); ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      double p = transversality_pairing(candidates[j], metric, curve, kernel_fields[i]);
      rep.pairings(i, j) = p;
      best = std::max(best, std::abs(p));
    }
    bool cert = best > rep.threshold;
    rep.rows.push_back(cert ? RowVerdict::Certified : RowVerdict::Obstructed);
    all_certified = all_certified && cert;
  }
  rep.overall = all_certified ? OverallVerdict::Transversal : OverallVerdict::Obstructed;
  return rep;
}

std::vector<SweepRow> break_degeneracy_sweep(const MetricFamily& metric,
                                             const DiscretizedCurve& curve,
                                             const PerturbationField& h, const Vecd& eps_list,
                                             double kernel_tol, const ShootOptions& opts) {
  std::vector<SweepRow> rows;
  MetricFamily gR = MetricFamily::flat_euclidean(curve.n);
  PathBasis basis{curve.m, curve.n};
  Vecd p = curve.pos(0), q = curve.pos(curve.m), v0 = curve.vel(0);
  // re-shoots start at a degenerate configuration, so the conjugate-endpoint
  // gate must sit below the physical epsilon-scale of the breaking
  ShootOptions sweep_opts = opts;
  sweep_opts.singular_rel_tol = std::min(opts.singular_rel_tol, 1e-8);
  for (double eps : eps_list) {
    SweepRow row;
    row.eps = eps;
    try {
      DiscretizedCurve c_eps;
      if (eps == 0.0) {
        c_eps = curve;
      } else {
        MetricFamily g_eps = MetricFamily::perturbed(metric, h.tensor, eps);
        try {
          ShootResult sr = shoot_bvp(g_eps, p, q, v0, curve.m, sweep_opts.tol, sweep_opts);
          c_eps = sr.curve;
          row.reshoot_residual = sr.residual;
        } catch (const Error& e) {
          // a singular endpoint map with the unperturbed velocity already
          // solving the problem means the degenerate configuration persisted
          if (e.kind() != ErrorKind::SingularEndpointJacobian) throw;
          DiscretizedCurve direct = integrate_geodesic(g_eps, p, v0, curve.m);
          double res = vnorm(g_eps.wrapped_delta(direct.pos(curve.m), q));
          if (res > std::max(10.0 * sweep_opts.tol, 1e-8)) throw;
          c_eps = direct;
          row.reshoot_residual = res;
        }
      }
      const MetricFamily* geff_ptr = nullptr;
      MetricFamily g_eps_store = MetricFamily::flat_euclidean(1);
      if (eps == 0.0) {
        geff_ptr = &metric;
      } else {
        g_eps_store = MetricFamily::perturbed(metric, h.tensor, eps);
        geff_ptr = &g_eps_store;
      }
      IndexFormMatrix ifm = assemble_index_form(*geff_ptr, gR, c_eps, basis);
      KernelResult kr = kernel(ifm, *geff_ptr, c_eps, kernel_tol);
      row.kernel_dim = kr.dimension;
      row.min_abs_lambda = kr.min_abs_lambda;
    } catch (const Error& e) {
      row.reshoot_failed = true;
      row.error = e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

namespace {

double default_profile_integral() { return 0.45714285714285713; }  // int_0^1 64 (s(1-s))^3 ds

FieldAlongCurve field_from_solution(const JacobiSolution& V) {
  return [V](double t) { return jacobi_interp_J(V, t); };
}

double tube_clearance(const MetricFamily& metric, const DiscretizedCurve& curve, double a,
                      double b) {
  // distance from nodes outside the arc to the arc image
  int samples = 24;
  std::vector<Vecd> image;
  for (int k = 0; k <= samples; ++k)
    image.push_back(curve_eval(metric, curve, a + (b - a) * k / samples).x);
  double buffer = 2.0 / curve.m;
  double clearance = 1e300;
  for (int j = 0; j <= curve.m; ++j) {
    double t = curve.grid[j];
    if (t >= a - buffer && t <= b + buffer) continue;
    for (const Vecd& y : image)
      clearance = std::min(clearance, metric.wrapped_distance(curve.pos(j), y));
  }
  return clearance;
}

}  // namespace

std::vector<PerturbationField> generate_candidates(const MetricFamily& metric,
                                                   const DiscretizedCurve& curve,
                                                   const std::vector<JacobiSolution>& kernel_fields,
                                                   PerturbationClass cls, int count, Rng& rng,
                                                   double parallel_tol, double spatial_tol) {
  std::vector<PerturbationField> out;
  if (cls == PerturbationClass::Stationary) {
    require(metric.kind() == MetricKind::StandardStationary, ErrorKind::ValidationError,
            "stationary candidates need a standard-stationary metric");
    int n0 = metric.stationary_base_dim();
    Vecd x0(curve.positions.row(0), curve.positions.row(0) + n0);
    for (int k = 0; k < count; ++k) {
      StationaryComponents comp = random_stationary_components(n0, x0, rng);
      Vecd lo(n0), hi(n0);
      for (int a = 0; a < n0; ++a) {
        lo[a] = x0[a] - 0.6;
        hi[a] = x0[a] + 0.6;
      }
      out.push_back(stationary_field(comp, lo, hi));
    }
    return out;
  }

  for (std::size_t ki = 0; ki < kernel_fields.size() && static_cast<int>(out.size()) < count;
       ++ki) {
    const JacobiSolution& V = kernel_fields[ki];
    SupportIntervalResult si = support_interval(metric, curve, V, parallel_tol, spatial_tol);
    double a = si.a, b = si.b;
    FieldAlongCurve field;
    if (si.used == SupportField::V) {
      field = field_from_solution(V);
    } else {
      IntersectionReport inter = self_intersections(metric, curve, spatial_tol);
      SummedFields sums = iterate_sum_fields(V, inter.periodic->T, inter.periodic->k_star,
                                             inter.periodic->t_star);
      FieldOnInterval W = si.used == SupportField::W1 ? sums.W1 : sums.W2;
      field = [W](double t) {
        // linear interpolation on the subinterval grid
        double u = (t - W.a) / (W.b - W.a) * W.m;
        int i = std::clamp(static_cast<int>(u), 0, W.m - 1);
        double s = u - i;
        Vecd r(W.J.cols());
        for (std::size_t c = 0; c < W.J.cols(); ++c)
          r[c] = (1.0 - s) * W.J(i, c) + s * W.J(i + 1, c);
        return r;
      };
    }
    double clear = tube_clearance(metric, curve, a, b);
    double r_tube = std::clamp(0.4 * clear, 0.02, 0.5);
    // lowered-tangent profile; for null geodesics use a fixed causal leg
    Vecd vmid = curve_eval(metric, curve, 0.5 * (a + b)).v;
    Vecd xmid = curve_eval(metric, curve, 0.5 * (a + b)).x;
    bool null_like = std::abs(curve.energy) <= 1e-8;
    Vecd w;
    if (!null_like) {
      w = matvec(metric.eval(xmid), vmid);
    } else {
      w.assign(curve.n, 0.0);
      w[0] = 1.0;
    }
    double c0 = vdot(w, vmid);
    // sized so that re-shoots converge across the default sweep range
    double amp = 0.1 / ((b - a) * default_profile_integral() * std::max(c0 * c0, 0.25));
    auto make_K = [&, a, b, amp, w, cls_n = curve.n](const MetricFamily* fam) {
      (void)fam;
      return KProfile([=](double t) {
        double s = (t - a) / (b - a);
        double f = amp * bump_profile(s);
        Mat k(cls_n, cls_n);
        for (int i = 0; i < cls_n; ++i)
          for (int j = 0; j < cls_n; ++j) k(i, j) = f * w[i] * w[j];
        return k;
      });
    };
    if (cls == PerturbationClass::General) {
      out.push_back(bump_tensor(metric, curve, a, b, field, make_K(&metric), r_tube));
    } else if (cls == PerturbationClass::Conformal) {
      double aamp = 1.0 / ((b - a) * default_profile_integral());
      auto alpha = [=](double t) { return aamp * bump_profile((t - a) / (b - a)); };
      out.push_back(conformal_bump(metric, curve, a, b, field, alpha, r_tube));
    } else if (cls == PerturbationClass::Split) {
      int n1 = metric.split_n1();
      int n2 = curve.n - n1;
      auto block = [&](int off, int nf) {
        return KProfile([=, &metric, cv = curve](double t) {
          CurvePoint cp = curve_eval(metric, cv, t);
          double s = (t - a) / (b - a);
          double f = amp * bump_profile(s);
          Mat k(nf, nf);
          for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j) k(i, j) = f * cp.v[off + i] * cp.v[off + j];
          return k;
        });
      };
      out.push_back(split_bump(metric, curve, a, b, field, block(0, n1), block(n1, n2), r_tube));
    }
  }
  // seeded extras: jittered intervals and directions around the first kernel field
  while (static_cast<int>(out.size()) < count && !kernel_fields.empty()) {
    const JacobiSolution& V = kernel_fields[rng.below(kernel_fields.size())];
    SupportIntervalResult si = support_interval(metric, curve, V, parallel_tol, spatial_tol);
    double span = si.b - si.a;
    double a = si.a + 0.15 * span * rng.uniform();
    double b = si.b - 0.15 * span * rng.uniform();
    double clear = tube_clearance(metric, curve, a, b);
    double r_tube = std::clamp(0.4 * clear, 0.02, 0.5);
    Vecd vmid = curve_eval(metric, curve, 0.5 * (a + b)).v;
    Vecd w(curve.n);
    double c0 = 0.0;
    for (int tries = 0; tries < 10; ++tries) {
      for (int i = 0; i < curve.n; ++i) w[i] = rng.uniform(-1.0, 1.0);
      double nw = vnorm(w);
      if (nw < 1e-6) continue;
      kern::active().scal(1.0 / nw, w.data(), w.size());
      c0 = vdot(w, vmid);
      if (std::abs(c0) > 0.1 * vnorm(vmid)) break;
    }
    double amp = 0.1 / ((b - a) * default_profile_integral() * std::max(c0 * c0, 0.25));
    KProfile K = [=, cls_n = curve.n](double t) {
      double s = (t - a) / (b - a);
      double f = amp * bump_profile(s);
      Mat k(cls_n, cls_n);
      for (int i = 0; i < cls_n; ++i)
        for (int j = 0; j < cls_n; ++j) k(i, j) = f * w[i] * w[j];
      return k;
    };
    out.push_back(bump_tensor(metric, curve, a, b, field_from_solution(V), K, r_tube));
  }
  return out;
}

StationaryComponents random_stationary_components(int n0, const Vecd& x0, Rng& rng) {
  StationaryComponents comp;
  comp.n0 = n0;
  Vecd radii(n0, 0.5);
  auto wp = [&](double c0, Vecd b, Mat q) {
    return scalar_windowed_poly(x0, radii, c0, std::move(b), std::move(q));
  };
  comp.hmat.assign(n0, std::vector<ScalarPtr>(n0));
  for (int i = 0; i < n0; ++i)
    for (int j = i; j < n0; ++j) {
      Vecd b(n0);
      Mat q(n0, n0);
      for (int a = 0; a < n0; ++a) b[a] = rng.uniform(-0.5, 0.5);
      for (int a = 0; a < n0; ++a)
        for (int c = 0; c < n0; ++c) q(a, c) = rng.uniform(-0.5, 0.5);
      ScalarPtr s = wp(rng.uniform(-1.0, 1.0), std::move(b), std::move(q));
      comp.hmat[i][j] = s;
      comp.hmat[j][i] = s;
    }
  comp.rho.resize(n0);
  for (int a = 0; a < n0; ++a) {
    double c0 = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    comp.rho[a] = wp(c0, Vecd(n0, 0.0), Mat(n0, n0, 0.0));
  }
  {
    Vecd b(n0);
    for (int a = 0; a < n0; ++a)
      b[a] = (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.5, 1.5);
    comp.zeta = wp(rng.uniform(-0.5, 0.5), std::move(b), Mat(n0, n0, 0.0));
  }
  return comp;
}

}  // namespace geovar
