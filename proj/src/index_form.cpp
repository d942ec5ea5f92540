#include "geovar/index_form.hpp"

#include <algorithm>
#include <cmath>

#include "geovar/errors.hpp"

namespace geovar {

namespace {

// 2-point Gauss-Legendre on [0,1]
constexpr double kGaussA = 0.21132486540518711775;
constexpr double kGaussB = 0.78867513459481288225;

struct QuadPoint {
  double t = 0.0, w = 0.0;
  Vecd x, v;
  Mat g;        // metric value
  Mat gv;       // Gamma(v, .)
  Mat rq;       // R(v, .) v
  Mat gR;       // auxiliary metric value
  Mat gvR;      // Gamma^R(v, .)
  Mat at;       // g_R-symmetric operator with g = g_R(A_t ., .)
};

std::vector<QuadPoint> quadrature_points(const MetricFamily& metric, const MetricFamily& gR,
                                         const DiscretizedCurve& curve) {
  int m = curve.m;
  double h = 1.0 / m;
  std::vector<QuadPoint> qps;
  qps.reserve(2 * m);
  for (int e = 0; e < m; ++e) {
    for (double s : {kGaussA, kGaussB}) {
      QuadPoint qp;
      qp.t = (e + s) * h;
      qp.w = 0.5 * h;
      CurvePoint cp = curve_eval(metric, curve, qp.t);
      qp.x = cp.x;
      qp.v = cp.v;
      PointGeometry geo = metric.geometry(qp.x);
      qp.g = std::move(geo.g);
      qp.gv = christoffel_v(geo.ch, qp.v);
      qp.rq = jacobi_operator(geo.cu, qp.v);
      qp.gR = gR.eval(qp.x);
      ChristoffelData chR = gR.christoffel(qp.x);
      qp.gvR = christoffel_v(chR, qp.v);
      // A_t columns solve gR . col = g . e_a
      Lu lu(qp.gR);
      int n = curve.n;
      qp.at = Mat(n, n);
      Vecd rhs(n);
      for (int a = 0; a < n; ++a) {
        for (int i = 0; i < n; ++i) rhs[i] = qp.g(i, a);
        Vecd col = lu.solve(rhs);
        for (int i = 0; i < n; ++i) qp.at(i, a) = col[i];
      }
      qps.push_back(std::move(qp));
    }
  }
  return qps;
}

}  // namespace

IndexFormMatrix assemble_index_form(const MetricFamily& metric, const MetricFamily& gR,
                                    const DiscretizedCurve& curve, const PathBasis& basis) {
  require(basis.m == curve.m && basis.n == curve.n, ErrorKind::GridMismatch,
          "basis grid does not match the curve");
  require(gR.metric_index(curve.pos(0)) == 0, ErrorKind::ValidationError,
          "auxiliary metric must be positive definite");
  require(geodesic_residual(metric, curve) <= kGeodesicGate, ErrorKind::NotAGeodesic,
          "curve violates the geodesic residual gate");

  int m = curve.m, n = curve.n;
  int dim = basis.dim();
  double h = 1.0 / m;
  IndexFormMatrix out;
  out.basis = basis;
  out.A = Mat(dim, dim, 0.0);
  out.G = Mat(dim, dim, 0.0);
  out.phi_part = Mat(dim, dim, 0.0);

  std::vector<QuadPoint> qps = quadrature_points(metric, gR, curve);
  // local fields per element: (node, dir) -> value phi, derivative dphi
  for (int e = 0; e < m; ++e) {
    for (int iq = 0; iq < 2; ++iq) {
      const QuadPoint& qp = qps[2 * e + iq];
      double s = (qp.t - e * h) / h;  // position within the element
      double phiL = 1.0 - s, phiR = s;
      double dphiL = -static_cast<double>(m), dphiR = static_cast<double>(m);
      // local basis: 2 nodes x n directions
      struct LocalField {
        int global = -1;
        Vecd val, dcov, dcovR;  // value, metric covariant deriv, g_R covariant deriv
        Vecd rv;                // R(v, val) v
      };
      std::vector<LocalField> loc;
      loc.reserve(2 * n);
      for (int side = 0; side < 2; ++side) {
        int node = e + side;
        if (node < 1 || node > m - 1) continue;
        double phi = side == 0 ? phiL : phiR;
        double dphi = side == 0 ? dphiL : dphiR;
        for (int a = 0; a < n; ++a) {
          LocalField f;
          f.global = basis.index(node, a);
          f.val.assign(n, 0.0);
          f.val[a] = phi;
          f.dcov.resize(n);
          f.dcovR.resize(n);
          for (int i = 0; i < n; ++i) {
            double base = (i == a) ? dphi : 0.0;
            f.dcov[i] = base + phi * qp.gv(i, a);
            f.dcovR[i] = base + phi * qp.gvR(i, a);
          }
          f.rv.resize(n);
          for (int i = 0; i < n; ++i) f.rv[i] = phi * qp.rq(i, a);
          loc.push_back(std::move(f));
        }
      }
      for (const auto& f1 : loc) {
        Vecd g_d1 = matvec(qp.g, f1.dcov);
        Vecd g_r1 = matvec(qp.g, f1.rv);
        Vecd gR_d1 = matvec(qp.gR, f1.dcovR);
        Vecd at_d1 = matvec(qp.at, f1.dcovR);
        Vecd gR_at_d1 = matvec(qp.gR, at_d1);
        for (const auto& f2 : loc) {
          double a_term = vdot(g_d1, f2.dcov) + vdot(g_r1, f2.val);
          out.A(f1.global, f2.global) += qp.w * a_term;
          out.G(f1.global, f2.global) += qp.w * vdot(gR_d1, f2.dcovR);
          out.phi_part(f1.global, f2.global) += qp.w * vdot(gR_at_d1, f2.dcovR);
        }
      }
    }
  }
  out.A = symmetrize(out.A);
  out.G = symmetrize(out.G);
  out.phi_part = symmetrize(out.phi_part);
  out.e_part = out.A - out.phi_part;
  return out;
}

Mat unpack_field(const PathBasis& basis, const Vecd& coeffs) {
  Mat nodal(basis.m + 1, basis.n, 0.0);
  for (int node = 1; node <= basis.m - 1; ++node)
    for (int a = 0; a < basis.n; ++a) nodal(node, a) = coeffs[basis.index(node, a)];
  return nodal;
}

Vecd pack_field(const PathBasis& basis, const Mat& nodal) {
  Vecd coeffs(basis.dim(), 0.0);
  for (int node = 1; node <= basis.m - 1; ++node)
    for (int a = 0; a < basis.n; ++a) coeffs[basis.index(node, a)] = nodal(node, a);
  return coeffs;
}

KernelResult kernel(const IndexFormMatrix& ifm, const MetricFamily& metric,
                    const DiscretizedCurve& curve, double kernel_tol) {
  EigResult eig = sym_eig_generalized(ifm.A, ifm.G);
  KernelResult out;
  out.all_lambdas = eig.values;
  out.min_abs_lambda = 1e300;
  for (double v : eig.values) out.min_abs_lambda = std::min(out.min_abs_lambda, std::abs(v));
  int dim = ifm.basis.dim();
  EndpointTrack tr = endpoint_track(metric, curve);
  for (int k = 0; k < dim; ++k) {
    if (std::abs(eig.values[k]) >= kernel_tol) continue;
    KernelField f;
    f.lambda = eig.values[k];
    Vecd coeffs(dim);
    for (int i = 0; i < dim; ++i) coeffs[i] = eig.vectors(i, k);
    f.nodal = unpack_field(ifm.basis, coeffs);
    // initial covariant derivative by least squares over all nodes
    int n = curve.n;
    Mat M(n, n, 0.0);
    Vecd b(n, 0.0);
    for (int i = 0; i <= curve.m; ++i) {
      const Mat& Ai = tr.A[i];
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          for (int a = 0; a < n; ++a) M(r, c) += Ai(a, r) * Ai(a, c);
        }
      for (int r = 0; r < n; ++r)
        for (int a = 0; a < n; ++a) b[r] += Ai(a, r) * f.nodal(i, a);
    }
    Lu lu(M);
    Vecd w = lu.solve(b);
    f.reconstruction = jacobi_solve(metric, curve, Vecd(n, 0.0), w);
    // cosine similarity over all nodes
    double dot = 0.0, n1 = 0.0, n2 = 0.0, maxrec = 0.0;
    for (int i = 0; i <= curve.m; ++i)
      for (int a = 0; a < n; ++a) {
        double x = f.nodal(i, a), y = f.reconstruction.J(i, a);
        dot += x * y;
        n1 += x * x;
        n2 += y * y;
        maxrec = std::max(maxrec, std::abs(y));
      }
    f.jacobi_cosine = (n1 > 0 && n2 > 0) ? std::abs(dot) / std::sqrt(n1 * n2) : 0.0;
    double endnorm = vnorm(f.reconstruction.j(curve.m));
    f.endpoint_ratio = maxrec > 0 ? endnorm / maxrec : 0.0;
    out.fields.push_back(std::move(f));
  }
  out.dimension = static_cast<int>(out.fields.size());
  return out;
}

FredholmReport fredholm_split_check(const IndexFormMatrix& ifm) {
  FredholmReport rep;
  Mat resid = ifm.A - ifm.phi_part - ifm.e_part;
  rep.split_residual = max_abs(resid);
  rep.e_zero = (max_abs(ifm.e_part) == 0.0);
  if (rep.e_zero) return rep;
  EigResult eig = sym_eig_generalized(ifm.e_part, ifm.G);
  Vecd sig;
  for (double v : eig.values) sig.push_back(std::abs(v));
  std::sort(sig.begin(), sig.end(), std::greater<double>());
  rep.sigma = sig;
  // fit log sigma_k ~ log C + p log k on the leading half above noise
  int kmax = std::max<std::size_t>(4, sig.size() / 2);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = 1; k <= kmax && k <= static_cast<int>(sig.size()); ++k) {
    if (sig[k - 1] <= 1e-14 * sig[0]) break;
    double lx = std::log(static_cast<double>(k));
    double ly = std::log(sig[k - 1]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++cnt;
  }
  if (cnt >= 2) {
    double denom = cnt * sxx - sx * sx;
    rep.fitted_exponent = denom != 0.0 ? (cnt * sxy - sx * sy) / denom : 0.0;
  }
  return rep;
}

StationaryIndexForm stationary_index_form(const ScalarFamily& beta, const Vecd& x0, int m) {
  int n0 = beta.dim();
  require(vnorm(beta.grad(x0)) <= 1e-10, ErrorKind::NotCriticalPoint,
          "x0 is not a critical point of beta");
  StationaryIndexForm out;
  out.m = m;
  out.n0 = n0;
  double h = 1.0 / m;
  int nb = m - 1;  // scalar hat count
  Mat S(nb, nb, 0.0);   // stiffness: int phi' psi'
  Mat Mm(nb, nb, 0.0);  // mass: int phi psi
  for (int i = 0; i < nb; ++i) {
    S(i, i) = 2.0 / h;
    Mm(i, i) = 2.0 * h / 3.0;
    if (i + 1 < nb) {
      S(i, i + 1) = S(i + 1, i) = -1.0 / h;
      Mm(i, i + 1) = Mm(i + 1, i) = h / 6.0;
    }
  }
  Mat H = beta.hess(x0);
  double beta0 = beta.value(x0);
  int dim_xi = n0 * nb;
  out.xi_A = Mat(dim_xi, dim_xi, 0.0);
  out.xi_G = Mat(dim_xi, dim_xi, 0.0);
  for (int i = 0; i < nb; ++i)
    for (int j = 0; j < nb; ++j)
      for (int a = 0; a < n0; ++a)
        for (int b = 0; b < n0; ++b) {
          int r = i * n0 + a, c = j * n0 + b;
          double val = (a == b ? S(i, j) : 0.0) - 0.5 * H(a, b) * Mm(i, j);
          out.xi_A(r, c) = val;
          out.xi_G(r, c) = (a == b) ? S(i, j) : 0.0;
        }
  out.sigma_A = S;
  out.sigma_A *= -beta0;
  out.sigma_G = S;
  // assemble the full block-diagonal form with the Phi/E split:
  // Phi carries the derivative terms, E the Hessian mass term
  int dim = dim_xi + nb;
  out.full.basis = PathBasis{m, n0 + 1};
  out.full.A = Mat(dim, dim, 0.0);
  out.full.G = Mat(dim, dim, 0.0);
  out.full.phi_part = Mat(dim, dim, 0.0);
  for (int r = 0; r < dim_xi; ++r)
    for (int c = 0; c < dim_xi; ++c) {
      out.full.A(r, c) = out.xi_A(r, c);
      out.full.G(r, c) = out.xi_G(r, c);
      out.full.phi_part(r, c) = out.xi_G(r, c);  // identity A_t on the xi factor
    }
  for (int r = 0; r < nb; ++r)
    for (int c = 0; c < nb; ++c) {
      out.full.A(dim_xi + r, dim_xi + c) = out.sigma_A(r, c);
      out.full.G(dim_xi + r, dim_xi + c) = out.sigma_G(r, c);
      out.full.phi_part(dim_xi + r, dim_xi + c) = out.sigma_A(r, c);  // A_t = -beta0
    }
  out.full.e_part = out.full.A - out.full.phi_part;
  return out;
}

double quadratic_form(const IndexFormMatrix& ifm, const Mat& nodal) {
  Vecd c = pack_field(ifm.basis, nodal);
  return vdot(c, matvec(ifm.A, c));
}

double action_displaced(const MetricFamily& metric, const DiscretizedCurve& curve,
                        const Mat& nodalV, double eps) {
  int m = curve.m, n = curve.n;
  double h = 1.0 / m;
  double acc = 0.0;
  for (int e = 0; e < m; ++e) {
    for (double s : {kGaussA, kGaussB}) {
      double t = (e + s) * h;
      CurvePoint cp = curve_eval(metric, curve, t);
      Vecd x(n), v(n);
      for (int a = 0; a < n; ++a) {
        double Vval = (1.0 - s) * nodalV(e, a) + s * nodalV(e + 1, a);
        double Vdot = (nodalV(e + 1, a) - nodalV(e, a)) / h;
        x[a] = cp.x[a] + eps * Vval;
        v[a] = cp.v[a] + eps * Vdot;
      }
      Mat g = metric.eval(x);
      acc += 0.5 * h * 0.5 * vdot(matvec(g, v), v);
    }
  }
  return acc;
}

double action_gradient(const MetricFamily& metric, const MetricFamily& base,
                       const DiscretizedCurve& curve, const JacobiSolution& V) {
  int m = curve.m;
  double h = 1.0 / m;
  double acc = 0.0;
  for (int e = 0; e < m; ++e) {
    for (double s : {kGaussA, kGaussB}) {
      double t = (e + s) * h;
      CurvePoint cp = curve_eval(base, curve, t);
      Mat g = metric.eval(cp.x);
      Vecd J = jacobi_interp_J(V, t);
      // plain parameter derivative of J: the stored covariant derivative was
      // produced under the base connection
      Vecd Jdot = vsub(jacobi_interp_DJ(V, t),
                       matvec(christoffel_v(base.christoffel(cp.x), cp.v), J));
      Vecd DJ = vadd(Jdot, matvec(christoffel_v(metric.christoffel(cp.x), cp.v), J));
      acc += 0.5 * h * vdot(matvec(g, cp.v), DJ);
    }
  }
  return acc;
}

}  // namespace geovar
