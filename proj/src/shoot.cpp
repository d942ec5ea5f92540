// Two-point boundary value problem by shooting. Newton's update uses the
// Jacobi endpoint matrix A(1) as the derivative of the endpoint map, which is
// also the conjugate-endpoint detector: converging through (or stalling at) a
// singular A(1) is surfaced as a typed error, not regularized away.

#include <cmath>

#include "geovar/errors.hpp"
#include "geovar/geodesic.hpp"
#include "geovar/jacobi.hpp"
#include "geovar/kernels.hpp"

namespace geovar {

ShootResult shoot_bvp(const MetricFamily& metric, const Vecd& p, const Vecd& q,
                      const Vecd& v_guess, int m, double tol, const ShootOptions& opts) {
  require(tol >= 1e-12, ErrorKind::ValidationError, "tol must be >= 1e-12");
  int n = metric.dim();
  if (!opts.allow_equal)
    require(metric.wrapped_distance(p, q) > 0.0, ErrorKind::EndpointsEqual,
            "p == q requires the allow-equal flag");

  Vecd v = v_guess;
  DiscretizedCurve curve;
  for (int it = 0; it < opts.max_iter; ++it) {
    curve = integrate_geodesic(metric, p, v, m);
    Vecd gap = metric.wrapped_delta(curve.pos(m), q);
    double res = vnorm(gap);
    Mat A1 = endpoint_matrix(metric, curve, 1.0);
    SvdResult s = svd(A1);
    double smax = s.sigma.front();
    bool singular = !(smax > 0.0) || s.sigma.back() / smax <= opts.singular_rel_tol;
    if (res <= tol) {
      // reaching q exactly through a conjugate endpoint is a finding
      require(!singular, ErrorKind::SingularEndpointJacobian,
              "endpoint map derivative is singular (conjugate endpoints)");
      ShootResult out;
      out.curve = curve;
      out.v0 = v;
      out.iterations = it;
      out.residual = res;
      return out;
    }

    // Newton step via the SVD pseudo-inverse; sigma_cut drops directions too
    // ill-conditioned to trust at this iterate
    auto newton_dir = [&](double sigma_cut) {
      Vecd dir(n, 0.0);
      for (int k = 0; k < n; ++k) {
        if (s.sigma[k] < sigma_cut * smax) continue;
        double c = 0.0;
        for (int a = 0; a < n; ++a) c += s.u(a, k) * (-gap[a]);
        c /= s.sigma[k];
        for (int a = 0; a < n; ++a) dir[a] += c * s.v(a, k);
      }
      return dir;
    };
    // cap the raw step, then backtrack on the endpoint gap so the iteration
    // stays in the nearby basin; a singular iterate first tries the
    // well-conditioned subspace
    double vscaleref = std::max(1.0, vnorm(v));
    bool accepted = false;
    std::initializer_list<double> cuts =
        singular ? std::initializer_list<double>{1e-2, 0.0}
                 : std::initializer_list<double>{0.0, 1e-2};
    for (double cut : cuts) {
      Vecd dv = newton_dir(cut);
      double step = vnorm(dv);
      if (step == 0.0) continue;
      if (step > 0.5 * vscaleref)
        kern::active().scal(0.5 * vscaleref / step, dv.data(), dv.size());
      double lambda = 1.0;
      for (int bt = 0; bt < 12 && !accepted; ++bt) {
        Vecd vtrial(v);
        vaxpy_inplace(lambda, dv, vtrial);
        try {
          DiscretizedCurve ct = integrate_geodesic(metric, p, vtrial, m);
          double rt = vnorm(metric.wrapped_delta(ct.pos(m), q));
          if (rt < res) {
            v = vtrial;
            accepted = true;
          }
        } catch (const Error&) {
          // left the chart: shorten the step
        }
        lambda *= 0.5;
      }
      if (accepted) break;
    }
    if (!accepted) {
      require(!singular, ErrorKind::SingularEndpointJacobian,
              "shooting stalled at a singular endpoint map (conjugate endpoints)");
      fail(ErrorKind::NoConvergence, "shooting stalled (no descent step found)");
    }
  }
  fail(ErrorKind::NoConvergence, "shooting did not reach tolerance in max_iter iterations");
}

}  // namespace geovar
