// Metric catalog: closed-form examples plus finite-difference oracles for
// derivatives, Christoffels, and curvature on every built-in family.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "geovar/errors.hpp"
#include "geovar/hyperbolicity.hpp"
#include "geovar/metric.hpp"
#include "geovar/rng.hpp"
#include "geovar/scalar_family.hpp"
#include "oracles.hpp"

using namespace geovar;

namespace {

constexpr double kPi = 3.14159265358979323846;

// sample a point with margin from the domain walls (periodic axes get a full
// period)
Vecd sample_point(const MetricFamily& g, Rng& rng, double margin = 0.02) {
  int n = g.dim();
  Vecd x(n);
  for (int i = 0; i < n; ++i) {
    double lo = g.domain().lo[i], hi = g.domain().hi[i];
    if (g.periods()[i] > 0.0) {
      x[i] = rng.uniform(0.0, g.periods()[i]);
    } else {
      lo = std::max(lo, -4.0) + margin;
      hi = std::min(hi, 4.0) - margin;
      x[i] = rng.uniform(lo, hi);
    }
  }
  return x;
}

std::vector<MetricFamily> builtin_families() {
  std::vector<MetricFamily> fams;
  fams.push_back(MetricFamily::flat_euclidean(2));
  fams.push_back(MetricFamily::flat_euclidean(3));
  fams.push_back(MetricFamily::minkowski(3));
  fams.push_back(MetricFamily::round_sphere_chart());
  fams.push_back(MetricFamily::lorentz_cylinder());
  fams.push_back(MetricFamily::split_product(1, 1, 0.2, 0.1));
  fams.push_back(MetricFamily::split_product(2, 1, 0.0, 0.3));
  fams.push_back(MetricFamily::standard_stationary(
      1, scalar_quadratic(1.0, {4.0 * kPi * kPi}, {0.0})));
  {
    AlphaBetaPair pair;
    pair.sigma_dim = 1;
    pair.geom = AlphaBetaPair::SigmaGeom::Circle;
    pair.alpha_kind = AlphaBetaPair::AlphaKind::CosIsotropic;
    pair.alpha_params = {2.0, 1.0};
    pair.beta_kind = AlphaBetaPair::BetaKind::Const;
    pair.beta_params = {1.0};
    pair.base_point = {0.0};
    pair.sigma_box = {{0.0}, {6.283185307179586}};
    pair.s_halfwidth = 6.0;
    fams.push_back(MetricFamily::g_alpha_beta(pair));
  }
  fams.push_back(MetricFamily::conformal_rescale(MetricFamily::flat_euclidean(2),
                                                 scalar_quadratic(1.0, {1.0, 0.0}, {0.0, 0.0})));
  fams.push_back(
      MetricFamily::conformal_rescale(MetricFamily::minkowski(3), scalar_constant(3, 2.0)));
  return fams;
}

}  // namespace

TEST_CASE("metric_eval closed forms") {
  MetricFamily flat = MetricFamily::flat_euclidean(2);
  Mat g = flat.eval({0.3, 0.7});
  CHECK(g(0, 0) == 1.0);
  CHECK(g(1, 1) == 1.0);
  CHECK(g(0, 1) == 0.0);

  MetricFamily mink = MetricFamily::minkowski(3);
  Mat gm = mink.eval({0.1, -0.5, 2.0});
  CHECK(gm(0, 0) == -1.0);
  CHECK(gm(1, 1) == 1.0);
  CHECK(gm(2, 2) == 1.0);

  MetricFamily sph = MetricFamily::round_sphere_chart();
  Mat gs = sph.eval({kPi / 2.0, 0.0});
  CHECK(gs(0, 0) == doctest::Approx(1.0));
  CHECK(gs(1, 1) == doctest::Approx(1.0));  // sin^2(pi/2)

  CHECK_THROWS_AS((void)sph.eval({0.01, 0.0}), Error);  // outside the chart strip
}

TEST_CASE("metric_derivatives closed forms") {
  MetricFamily flat = MetricFamily::flat_euclidean(2);
  std::vector<Mat> dg;
  flat.derivatives({0.5, -0.25}, 1, dg, nullptr);
  CHECK(max_abs(dg[0]) == 0.0);
  CHECK(max_abs(dg[1]) == 0.0);

  MetricFamily sph = MetricFamily::round_sphere_chart();
  sph.derivatives({kPi / 3.0, 0.0}, 1, dg, nullptr);
  CHECK(dg[0](1, 1) == doctest::Approx(2.0 * std::sin(kPi / 3) * std::cos(kPi / 3)));
  CHECK(dg[0](1, 1) == doctest::Approx(std::sqrt(3.0) / 2.0));

  // conformal rescale of flat by psi = 1 + x1^2 at (1, 0)
  MetricFamily conf = MetricFamily::conformal_rescale(
      MetricFamily::flat_euclidean(2), scalar_quadratic(1.0, {1.0, 0.0}, {0.0, 0.0}));
  conf.derivatives({1.0, 0.0}, 1, dg, nullptr);
  CHECK(dg[0](0, 0) == doctest::Approx(2.0));
  CHECK(dg[0](1, 1) == doctest::Approx(2.0));
  CHECK(dg[0](0, 1) == doctest::Approx(0.0));
  CHECK(max_abs(dg[1]) == doctest::Approx(0.0));
}

TEST_CASE("christoffel closed forms and the Koszul oracle") {
  MetricFamily flat = MetricFamily::flat_euclidean(3);
  ChristoffelData ch = flat.christoffel({0.2, 0.4, -1.0});
  for (int i = 0; i < 3; ++i) CHECK(max_abs(ch.gamma[i]) == 0.0);

  MetricFamily sph = MetricFamily::round_sphere_chart();
  ChristoffelData cs = sph.christoffel({kPi / 4.0, 0.3});
  CHECK(cs.gamma[0](1, 1) == doctest::Approx(-std::sin(kPi / 4) * std::cos(kPi / 4)));
  CHECK(cs.gamma[0](1, 1) == doctest::Approx(-0.5));
  CHECK(cs.gamma[1](0, 1) == doctest::Approx(1.0));  // cot(pi/4)

  // constant conformal factor leaves the connection unchanged (flat base)
  MetricFamily conf =
      MetricFamily::conformal_rescale(MetricFamily::minkowski(3), scalar_constant(3, 2.0));
  ChristoffelData cc = conf.christoffel({0.0, 0.5, 0.5});
  for (int i = 0; i < 3; ++i) CHECK(max_abs(cc.gamma[i]) <= 1e-14);

  // oracle comparison across families and random points
  Rng rng(101);
  for (const auto& fam : builtin_families()) {
    for (int rep = 0; rep < 5; ++rep) {
      Vecd x = sample_point(fam, rng);
      ChristoffelData got = fam.christoffel(x);
      ChristoffelData want = oracles::fd_koszul(fam, x);
      double scale = 1.0;
      for (int i = 0; i < fam.dim(); ++i) scale = std::max(scale, max_abs(want.gamma[i]));
      for (int i = 0; i < fam.dim(); ++i)
        CHECK(max_abs(got.gamma[i] - want.gamma[i]) <= 1e-6 * scale);
    }
  }
}

TEST_CASE("christoffel symmetry is exact") {
  Rng rng(55);
  for (const auto& fam : builtin_families()) {
    Vecd x = sample_point(fam, rng);
    ChristoffelData ch = fam.christoffel(x);
    for (int i = 0; i < fam.dim(); ++i)
      for (int j = 0; j < fam.dim(); ++j)
        for (int k = 0; k < fam.dim(); ++k)
          CHECK(ch.gamma[i](j, k) == ch.gamma[i](k, j));
  }
}

TEST_CASE("curvature closed forms and the finite-difference oracle") {
  MetricFamily mink = MetricFamily::minkowski(3);
  CurvatureData cm = mink.curvature({0.0, 0.2, 0.4});
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(max_abs(cm.riemann[i][j]) == 0.0);

  MetricFamily flat = MetricFamily::flat_euclidean(2);
  CurvatureData cf = flat.curvature({1.0, 1.0});
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(max_abs(cf.riemann[i][j]) == 0.0);

  // unit sphere sectional curvature at the equator point
  MetricFamily sph = MetricFamily::round_sphere_chart();
  Vecd x{kPi / 2.0, 0.0};
  CurvatureData cs = sph.curvature(x);
  Mat g = sph.eval(x);
  double r_lowered = g(0, 0) * cs.riemann[0][1](0, 1);  // R_{theta phi theta phi}
  double denom = g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1);
  CHECK(r_lowered / denom == doctest::Approx(1.0).epsilon(1e-10));

  // against finite differences of the Christoffels
  Rng rng(77);
  for (const auto& fam : builtin_families()) {
    Vecd y = sample_point(fam, rng);
    CurvatureData got = fam.curvature(y);
    int n = fam.dim();
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) scale = std::max(scale, max_abs(got.riemann[i][j]));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            double want = oracles::fd_curvature_entry(fam, y, i, j, k, l);
            CHECK(std::abs(got.riemann[i][j](k, l) - want) <= 1e-5 * scale);
          }
  }
}

TEST_CASE("analytic derivatives match central differences across families") {
  Rng rng(303);
  for (const auto& fam : builtin_families()) {
    int n = fam.dim();
    for (int rep = 0; rep < 100; ++rep) {
      Vecd x = sample_point(fam, rng);
      std::vector<Mat> dg;
      std::vector<std::vector<Mat>> d2g;
      fam.derivatives(x, 2, dg, &d2g);
      double scale1 = 1.0, scale2 = 1.0;
      for (int k = 0; k < n; ++k) scale1 = std::max(scale1, max_abs(dg[k]));
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) scale2 = std::max(scale2, max_abs(d2g[k][l]));
      for (int k = 0; k < n; ++k) {
        Mat fd = oracles::fd_metric_deriv(fam, x, k);
        CHECK(max_abs(dg[k] - fd) <= 1e-6 * scale1);
      }
      // second derivatives on a subsample (the full loop is expensive)
      if (rep % 10 == 0)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            Mat fd = oracles::fd_metric_deriv2(fam, x, k, l);
            CHECK(max_abs(d2g[l][k] - fd) <= 1e-4 * scale2);
          }
    }
  }
}

TEST_CASE("metric_index values and constancy over the domain") {
  Rng rng(909);
  CHECK(MetricFamily::flat_euclidean(3).metric_index({0.0, 0.0, 0.0}) == 0);
  CHECK(MetricFamily::minkowski(4).metric_index({0.0, 0.0, 0.0, 0.0}) == 1);

  AlphaBetaPair pair;
  pair.sigma_dim = 2;
  pair.alpha_kind = AlphaBetaPair::AlphaKind::OnePlusDist2;
  pair.alpha_params = {1.0};
  pair.beta_kind = AlphaBetaPair::BetaKind::OnePlusS2;
  pair.beta_params = {1.0};
  pair.base_point = {0.0, 0.0};
  pair.sigma_box = {{-3.0, -3.0}, {3.0, 3.0}};
  MetricFamily gab = build_galphabeta(pair);
  for (int rep = 0; rep < 100; ++rep) {
    Vecd x = sample_point(gab, rng);
    CHECK(gab.metric_index(x) == 1);
  }

  for (const auto& fam : builtin_families()) {
    int idx0 = fam.metric_index(sample_point(fam, rng));
    for (int rep = 0; rep < 100; ++rep)
      CHECK(fam.metric_index(sample_point(fam, rng)) == idx0);
  }
}

TEST_CASE("lowered curvature antisymmetries") {
  Rng rng(404);
  for (const auto& fam : builtin_families()) {
    int n = fam.dim();
    Vecd x = sample_point(fam, rng);
    CurvatureData cu = fam.curvature(x);
    Mat g = fam.eval(x);
    // R_{ijkl} = g_{ia} R^a_{jkl}
    auto lowered = [&](int i, int j, int k, int l) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) s += g(i, a) * cu.riemann[a][j](k, l);
      return s;
    };
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) scale = std::max(scale, std::abs(lowered(i, j, k, l)));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            CHECK(std::abs(lowered(i, j, k, l) + lowered(i, j, l, k)) <= 1e-8 * scale);
            CHECK(std::abs(lowered(i, j, k, l) + lowered(j, i, k, l)) <= 1e-8 * scale);
          }
  }
}

TEST_CASE("degenerate metrics are rejected") {
  // conformal factor crossing zero makes the metric degenerate
  MetricFamily bad = MetricFamily::conformal_rescale(
      MetricFamily::flat_euclidean(2), scalar_quadratic(0.0, {1.0, 1.0}, {0.0, 0.0}));
  CHECK_THROWS_AS((void)bad.christoffel({1e-8, 0.0}), Error);
  try {
    (void)bad.christoffel({1e-8, 0.0});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateMetric);
  }
}
