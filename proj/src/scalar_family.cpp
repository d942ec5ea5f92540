#include "geovar/scalar_family.hpp"

#include <cmath>
#include <utility>

#include "geovar/errors.hpp"
#include "geovar/spline.hpp"

namespace geovar {

namespace {

class ConstantScalar final : public ScalarFamily {
public:
  ConstantScalar(int dim, double c) : dim_(dim), c_(c) {}
  int dim() const override { return dim_; }
  double value(const Vecd&) const override { return c_; }
  Vecd grad(const Vecd&) const override { return Vecd(dim_, 0.0); }
  Mat hess(const Vecd&) const override { return Mat(dim_, dim_, 0.0); }

private:
  int dim_;
  double c_;
};

class QuadraticScalar final : public ScalarFamily {
public:
  QuadraticScalar(double c0, Vecd a, Vecd p) : c0_(c0), a_(std::move(a)), p_(std::move(p)) {}
  int dim() const override { return static_cast<int>(a_.size()); }
  double value(const Vecd& x) const override {
    double v = c0_;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      double d = x[i] - p_[i];
      v += a_[i] * d * d;
    }
    return v;
  }
  Vecd grad(const Vecd& x) const override {
    Vecd g(a_.size());
    for (std::size_t i = 0; i < a_.size(); ++i) g[i] = 2.0 * a_[i] * (x[i] - p_[i]);
    return g;
  }
  Mat hess(const Vecd&) const override {
    Mat h(a_.size(), a_.size(), 0.0);
    for (std::size_t i = 0; i < a_.size(); ++i) h(i, i) = 2.0 * a_[i];
    return h;
  }

private:
  double c0_;
  Vecd a_, p_;
};

class CosineScalar final : public ScalarFamily {
public:
  CosineScalar(int dim, double c0, double amp, int axis, double freq, double phase)
      : dim_(dim), c0_(c0), amp_(amp), axis_(axis), freq_(freq), phase_(phase) {}
  int dim() const override { return dim_; }
  double value(const Vecd& x) const override {
    return c0_ + amp_ * std::cos(freq_ * x[axis_] + phase_);
  }
  Vecd grad(const Vecd& x) const override {
    Vecd g(dim_, 0.0);
    g[axis_] = -amp_ * freq_ * std::sin(freq_ * x[axis_] + phase_);
    return g;
  }
  Mat hess(const Vecd& x) const override {
    Mat h(dim_, dim_, 0.0);
    h(axis_, axis_) = -amp_ * freq_ * freq_ * std::cos(freq_ * x[axis_] + phase_);
    return h;
  }

private:
  int dim_;
  double c0_, amp_;
  int axis_;
  double freq_, phase_;
};

class ExpDist2Scalar final : public ScalarFamily {
public:
  explicit ExpDist2Scalar(Vecd p) : p_(std::move(p)) {}
  int dim() const override { return static_cast<int>(p_.size()); }
  double value(const Vecd& x) const override { return std::exp(dist2(x)); }
  Vecd grad(const Vecd& x) const override {
    double e = std::exp(dist2(x));
    Vecd g(p_.size());
    for (std::size_t i = 0; i < p_.size(); ++i) g[i] = 2.0 * (x[i] - p_[i]) * e;
    return g;
  }
  Mat hess(const Vecd& x) const override {
    double e = std::exp(dist2(x));
    std::size_t n = p_.size();
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        h(i, j) = 4.0 * (x[i] - p_[i]) * (x[j] - p_[j]) * e;
        if (i == j) h(i, j) += 2.0 * e;
      }
    return h;
  }

private:
  double dist2(const Vecd& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) s += (x[i] - p_[i]) * (x[i] - p_[i]);
    return s;
  }
  Vecd p_;
};

// C^2 window: product over axes of plateau(((x_i-p_i)/r_i)^2)
class WindowedPolyScalar final : public ScalarFamily {
public:
  WindowedPolyScalar(Vecd p, Vecd radii, double c0, Vecd b, Mat q)
      : p_(std::move(p)), r_(std::move(radii)), c0_(c0), b_(std::move(b)), q_(std::move(q)) {}
  int dim() const override { return static_cast<int>(p_.size()); }

  double value(const Vecd& x) const override {
    return poly(x) * window(x);
  }

  Vecd grad(const Vecd& x) const override {
    std::size_t n = p_.size();
    double pv = poly(x), wv = window(x);
    Vecd pg = poly_grad(x), wg = window_grad(x);
    Vecd g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = pg[i] * wv + pv * wg[i];
    return g;
  }

  Mat hess(const Vecd& x) const override {
    std::size_t n = p_.size();
    double pv = poly(x), wv = window(x);
    Vecd pg = poly_grad(x), wg = window_grad(x);
    Mat ph = poly_hess(), wh = window_hess(x);
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        h(i, j) = ph(i, j) * wv + pg[i] * wg[j] + pg[j] * wg[i] + pv * wh(i, j);
    return h;
  }

private:
  double poly(const Vecd& x) const {
    std::size_t n = p_.size();
    double v = c0_;
    for (std::size_t i = 0; i < n; ++i) {
      double di = x[i] - p_[i];
      v += b_[i] * di;
      for (std::size_t j = 0; j < n; ++j) v += q_(i, j) * di * (x[j] - p_[j]);
    }
    return v;
  }
  Vecd poly_grad(const Vecd& x) const {
    std::size_t n = p_.size();
    Vecd g(n);
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = b_[i];
      for (std::size_t j = 0; j < n; ++j) g[i] += (q_(i, j) + q_(j, i)) * (x[j] - p_[j]);
    }
    return g;
  }
  Mat poly_hess() const {
    std::size_t n = p_.size();
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h(i, j) = q_(i, j) + q_(j, i);
    return h;
  }

  // per-axis factors and their derivatives
  void axis_factor(const Vecd& x, std::size_t i, double& f, double& df, double& ddf) const {
    PlateauCutoff cut;
    double u = (x[i] - p_[i]) / r_[i];
    double z = u * u;
    double dz = 2.0 * u / r_[i];
    double ddz = 2.0 / (r_[i] * r_[i]);
    f = cut.value(z);
    df = cut.deriv(z) * dz;
    ddf = cut.deriv2(z) * dz * dz + cut.deriv(z) * ddz;
  }
  double window(const Vecd& x) const {
    double w = 1.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
      double f, df, ddf;
      axis_factor(x, i, f, df, ddf);
      w *= f;
    }
    return w;
  }
  Vecd window_grad(const Vecd& x) const {
    std::size_t n = p_.size();
    Vecd f(n), df(n);
    double dd;
    for (std::size_t i = 0; i < n; ++i) axis_factor(x, i, f[i], df[i], dd);
    Vecd g(n);
    for (std::size_t i = 0; i < n; ++i) {
      double prod = df[i];
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) prod *= f[j];
      g[i] = prod;
    }
    return g;
  }
  Mat window_hess(const Vecd& x) const {
    std::size_t n = p_.size();
    Vecd f(n), df(n), ddf(n);
    for (std::size_t i = 0; i < n; ++i) axis_factor(x, i, f[i], df[i], ddf[i]);
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double prod = (i == j) ? ddf[i] : df[i] * df[j];
        for (std::size_t k = 0; k < n; ++k)
          if (k != i && k != j) prod *= f[k];
        h(i, j) = prod;
      }
    return h;
  }

  Vecd p_, r_;
  double c0_;
  Vecd b_;
  Mat q_;
};

class ProductScalar final : public ScalarFamily {
public:
  ProductScalar(ScalarPtr a, ScalarPtr b) : a_(std::move(a)), b_(std::move(b)) {}
  int dim() const override { return a_->dim(); }
  double value(const Vecd& x) const override { return a_->value(x) * b_->value(x); }
  Vecd grad(const Vecd& x) const override {
    double av = a_->value(x), bv = b_->value(x);
    Vecd ag = a_->grad(x), bg = b_->grad(x);
    Vecd g(ag.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = ag[i] * bv + av * bg[i];
    return g;
  }
  Mat hess(const Vecd& x) const override {
    double av = a_->value(x), bv = b_->value(x);
    Vecd ag = a_->grad(x), bg = b_->grad(x);
    Mat ah = a_->hess(x), bh = b_->hess(x);
    std::size_t n = ag.size();
    Mat h(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        h(i, j) = ah(i, j) * bv + ag[i] * bg[j] + ag[j] * bg[i] + av * bh(i, j);
    return h;
  }

private:
  ScalarPtr a_, b_;
};

class LinCombScalar final : public ScalarFamily {
public:
  LinCombScalar(ScalarPtr a, double s, ScalarPtr b) : a_(std::move(a)), s_(s), b_(std::move(b)) {}
  int dim() const override { return a_->dim(); }
  double value(const Vecd& x) const override { return a_->value(x) + s_ * b_->value(x); }
  Vecd grad(const Vecd& x) const override {
    Vecd g = a_->grad(x);
    Vecd gb = b_->grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += s_ * gb[i];
    return g;
  }
  Mat hess(const Vecd& x) const override {
    Mat h = a_->hess(x);
    Mat hb = b_->hess(x);
    hb *= s_;
    h += hb;
    return h;
  }

private:
  ScalarPtr a_;
  double s_;
  ScalarPtr b_;
};

}  // namespace

ScalarPtr scalar_constant(int dim, double c) { return std::make_shared<ConstantScalar>(dim, c); }

ScalarPtr scalar_quadratic(double c0, Vecd a, Vecd p) {
  return std::make_shared<QuadraticScalar>(c0, std::move(a), std::move(p));
}

ScalarPtr scalar_cosine(int dim, double c0, double amp, int axis, double freq, double phase) {
  return std::make_shared<CosineScalar>(dim, c0, amp, axis, freq, phase);
}

ScalarPtr scalar_exp_dist2(Vecd p) { return std::make_shared<ExpDist2Scalar>(std::move(p)); }

ScalarPtr scalar_windowed_poly(Vecd p, Vecd radii, double c0, Vecd b, Mat q) {
  return std::make_shared<WindowedPolyScalar>(std::move(p), std::move(radii), c0, std::move(b),
                                              std::move(q));
}

ScalarPtr scalar_product(ScalarPtr a, ScalarPtr b) {
  return std::make_shared<ProductScalar>(std::move(a), std::move(b));
}

ScalarPtr scalar_linear_comb(ScalarPtr a, double s, ScalarPtr b) {
  return std::make_shared<LinCombScalar>(std::move(a), s, std::move(b));
}

}  // namespace geovar
