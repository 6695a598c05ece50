#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "neflab/domain.hpp"
#include "neflab/polynomial.hpp"

namespace neflab {

// Duality bracket <theta, x>.
inline double pairing(const Vec& theta, const Vec& x) {
  require(theta.size() == x.size(), "pairing: dimension mismatch");
  return theta.dot(x);
}

namespace fd {

// Central differences with one Richardson extrapolation level.
inline double step(double x) {
  static const double h0 = std::cbrt(std::numeric_limits<double>::epsilon());
  return h0 * std::max(1.0, std::fabs(x));
}

inline Vec gradient(const std::function<double(const Vec&)>& f, const Vec& x) {
  int n = static_cast<int>(x.size());
  Vec g(n);
  for (int i = 0; i < n; ++i) {
    double h = step(x(i));
    auto diff = [&](double hh) {
      Vec a = x, b = x;
      a(i) += hh;
      b(i) -= hh;
      return (f(a) - f(b)) / (2 * hh);
    };
    double d1 = diff(h), d2 = diff(h / 2);
    g(i) = (4 * d2 - d1) / 3;
  }
  return g;
}

inline Mat jacobian(const std::function<Vec(const Vec&)>& f, const Vec& x,
                    double hscale = 1e-5) {
  int n = static_cast<int>(x.size());
  Mat j(f(x).size(), n);
  for (int i = 0; i < n; ++i) {
    double h = hscale * std::max(1.0, std::fabs(x(i)));
    Vec a = x, b = x;
    a(i) += h;
    b(i) -= h;
    j.col(i) = (f(a) - f(b)) / (2 * h);
  }
  return j;
}

}  // namespace fd

// Cumulant function k on its open parameter domain, with derivatives.
// Families loaded without closed-form derivatives fall back to central
// differences.
struct CumulantFamily {
  int dim = 0;
  Domain theta_domain;
  std::function<double(const Vec&)> k;
  std::function<Vec(const Vec&)> grad;   // may be empty
  std::function<Mat(const Vec&)> hess;   // may be empty
  bool closed_form = true;

  Vec grad_at(const Vec& theta) const {
    if (grad) return grad(theta);
    return fd::gradient(k, theta);
  }

  Mat hess_at(const Vec& theta) const {
    if (hess) return hess(theta);
    auto g = [this](const Vec& t) { return grad_at(t); };
    Mat h = fd::jacobian(g, theta, fd::step(0.0));
    return 0.5 * (h + h.transpose());
  }
};

// Symmetric matrix-valued polynomial variance model on a mean domain.
// Entries may instead be given by a numeric-only evaluator when V is not
// polynomial.
class VarianceModel {
 public:
  VarianceModel() = default;

  VarianceModel(int dim, Domain mean_domain, PolyMat entries)
      : dim_(dim), mean_domain_(std::move(mean_domain)), poly_(std::move(entries)) {
    validate_poly();
  }

  VarianceModel(int dim, Domain mean_domain,
                std::function<Mat(const Vec&)> numeric)
      : dim_(dim),
        mean_domain_(std::move(mean_domain)),
        numeric_(std::move(numeric)) {}

  static VarianceModel scalar(Domain mean_domain, Poly v) {
    PolyMat m(1, 1, 1);
    m.at(0, 0) = std::move(v);
    return VarianceModel(1, std::move(mean_domain), std::move(m));
  }

  int dim() const { return dim_; }
  const Domain& mean_domain() const { return mean_domain_; }
  Domain& mean_domain() { return mean_domain_; }
  bool has_poly() const { return poly_.has_value(); }
  const PolyMat& poly() const { return *poly_; }

  Mat at(const Vec& m) const {
    if (poly_) return poly_->eval(m);
    return numeric_(m);
  }

  // dV/dm_i, exact for polynomial entries, finite differences otherwise.
  Mat partial(int var, const Vec& m) const {
    if (poly_) {
      Mat out(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
          out(i, j) = poly_->at(i, j).partial(var).eval(m);
      return out;
    }
    double h = 1e-6 * std::max(1.0, std::fabs(m(var)));
    Vec a = m, b = m;
    a(var) += h;
    b(var) -= h;
    return (numeric_(a) - numeric_(b)) / (2 * h);
  }

 private:
  void validate_poly() {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j) {
        if (poly_->at(i, j).degree() > 3)
          throw ValidationError("variance entry degree exceeds 3");
        Poly diff = poly_->at(i, j) - poly_->at(j, i);
        if (diff.max_abs_coeff() > 1e-10 *
                std::max(1.0, poly_->at(i, j).max_abs_coeff()))
          throw ValidationError("variance model is not symmetric");
      }
  }

  int dim_ = 0;
  Domain mean_domain_;
  std::optional<PolyMat> poly_;
  std::function<Mat(const Vec&)> numeric_;
};

struct Provenance {
  std::string base;          // name of the family this one was derived from
  std::optional<Vec> beta;   // cubic-transform covector, when applicable
  std::optional<double> power;
  std::string note;
};

// A NEF given by a cumulant family and/or a variance model.  When the
// inverse mean map has a cheap closed or semi-closed form (catalog
// products, cubic transforms, variance-only 1-D reconstructions) it is
// attached here so downstream grids avoid a nested solve.
struct FamilyDescriptor {
  std::string name;
  int dim = 0;
  std::optional<CumulantFamily> cumulant;
  std::optional<VarianceModel> variance;
  std::function<Vec(const Vec&)> psi_direct;      // optional
  std::function<double(const Vec&)> kpsi_direct;  // optional
  Provenance provenance;
  // Serialization recipe, when the family came from the catalog.
  std::string catalog_kind;
  std::map<std::string, double> catalog_params;

  const Domain& mean_domain() const {
    require(variance.has_value(), "family has no variance model");
    return variance->mean_domain();
  }
};

// Affine image phi(x) = a x + b of a family:
// V_new(m) = a V(a^{-1}(m-b)) a^T, k_new(theta) = k(a^T theta) + <theta,b>.
inline FamilyDescriptor affine_image(const FamilyDescriptor& fam, const Mat& a,
                                     const Vec& b) {
  require(fam.cumulant || fam.variance, "affine_image: empty descriptor");
  int n = fam.dim;
  require(a.rows() == n && a.cols() == n && b.size() == n,
          "affine_image: shape mismatch");
  Eigen::FullPivLU<Mat> lu(a);
  require(lu.isInvertible(), "affine_image: singular linear part");
  Mat ainv = lu.inverse();

  FamilyDescriptor out;
  out.name = fam.name + "#affine";
  out.dim = n;
  out.provenance.base = fam.name;
  out.provenance.note = "affine image";

  if (fam.variance) {
    const auto& vm = *fam.variance;
    // Mean domain phi(M_F): box mapped through corners, membership via
    // the preimage.
    Domain md = vm.mean_domain();
    Vec lo = vm.mean_domain().box_lo(), hi = vm.mean_domain().box_hi();
    Vec nlo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec nhi = -nlo;
    for (int corner = 0; corner < (1 << n); ++corner) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = (corner >> i) & 1 ? hi(i) : lo(i);
      Vec y = a * x + b;
      nlo = nlo.cwiseMin(y);
      nhi = nhi.cwiseMax(y);
    }
    Domain base_md = vm.mean_domain();
    Domain newdom = Domain::box(nlo, nhi);
    newdom.set_predicate([base_md, ainv, b](const Vec& m) {
      return base_md.contains(ainv * (m - b));
    });
    if (vm.has_poly()) {
      PolyMat pm(n, n, n);
      // substitute m -> ainv (m - b), then sandwich with a.
      PolyMat inner(n, n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          inner.at(i, j) = vm.poly().at(i, j).compose_affine(ainv, -ainv * b);
      PolyMat amat(n, n, n), at(n, n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          amat.at(i, j) = Poly::constant(n, a(i, j));
          at.at(i, j) = Poly::constant(n, a(j, i));
        }
      pm = amat * inner * at;
      out.variance = VarianceModel(n, newdom, pm);
    } else {
      auto base = vm;
      out.variance = VarianceModel(
          n, newdom, [base, a, ainv, b](const Vec& m) {
            return Mat(a * base.at(ainv * (m - b)) * a.transpose());
          });
    }
  }

  if (fam.cumulant) {
    const auto& cf = *fam.cumulant;
    CumulantFamily nc;
    nc.dim = n;
    nc.closed_form = cf.closed_form;
    // Theta domain {theta : a^T theta in Theta}; box from the linear
    // image of the old box under a^{-T}.
    Mat aTinv = a.transpose().inverse();
    Vec lo = cf.theta_domain.box_lo(), hi = cf.theta_domain.box_hi();
    Vec nlo = Vec::Constant(n, std::numeric_limits<double>::infinity());
    Vec nhi = -nlo;
    for (int corner = 0; corner < (1 << n); ++corner) {
      Vec x(n);
      for (int i = 0; i < n; ++i) x(i) = (corner >> i) & 1 ? hi(i) : lo(i);
      Vec y = aTinv * x;
      nlo = nlo.cwiseMin(y);
      nhi = nhi.cwiseMax(y);
    }
    Domain td = Domain::box(nlo, nhi);
    Domain base_td = cf.theta_domain;
    Mat aT = a.transpose();
    td.set_predicate(
        [base_td, aT](const Vec& t) { return base_td.contains(aT * t); });
    nc.theta_domain = td;
    nc.k = [cf, aT, b](const Vec& t) { return cf.k(aT * t) + t.dot(b); };
    nc.grad = [cf, aT, a, b](const Vec& t) {
      return Vec(a * cf.grad_at(aT * t) + b);
    };
    nc.hess = [cf, aT, a](const Vec& t) {
      return Mat(a * cf.hess_at(aT * t) * a.transpose());
    };
    out.cumulant = nc;
  }
  return out;
}

// Jorgensen power: k_lambda = lambda k on the same Theta,
// V_lambda(m) = lambda V(m / lambda).
inline FamilyDescriptor jorgensen_power(const FamilyDescriptor& fam, double lam) {
  require(lam > 0.0, "jorgensen_power: lambda must be positive");
  int n = fam.dim;
  FamilyDescriptor out;
  out.name = fam.name + "#power";
  out.dim = n;
  out.provenance.base = fam.name;
  out.provenance.power = lam;

  if (fam.variance) {
    const auto& vm = *fam.variance;
    Domain base_md = vm.mean_domain();
    Domain nd = Domain::box(lam * vm.mean_domain().box_lo(),
                            lam * vm.mean_domain().box_hi());
    nd.set_predicate(
        [base_md, lam](const Vec& m) { return base_md.contains(m / lam); });
    if (vm.has_poly()) {
      PolyMat pm(n, n, n);
      Mat scale = Mat::Identity(n, n) / lam;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          pm.at(i, j) =
              lam * vm.poly().at(i, j).compose_affine(scale, Vec::Zero(n));
      out.variance = VarianceModel(n, nd, pm);
    } else {
      auto base = vm;
      out.variance = VarianceModel(n, nd, [base, lam](const Vec& m) {
        return Mat(lam * base.at(m / lam));
      });
    }
  }
  if (fam.cumulant) {
    const auto& cf = *fam.cumulant;
    CumulantFamily nc;
    nc.dim = n;
    nc.closed_form = cf.closed_form;
    nc.theta_domain = cf.theta_domain;
    nc.k = [cf, lam](const Vec& t) { return lam * cf.k(t); };
    nc.grad = [cf, lam](const Vec& t) { return Vec(lam * cf.grad_at(t)); };
    nc.hess = [cf, lam](const Vec& t) { return Mat(lam * cf.hess_at(t)); };
    out.cumulant = nc;
  }
  return out;
}

}  // namespace neflab
