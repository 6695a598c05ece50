#pragma once

#include <cmath>
#include <utility>

#include "neflab/legendre.hpp"

namespace neflab {

struct CubicConstructionParams {
  Vec beta;
  double k0 = 0.0;
  Vec lambda0;

  CubicConstructionParams() = default;
  explicit CubicConstructionParams(Vec b, double k0_ = 0.0,
                                   std::optional<Vec> l0 = std::nullopt)
      : beta(std::move(b)), k0(k0_) {
    require(beta.lpNorm<Eigen::Infinity>() > 0.0, "beta must be nonzero");
    lambda0 = l0 ? *l0 : Vec::Zero(beta.size());
  }

  // Constants of the inverse relation.
  double k1() const { return -k0; }
  Vec theta1() const { return Vec(-lambda0 - beta * k0); }
};

// (M)_beta = { m in M-image : 1 + <beta,m> > 0 and m/(1+<beta,m>) in M }.
// The working box comes from mapping a sample of M forward.
inline Domain domain_beta(const Domain& M, const Vec& beta) {
  require(beta.lpNorm<Eigen::Infinity>() > 0.0, "domain_beta: beta is zero");
  int n = M.dimension();
  // Image of M under M' -> M'/(1 - <beta,M'>), the inverse of
  // m -> m/(1 + <beta,m>).
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  int found = 0;
  int per_axis = n == 1 ? 801 : 101;
  for (const Vec& mp : M.grid(per_axis, 0.01)) {
    double u = 1.0 - beta.dot(mp);
    if (u <= 1e-6) continue;
    Vec m = mp / u;
    if (m.lpNorm<Eigen::Infinity>() > 100.0) continue;  // cap the window
    lo = lo.cwiseMin(m);
    hi = hi.cwiseMax(m);
    ++found;
  }
  Domain d;
  if (found == 0) {
    // Empty on the sample: callers treat this as a warning case.
    d = Domain::box(Vec::Zero(n), Vec::Zero(n));
  } else {
    d = Domain::box(lo, hi);
  }
  d.add_halfspace(beta, 1.0);  // 1 + <beta,m> > 0
  Domain base = M;
  Vec b = beta;
  d.set_predicate([base, b](const Vec& m) {
    double s = 1.0 + b.dot(m);
    if (s <= 0.0) return false;
    return base.contains(m / s);
  });
  return d;
}

namespace detail {

// (1 + s)^pow * V(m / (1 + s)) with s = <beta,m>, expanded as a polynomial
// matrix; pow must be at least the max entry degree.
inline PolyMat twist_numerator(const PolyMat& V, const Vec& beta, int pow) {
  int n = V.rows();
  Poly affine = Poly::constant(n, 1.0) + Poly::linear_form(beta);
  PolyMat out(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Poly acc(n);
      for (const auto& [e, c] : V.at(i, j).terms()) {
        int total = 0;
        for (int x : e) total += x;
        Poly term(n);
        term.add_term(e, c);
        acc += term * affine.pow(pow - total);
      }
      out.at(i, j) = acc;
    }
  return out;
}

}  // namespace detail

// Eq-level cubic construction at the variance level:
// V(m) = (1+<b,m>) (I + m(x)b) V1(m/(1+<b,m>)) (I + b(x)m), expanded
// exactly (the rational composition clears because deg V1 <= 2).
inline VarianceModel forward_variance(const VarianceModel& V1, const Vec& beta) {
  require(beta.lpNorm<Eigen::Infinity>() > 0.0, "forward_variance: beta is zero");
  require(V1.has_poly(), "forward_variance: polynomial variance required");
  int n = V1.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      require(V1.poly().at(i, j).degree() <= 2,
              "forward_variance: base variance degree exceeds 2");

  // numerator = (I + m(x)beta) W (I + beta(x)m) with
  // W = (1+s)^2 V1(m/(1+s)); the product carries one spare factor (1+s).
  PolyMat W = detail::twist_numerator(V1.poly(), beta, 2);
  PolyMat left = PolyMat::identity(n, n);
  PolyMat right = PolyMat::identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (beta(j) != 0.0) left.at(i, j) += beta(j) * Poly::variable(n, i);
      if (beta(i) != 0.0) right.at(i, j) += beta(i) * Poly::variable(n, j);
    }
  PolyMat num = left * W * right;

  PolyMat out(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rem = 0.0;
      out.at(i, j) = divide_affine(num.at(i, j), 1.0, beta, &rem);
      if (rem > 1e-9 * std::max(1.0, num.at(i, j).max_abs_coeff()))
        throw SingularityError("forward_variance: inexact affine division");
      require(out.at(i, j).degree() <= 3, "forward_variance: degree overflow");
    }
  return VarianceModel(n, domain_beta(V1.mean_domain(), beta), out);
}

// Inverse relation: V1(M) = (1-<b,M>) (I - M(x)b) V(M/(1-<b,M>)) (I - b(x)M).
inline VarianceModel inverse_variance(const VarianceModel& V, const Vec& beta) {
  require(beta.lpNorm<Eigen::Infinity>() > 0.0, "inverse_variance: beta is zero");
  require(V.has_poly(), "inverse_variance: polynomial variance required");
  int n = V.dim();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      require(V.poly().at(i, j).degree() <= 3,
              "inverse_variance: variance degree exceeds 3");

  Vec nbeta = -beta;
  PolyMat W = detail::twist_numerator(V.poly(), nbeta, 3);
  PolyMat left = PolyMat::identity(n, n);
  PolyMat right = PolyMat::identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (beta(j) != 0.0) left.at(i, j) -= beta(j) * Poly::variable(n, i);
      if (beta(i) != 0.0) right.at(i, j) -= beta(i) * Poly::variable(n, j);
    }
  PolyMat num = left * W * right;  // = (1-s)^2 * V1, degree <= 5

  PolyMat out(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double rem = 0.0;
      Poly once = divide_affine(num.at(i, j), 1.0, nbeta, &rem);
      double scale = std::max(1.0, num.at(i, j).max_abs_coeff());
      if (rem > 1e-9 * scale)
        throw SingularityError("inverse_variance: inexact affine division");
      out.at(i, j) = divide_affine(once, 1.0, nbeta, &rem);
      if (rem > 1e-9 * scale)
        throw SingularityError("inverse_variance: inexact affine division");
    }
  return VarianceModel(n, domain_beta(V.mean_domain(), nbeta), out);
}

struct CumulantEval {
  double k;
  Vec grad;
  Mat hess;
  Vec base_theta;  // the solved base parameter
};

// Cumulant of the transformed family at lambda, through the implicit map
// lambda = -beta k_nu(theta) + theta - lambda0.  Derivatives follow from
// the implicit-function rule; with g = k'_nu(theta), u = 1 - <beta,g>:
//   grad = g / u,
//   hess = (1/u) (I + g beta^T / u) k''_nu (I + beta g^T / u).
inline CumulantEval transformed_cumulant_eval(const CumulantFamily& base,
                                              const CubicConstructionParams& p,
                                              const Vec& lam,
                                              const NewtonConfig& cfg = {}) {
  int n = base.dim;
  auto G = [&](const Vec& t) {
    return Vec(t - p.beta * base.k(t) - p.lambda0 - lam);
  };
  Vec theta;
  if (cfg.init) {
    theta = *cfg.init;
  } else {
    // The implicit Jacobian I - beta g^T degenerates where
    // u = 1 - <beta,k'> hits zero; start on the u > 0 branch, at the
    // feasible sample closest to the target.
    theta = base.theta_domain.center();
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (const Vec& t : base.theta_domain.grid(n == 1 ? 33 : 9, 0.02)) {
      if (1.0 - p.beta.dot(base.grad_at(t)) <= 1e-8) continue;
      double r = G(t).lpNorm<Eigen::Infinity>();
      if (r < best) {
        best = r;
        theta = t;
        found = true;
      }
    }
    if (!found)
      throw SingularityError("no feasible starting point on the u > 0 branch");
  }
  if (!base.theta_domain.contains(theta))
    throw DomainEscapeError("initial base iterate outside domain");
  Vec r = G(theta);
  double rn = r.lpNorm<Eigen::Infinity>();
  bool done = rn <= cfg.tol;
  for (int it = 0; it < cfg.max_iters && !done; ++it) {
    Vec g = base.grad_at(theta);
    Mat J = Mat::Identity(n, n) - p.beta * g.transpose();
    if (std::fabs(J.determinant()) < 1e-13)
      throw SingularityError("implicit Jacobian singular at the current iterate");
    Vec step = J.fullPivLu().solve(-r);
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      Vec cand = theta + t * step;
      if (base.theta_domain.contains(cand)) {
        Vec rc = G(cand);
        double rcn = rc.lpNorm<Eigen::Infinity>();
        if (rcn < rn) {
          theta = cand;
          r = rc;
          rn = rcn;
          moved = true;
          break;
        }
      }
      t *= cfg.damping;
    }
    if (!moved) break;
    done = rn <= cfg.tol;
  }
  if (!done) throw ConvergenceError("implicit cumulant solve failed", theta, rn);

  Vec g = base.grad_at(theta);
  double u = 1.0 - p.beta.dot(g);
  if (std::fabs(u) < 1e-12)
    throw SingularityError("implicit Jacobian singular at the solution");
  Mat H = base.hess_at(theta);
  Mat B = Mat::Identity(n, n) + g * p.beta.transpose() / u;
  CumulantEval out;
  out.k = base.k(theta) - p.k0;
  out.grad = g / u;
  out.hess = (B * H * B.transpose()) / u;
  out.base_theta = theta;
  return out;
}

// Full descriptor of the transformed family: exact cubic variance
// polynomial plus a cumulant evaluator and a direct inverse mean map
// through the base family.
inline FamilyDescriptor cubic_transform(const FamilyDescriptor& base,
                                        const Vec& beta, double k0 = 0.0,
                                        std::optional<Vec> lambda0 = std::nullopt) {
  require(base.cumulant && base.variance, "cubic_transform: full descriptor needed");
  CubicConstructionParams p(beta, k0, lambda0);
  int n = base.dim;

  FamilyDescriptor out;
  out.name = base.name + "#cubic";
  out.dim = n;
  out.provenance.base = base.name;
  out.provenance.beta = beta;
  out.variance = forward_variance(*base.variance, beta);

  // Lambda-domain: the image of {u > 0} under theta -> -beta k + theta - l0.
  CumulantFamily basecf = *base.cumulant;
  Vec lo = Vec::Constant(n, std::numeric_limits<double>::infinity());
  Vec hi = -lo;
  int per_axis = n == 1 ? 401 : 51;
  for (const Vec& t : basecf.theta_domain.grid(per_axis, 0.02)) {
    double u = 1.0 - beta.dot(basecf.grad_at(t));
    if (u <= 1e-6) continue;
    Vec lam = t - beta * basecf.k(t) - p.lambda0;
    if (lam.lpNorm<Eigen::Infinity>() > 100.0) continue;
    lo = lo.cwiseMin(lam);
    hi = hi.cwiseMax(lam);
  }
  Domain td = Domain::box(lo, hi);
  td.set_predicate([basecf, p](const Vec& lam) {
    try {
      transformed_cumulant_eval(basecf, p, lam);
      return true;
    } catch (const std::exception&) {
      return false;
    }
  });

  CumulantFamily cf;
  cf.dim = n;
  cf.closed_form = true;
  cf.theta_domain = td;
  cf.k = [basecf, p](const Vec& lam) {
    return transformed_cumulant_eval(basecf, p, lam).k;
  };
  cf.grad = [basecf, p](const Vec& lam) {
    return transformed_cumulant_eval(basecf, p, lam).grad;
  };
  cf.hess = [basecf, p](const Vec& lam) {
    return transformed_cumulant_eval(basecf, p, lam).hess;
  };
  out.cumulant = cf;

  // psi_mu(m) = psi_nu(M) - beta k_nu(psi_nu(M)) - lambda0,  M = m/(1+<beta,m>)
  FamilyDescriptor basecopy = base;
  out.psi_direct = [basecopy, p](const Vec& m) {
    double s = 1.0 + p.beta.dot(m);
    require(s > 0.0, "mean outside the twisted domain");
    Vec M = m / s;
    Vec tn = invert_mean_map(basecopy, M);
    return Vec(tn - p.beta * basecopy.cumulant->k(tn) - p.lambda0);
  };
  out.kpsi_direct = [basecopy, p](const Vec& m) {
    double s = 1.0 + p.beta.dot(m);
    require(s > 0.0, "mean outside the twisted domain");
    Vec tn = invert_mean_map(basecopy, m / s);
    return basecopy.cumulant->k(tn) - p.k0;
  };
  return out;
}

}  // namespace neflab
