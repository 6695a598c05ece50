#pragma once

#include <cmath>
#include <optional>

#include "neflab/family.hpp"

namespace neflab {

struct NewtonConfig {
  int max_iters = 80;
  double tol = 1e-12;        // stopping ||k'(theta) - m||_inf
  double damping = 0.5;      // backtracking factor
  int max_backtracks = 40;
  std::optional<Vec> init;   // warm start; defaults to the domain center

  NewtonConfig() = default;
};

// psi(m): Newton iteration on k'(theta) = m with backtracking that keeps
// the iterate inside the open domain and decreases the residual.
inline Vec invert_mean_map(const FamilyDescriptor& fam, const Vec& m,
                           const NewtonConfig& cfg = {}) {
  require(fam.cumulant.has_value(), "invert_mean_map: no cumulant family");
  const CumulantFamily& cf = *fam.cumulant;
  require(cfg.tol > 0 && cfg.max_iters >= 1 && cfg.damping > 0 &&
              cfg.damping < 1,
          "invert_mean_map: bad config");

  Vec theta = cfg.init ? *cfg.init : cf.theta_domain.center();
  if (!cf.theta_domain.contains(theta))
    throw DomainEscapeError("initial iterate outside the parameter domain");
  Vec r = cf.grad_at(theta) - m;
  double rn = r.lpNorm<Eigen::Infinity>();

  for (int it = 0; it < cfg.max_iters; ++it) {
    if (rn <= cfg.tol) return theta;
    Mat h = cf.hess_at(theta);
    Vec step = h.ldlt().solve(-r);
    double t = 1.0;
    bool moved = false;
    for (int bt = 0; bt <= cfg.max_backtracks; ++bt) {
      Vec cand = theta + t * step;
      if (cf.theta_domain.contains(cand)) {
        Vec rc = cf.grad_at(cand) - m;
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
    if (!moved) {
      if (!cf.theta_domain.contains(theta + cfg.damping * step) && rn > cfg.tol)
        throw DomainEscapeError("backtracking exhausted at the domain boundary");
      throw ConvergenceError("mean-map inversion stalled", theta, rn);
    }
  }
  if (rn <= cfg.tol) return theta;
  throw ConvergenceError("mean-map inversion did not converge", theta, rn);
}

// V_F(m) = k''(psi(m)).
inline Mat variance_at(const FamilyDescriptor& fam, const Vec& m,
                       const NewtonConfig& cfg = {}) {
  Vec theta = invert_mean_map(fam, m, cfg);
  return fam.cumulant->hess_at(theta);
}

// k(psi(m)).
inline double cumulant_at_mean(const FamilyDescriptor& fam, const Vec& m,
                               const NewtonConfig& cfg = {}) {
  Vec theta = invert_mean_map(fam, m, cfg);
  return fam.cumulant->k(theta);
}

}  // namespace neflab
