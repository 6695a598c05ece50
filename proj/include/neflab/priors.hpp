#pragma once

#include <cmath>
#include <random>

#include "neflab/mean_param.hpp"

namespace neflab {

enum class PriorFamilyTag { PI, PI_STAR, PI_TILDE };

inline const char* to_string(PriorFamilyTag t) {
  switch (t) {
    case PriorFamilyTag::PI: return "PI";
    case PriorFamilyTag::PI_STAR: return "PI_STAR";
    case PriorFamilyTag::PI_TILDE: return "PI_TILDE";
  }
  return "?";
}

struct PriorSpec {
  PriorFamilyTag family_tag = PriorFamilyTag::PI;
  double t = 1.0;
  Vec m0;
  std::optional<Vec> beta;  // required for PI_TILDE

  PriorSpec() = default;
  PriorSpec(PriorFamilyTag tag, double t_, Vec m0_,
            std::optional<Vec> beta_ = std::nullopt)
      : family_tag(tag), t(t_), m0(std::move(m0_)), beta(std::move(beta_)) {
    require(t > 0.0, "prior hyperparameter t must be positive");
    if (family_tag == PriorFamilyTag::PI_TILDE)
      require(beta.has_value() &&
                  beta->lpNorm<Eigen::Infinity>() > 0.0,
              "PI_TILDE requires a nonzero beta");
  }
};

struct QuadratureConfig {
  int points_per_axis = 64;   // tensor Gauss-Legendre, n >= 2
  double rel_tol = 1e-9;
  int max_doublings = 16;
};

constexpr double kLogZero = -std::numeric_limits<double>::infinity();

// Unnormalized log-density of the prior at `point` (theta for PI, m for
// the mean-side families).  Outside the indicator's set this is -inf.
inline double log_density(const PriorSpec& spec, const FamilyDescriptor& fam,
                          const Vec& point, const MeanParam& mp) {
  int n = fam.dim;
  require(point.size() == n && spec.m0.size() == n, "log_density: dimension");
  switch (spec.family_tag) {
    case PriorFamilyTag::PI: {
      require(fam.cumulant.has_value(), "PI needs a cumulant family");
      if (!fam.cumulant->theta_domain.contains(point)) return kLogZero;
      return spec.t * (spec.m0.dot(point) - fam.cumulant->k(point));
    }
    case PriorFamilyTag::PI_STAR: {
      if (fam.variance && !fam.variance->mean_domain().contains(point))
        return kLogZero;
      return spec.t * (spec.m0.dot(mp.psi(point)) - mp.kpsi(point));
    }
    case PriorFamilyTag::PI_TILDE: {
      double s = 1.0 + spec.beta->dot(point);
      if (s == 0.0) return kLogZero;
      if (fam.variance && !fam.variance->mean_domain().contains(point))
        return kLogZero;
      return spec.t * (spec.m0.dot(mp.psi(point)) - mp.kpsi(point)) -
             (n + 2) * std::log(std::fabs(s));
    }
  }
  return kLogZero;
}

inline double log_density(const PriorSpec& spec, const FamilyDescriptor& fam,
                          const Vec& point) {
  MeanParam mp;
  if (spec.family_tag != PriorFamilyTag::PI) mp = make_mean_param(fam);
  return log_density(spec, fam, point, mp);
}

// Image of pi_{t,m0} under the mean map, unnormalized:
// t(<m0,psi(m)> - k(psi(m))) - log det V(m).
inline double pushforward_log_density(const FamilyDescriptor& fam, double t,
                                      const Vec& m0, const Vec& m,
                                      const MeanParam& mp) {
  return t * (m0.dot(mp.psi(m)) - mp.kpsi(m)) - mp.logdetV(m);
}

inline double pushforward_log_density(const FamilyDescriptor& fam, double t,
                                      const Vec& m0, const Vec& m) {
  return pushforward_log_density(fam, t, m0, m, make_mean_param(fam));
}

namespace detail {

// log of the integral of exp(logf) over [lo,hi]^n (box), stabilized by
// the box-center value.
inline double log_mass_over_box(const std::function<double(const Vec&)>& logf,
                                const Vec& lo, const Vec& hi,
                                const QuadratureConfig& q, double shift) {
  int n = static_cast<int>(lo.size());
  auto g = [&](const Vec& x) {
    double v = logf(x);
    return std::isfinite(v) ? std::exp(v - shift) : 0.0;
  };
  double mass;
  if (n == 1) {
    mass = quad::composite_gauss([&](double x) { return g(vec1(x)); }, lo(0),
                                 hi(0), q.points_per_axis, q.rel_tol * 1e-2);
  } else {
    mass = quad::tensor_gauss(g, lo, hi, q.points_per_axis);
  }
  if (mass <= 0.0) return kLogZero;
  return shift + std::log(mass);
}

// Shrinks [lo,hi] using the axis-aligned halfspaces of the domain, so the
// integrand's hard cutoff lands on a panel boundary instead of inside one
// (where it defeats the quadrature rule).
inline void clip_box_to_domain(const Domain& domain, Vec& lo, Vec& hi) {
  for (const auto& [normal, offset] : domain.halfspaces()) {
    int nz = -1;
    bool axis = true;
    for (int i = 0; i < normal.size(); ++i) {
      if (normal(i) == 0.0) continue;
      if (nz >= 0) {
        axis = false;
        break;
      }
      nz = i;
    }
    if (!axis || nz < 0) continue;
    double bound = -offset / normal(nz);
    if (normal(nz) > 0.0)
      lo(nz) = std::max(lo(nz), bound);
    else
      hi(nz) = std::min(hi(nz), bound);
  }
}

}  // namespace detail

struct MassResult {
  double log_mass;   // log of the total unnormalized mass
  Vec box_lo, box_hi;  // the box at which truncation converged
};

// Integrates exp(logf) over the domain, doubling the working box until
// the added shell mass is negligible; growing shells flag a divergent
// integral.
inline MassResult log_mass(const std::function<double(const Vec&)>& logf,
                           const Domain& domain,
                           const QuadratureConfig& q = {}) {
  Vec lo = domain.box_lo(), hi = domain.box_hi();
  Vec c = domain.center();
  // Stabilize by the largest sampled log-density so the integrand is O(1).
  double shift = logf(c);
  for (const Vec& x : domain.grid(domain.dimension() == 1 ? 33 : 7, 0.0)) {
    double v = logf(x);
    if (std::isfinite(v)) shift = std::max(shift, v);
  }
  if (!std::isfinite(shift)) shift = 0.0;
  auto clipped_mass = [&](Vec blo, Vec bhi) {
    detail::clip_box_to_domain(domain, blo, bhi);
    return detail::log_mass_over_box(logf, blo, bhi, q, shift);
  };
  double prev = clipped_mass(lo, hi);
  double grow = 0.0;
  for (int it = 0; it < q.max_doublings; ++it) {
    Vec nlo = c + 2.0 * (lo - c);
    Vec nhi = c + 2.0 * (hi - c);
    double cur = clipped_mass(nlo, nhi);
    double shell = std::isfinite(prev) ? cur - prev : 1.0;
    lo = nlo;
    hi = nhi;
    if (std::isfinite(cur) && shell <= std::log1p(q.rel_tol))
      return {cur, lo, hi};
    if (shell > grow && it > 3)
      throw NonNormalizableError("integral mass keeps growing under box doubling");
    grow = shell;
    prev = cur;
  }
  throw NonNormalizableError("tail decay not reached within doubling budget");
}

// Normalizing constant C with C * integral(exp(log_density)) = 1.
inline double normalizer(const PriorSpec& spec, const FamilyDescriptor& fam,
                         const QuadratureConfig& q = {}) {
  MeanParam mp;
  if (spec.family_tag != PriorFamilyTag::PI) mp = make_mean_param(fam);
  const Domain& dom = spec.family_tag == PriorFamilyTag::PI
                          ? fam.cumulant->theta_domain
                          : fam.variance->mean_domain();
  auto logf = [&](const Vec& x) { return log_density(spec, fam, x, mp); };
  MassResult r = log_mass(logf, dom, q);
  return std::exp(-r.log_mass);
}

struct OmegaParams {
  Vec a;
  double b = 0.0;
  double c = 0.0;
};

// Omega membership: t > b and (t m0 + a) / (t - b) in M_F.
inline bool omega_contains(const OmegaParams& p, double t, const Vec& m0,
                           const Domain& mean_domain) {
  require(t > 0.0, "omega_contains: t must be positive");
  if (t <= p.b) return false;
  Vec mapped = (t * m0 + p.a) / (t - p.b);
  return mean_domain.contains(mapped);
}

enum class ParamMapSide { PsiSide, KPrimeSide };

// Hyperparameter maps from the equivalence proof; the two sides are
// mutually inverse.
inline std::pair<double, Vec> param_map(ParamMapSide side, double t,
                                        const Vec& m0, const OmegaParams& p) {
  if (side == ParamMapSide::PsiSide) {
    require(t - p.b > 0.0, "param_map: requires t > b");
    return {t - p.b, Vec((t * m0 + p.a) / (t - p.b))};
  }
  require(t + p.b > 0.0, "param_map: requires t + b > 0");
  return {t + p.b, Vec((t * m0 - p.a) / (t + p.b))};
}

}  // namespace neflab
