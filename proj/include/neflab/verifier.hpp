#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "neflab/cubic.hpp"
#include "neflab/ode.hpp"
#include "neflab/priors.hpp"

namespace neflab {

struct FitResult {
  bool applicable = true;
  Vec a;
  double b = 0.0;
  double c = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  int grid_size = 0;
  bool pass = false;
  std::string note;

  static FitResult not_applicable(std::string why) {
    FitResult r;
    r.applicable = false;
    r.residual = 0.0;
    r.note = std::move(why);
    return r;
  }
};

namespace detail {

// Keeps grid points on which 1 + <beta,m> has a consistent sign (the
// twisted factor enters through log |1+<beta,m>|; a sign change within
// the working set would mix two branches).
inline std::vector<Vec> sign_consistent(const std::vector<Vec>& grid,
                                        const Vec& beta) {
  int pos = 0, neg = 0;
  for (const Vec& m : grid) {
    double s = 1.0 + beta.dot(m);
    if (s > 1e-8) ++pos;
    else if (s < -1e-8) ++neg;
  }
  double want = pos >= neg ? 1.0 : -1.0;
  std::vector<Vec> out;
  for (const Vec& m : grid) {
    double s = 1.0 + beta.dot(m);
    if (s * want > 1e-8) out.push_back(m);
  }
  return out;
}

}  // namespace detail

// Property (1): least-squares fit of
//   log det V(m) - (n+2) log|1+<beta,m>|  ~  <a,psi(m)> + b k(psi(m)) + c.
// With beta absent ("quadratic mode") the log factor is dropped, which is
// the determinant identity of the simple quadratic class.
inline FitResult monge_ampere_fit(const FamilyDescriptor& fam,
                                  const std::optional<Vec>& beta,
                                  const std::vector<Vec>& mean_grid,
                                  const MeanParam& mp, double tol = 1e-6) {
  int n = fam.dim;
  std::vector<Vec> grid =
      beta ? detail::sign_consistent(mean_grid, *beta) : mean_grid;
  if (static_cast<int>(grid.size()) < n + 3)
    throw ValidationError("monge_ampere_fit: grid too small");

  int rows = static_cast<int>(grid.size());
  Mat X(rows, n + 2);
  Vec y(rows);
  for (int r = 0; r < rows; ++r) {
    const Vec& m = grid[r];
    Vec psi = mp.psi(m);
    for (int j = 0; j < n; ++j) X(r, j) = psi(j);
    X(r, n) = mp.kpsi(m);
    X(r, n + 1) = 1.0;
    double v = mp.logdetV(m);
    if (beta) v -= (n + 2) * std::log(std::fabs(1.0 + beta->dot(m)));
    y(r) = v;
  }
  Eigen::ColPivHouseholderQR<Mat> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < n + 2)
    throw ValidationError("monge_ampere_fit: degenerate regressor grid");
  Vec coef = qr.solve(y);

  FitResult out;
  out.a = coef.head(n);
  out.b = coef(n);
  out.c = coef(n + 1);
  out.residual = (X * coef - y).lpNorm<Eigen::Infinity>();
  out.grid_size = rows;
  out.pass = out.residual < tol;
  return out;
}

// Property (2): residual of the variance differential identity
//   sum_i [V'(m)(e_i)] e_i^* = (n+2)/(1+<beta,m>) V(m)(beta) + a + b m,
// with (a,b) fitted by least squares.  In n=1 this is
// (1+bm) V' - 3b V = (a+bm)(1+bm).
inline FitResult trace_identity_residual(const VarianceModel& V, const Vec& beta,
                                         const std::vector<Vec>& mean_grid,
                                         double tol = 1e-6) {
  int n = V.dim();
  std::vector<Vec> grid = detail::sign_consistent(mean_grid, beta);
  if (grid.empty())
    throw std::invalid_argument("trace_identity: no usable grid points");

  int rows = static_cast<int>(grid.size()) * n;
  Mat X = Mat::Zero(rows, n + 1);
  Vec y(rows);
  int r = 0;
  for (const Vec& m : grid) {
    double s = 1.0 + beta.dot(m);
    Vec vb = V.at(m) * beta;
    Vec L(n);
    for (int j = 0; j < n; ++j) {
      double div = 0.0;
      for (int i = 0; i < n; ++i) div += V.partial(i, m)(i, j);
      L(j) = div - (n + 2) / s * vb(j);
    }
    for (int j = 0; j < n; ++j, ++r) {
      X(r, j) = 1.0;      // a_j
      X(r, n) = m(j);     // b
      y(r) = L(j);
    }
  }
  Vec coef = X.colPivHouseholderQr().solve(y);
  FitResult out;
  out.a = coef.head(n);
  out.b = coef(n);
  out.residual = (X * coef - y).lpNorm<Eigen::Infinity>();
  out.grid_size = static_cast<int>(grid.size());
  out.pass = out.residual < tol;
  return out;
}

// Property (3): the pushforward of pi_{t,m0} under the mean map must be a
// tilde-family member at the mapped hyperparameters; equivalently the
// log-density difference D(m) is constant in m.
inline FitResult prior_pushforward_check(
    const FamilyDescriptor& fam, const Vec& beta, const OmegaParams& p,
    const std::vector<std::pair<double, Vec>>& samples,
    const std::vector<Vec>& mean_grid, const MeanParam& mp, double tol = 1e-4) {
  std::vector<Vec> grid = detail::sign_consistent(mean_grid, beta);
  if (grid.empty())
    throw std::invalid_argument("pushforward check: no usable grid points");

  FitResult out;
  out.a = p.a;
  out.b = p.b;
  out.grid_size = static_cast<int>(grid.size());
  double worst = 0.0;
  int used = 0;
  for (const auto& [t, m0] : samples) {
    if (t + p.b <= 0.0) continue;
    auto [t1, m1] = param_map(ParamMapSide::KPrimeSide, t, m0, p);
    double dmin = std::numeric_limits<double>::infinity(), dmax = -dmin;
    for (const Vec& m : grid) {
      double push = t * (m0.dot(mp.psi(m)) - mp.kpsi(m)) - mp.logdetV(m);
      double tilde = t1 * (m1.dot(mp.psi(m)) - mp.kpsi(m)) -
                     (fam.dim + 2) * std::log(std::fabs(1.0 + beta.dot(m)));
      double d = push - tilde;
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    worst = std::max(worst, dmax - dmin);
    ++used;
  }
  if (used == 0) return FitResult::not_applicable("no valid hyperparameter samples");
  out.residual = worst;
  out.pass = worst < tol;
  out.note = "samples=" + std::to_string(used);
  return out;
}

// 1-D candidate generation: every real root r != 0 of V contributes
// beta = -1/r, since a twisted variance always carries the (1+beta m)
// factor.
inline std::vector<double> beta_candidates(const VarianceModel& V,
                                           const std::vector<double>& user = {}) {
  require(V.dim() == 1, "beta_candidates: one-dimensional only");
  std::vector<double> out;
  if (V.has_poly()) {
    for (double r : real_roots(V.poly().at(0, 0)))
      if (std::fabs(r) > 1e-8) out.push_back(-1.0 / r);
  }
  for (double b : user) out.push_back(b);
  std::vector<double> dedup;
  for (double b : out) {
    bool seen = false;
    for (double d : dedup)
      if (std::fabs(d - b) < 1e-10) seen = true;
    if (!seen && b != 0.0) dedup.push_back(b);
  }
  std::sort(dedup.begin(), dedup.end());
  return dedup;
}

// |V'(m)(V(m)(alpha))(gamma) - V'(m)(V(m)(gamma))(alpha)|, which vanishes
// for any genuine variance function; normalized by the size of the two
// sides so the residual stays meaningful on large mean windows.
inline double symmetry_check(const VarianceModel& V, const Vec& m,
                             const Vec& alpha, const Vec& gamma) {
  int n = V.dim();
  auto directional = [&](const Vec& dir) {
    Mat d = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) d += dir(i) * V.partial(i, m);
    return d;
  };
  Mat v = V.at(m);
  Vec lhs = directional(v * alpha) * gamma;
  Vec rhs = directional(v * gamma) * alpha;
  double scale = std::max({1.0, lhs.lpNorm<Eigen::Infinity>(),
                           rhs.lpNorm<Eigen::Infinity>()});
  return (lhs - rhs).lpNorm<Eigen::Infinity>() / scale;
}

struct ClassifyConfig {
  double tol_p1 = 1e-6;
  double tol_p2 = 1e-6;
  double tol_p3 = 1e-4;
  int grid_per_axis = 25;
  double grid_shrink = 0.05;
  std::vector<Vec> user_betas;
  bool run_p3 = true;
};

struct BetaVerdict {
  std::optional<Vec> beta;  // nullopt: quadratic mode
  FitResult p1, p2, p3;
  bool all_pass = false;
  bool agreement = true;
  std::optional<ode::OdeParams> ode_match;
};

struct VerdictReport {
  std::string family;
  std::vector<BetaVerdict> verdicts;
  bool overall_pass = false;
  bool agreement = true;
  std::optional<Vec> passing_beta;
  bool quadratic_pass = false;
};

namespace detail {

inline FitResult guarded(const std::function<FitResult()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    FitResult r;
    r.pass = false;
    r.note = std::string("error: ") + e.what();
    return r;
  }
}

inline std::vector<std::pair<double, Vec>> default_samples(
    const Domain& mean_domain, double b) {
  std::vector<std::pair<double, Vec>> s;
  Vec c = mean_domain.center();
  auto [lo, hi] = mean_domain.shrunk_box(0.25);
  double tmin = std::max(0.5, -b + 0.5);
  std::vector<double> ts = {tmin + 0.5, tmin + 1.0, tmin + 2.0, tmin + 4.0,
                            tmin + 7.0};
  int i = 0;
  for (double t : ts) {
    Vec m0 = c + (i % 2 ? 0.3 : -0.3) * (i % 3) / 2.0 * (hi - lo);
    if (!mean_domain.contains(m0)) m0 = c;
    s.emplace_back(t, m0);
    ++i;
  }
  return s;
}

}  // namespace detail

// Runs quadratic-mode property (1), then properties (1)-(3) for every
// beta candidate, and aggregates verdicts with the cross-property
// agreement flag.
inline VerdictReport classify(const FamilyDescriptor& fam,
                              const ClassifyConfig& cfg = {}) {
  VerdictReport report;
  report.family = fam.name;
  MeanParam mp = make_mean_param(fam);
  std::vector<Vec> grid =
      fam.mean_domain().grid(cfg.grid_per_axis, cfg.grid_shrink);

  // Quadratic mode.
  BetaVerdict qv;
  qv.p1 = detail::guarded(
      [&] { return monge_ampere_fit(fam, std::nullopt, grid, mp, cfg.tol_p1); });
  qv.p2 = FitResult::not_applicable("quadratic mode");
  qv.p3 = FitResult::not_applicable("quadratic mode");
  qv.all_pass = qv.p1.pass;
  report.quadratic_pass = qv.p1.pass;
  report.verdicts.push_back(qv);

  // Candidates: provenance beta, 1-D variance roots, user supplied.
  std::vector<Vec> cands;
  auto push_unique = [&](const Vec& b) {
    if (b.lpNorm<Eigen::Infinity>() == 0.0) return;
    for (const Vec& c : cands)
      if ((c - b).lpNorm<Eigen::Infinity>() < 1e-10) return;
    cands.push_back(b);
  };
  if (fam.provenance.beta) push_unique(*fam.provenance.beta);
  if (fam.dim == 1 && fam.variance)
    for (double b : beta_candidates(*fam.variance)) push_unique(vec1(b));
  for (const Vec& b : cfg.user_betas) push_unique(b);

  for (const Vec& beta : cands) {
    BetaVerdict bv;
    bv.beta = beta;
    bv.p1 = detail::guarded(
        [&] { return monge_ampere_fit(fam, beta, grid, mp, cfg.tol_p1); });
    if (fam.variance) {
      bv.p2 = detail::guarded([&] {
        return trace_identity_residual(*fam.variance, beta, grid, cfg.tol_p2);
      });
    } else {
      bv.p2 = FitResult::not_applicable("no variance model");
    }
    if (cfg.run_p3) {
      OmegaParams op;
      op.a = bv.p1.a.size() ? bv.p1.a : Vec::Zero(fam.dim);
      op.b = bv.p1.b;
      op.c = bv.p1.c;
      auto samples = detail::default_samples(fam.mean_domain(), op.b);
      bv.p3 = detail::guarded([&] {
        return prior_pushforward_check(fam, beta, op, samples, grid, mp,
                                       cfg.tol_p3);
      });
    } else {
      bv.p3 = FitResult::not_applicable("disabled");
    }

    bool first = true;
    bool agree = true, all = true, ref = false;
    for (const FitResult* f : {&bv.p1, &bv.p2, &bv.p3}) {
      if (!f->applicable) continue;
      if (first) {
        ref = f->pass;
        first = false;
      } else if (f->pass != ref) {
        agree = false;
      }
      all = all && f->pass;
    }
    bv.agreement = agree;
    bv.all_pass = !first && all;
    if (bv.all_pass && fam.dim == 1 && fam.variance && fam.variance->has_poly()) {
      bv.ode_match =
          ode::match_cubic_to_ode(ode::from_poly(fam.variance->poly().at(0, 0)),
                                  beta(0), 1e-8);
    }
    report.agreement = report.agreement && bv.agreement;
    if (bv.all_pass && !report.passing_beta) report.passing_beta = beta;
    report.verdicts.push_back(bv);
  }

  report.overall_pass = report.quadratic_pass || report.passing_beta.has_value();
  return report;
}

}  // namespace neflab
