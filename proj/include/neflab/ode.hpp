#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "neflab/polynomial.hpp"

namespace neflab {
namespace ode {

// Parameters of the 1-D variance differential equation
//   (1 + beta m) V'(m) - 3 beta V(m) = (a + b m)(1 + beta m).
struct OdeParams {
  double beta;
  double a = 0.0;
  double b = 0.0;
  double lam = 0.0;  // integration constant

  OdeParams(double beta_, double a_ = 0.0, double b_ = 0.0, double lam_ = 0.0)
      : beta(beta_), a(a_), b(b_), lam(lam_) {
    require(beta != 0.0, "ode: beta must be nonzero");
  }
};

// Cubic coefficients c0..c3 of a univariate polynomial.
using Cubic = std::array<double, 4>;

inline Poly to_poly(const Cubic& c) {
  Poly p(1);
  for (int k = 0; k < 4; ++k)
    if (c[k] != 0.0) p.add_term({k}, c[k]);
  return p;
}

inline Cubic from_poly(const Poly& p) {
  require(p.nvars() == 1 && p.degree() <= 3, "expected a univariate cubic");
  Cubic c{0, 0, 0, 0};
  for (const auto& [e, v] : p.terms()) c[e[0]] = v;
  return c;
}

inline double eval(const Cubic& c, double m) {
  return ((c[3] * m + c[2]) * m + c[1]) * m + c[0];
}

// General solution of the ODE:
//   V(m) = lam (1+bm)^3 - (b/beta^2)(1+bm)^2 + ((b - beta a)/(2 beta^2))(1+bm).
inline Cubic solve_closed_form(const OdeParams& p) {
  Poly u = Poly::constant(1, 1.0) + p.beta * Poly::variable(1, 0);
  Poly v = p.lam * u.pow(3) - (p.b / (p.beta * p.beta)) * u.pow(2) +
           ((p.b - p.beta * p.a) / (2 * p.beta * p.beta)) * u;
  return from_poly(v);
}

inline double residual(const OdeParams& p, const Cubic& v, double m) {
  Cubic dv{v[1], 2 * v[2], 3 * v[3], 0.0};
  double u = 1.0 + p.beta * m;
  return (u * eval(dv, m)) - 3.0 * p.beta * eval(v, m) -
         (p.a + p.b * m) * u;
}

// Membership test: re-expands V in powers of (1 + beta m).  The solution
// family is exactly span{(1+bm), (1+bm)^2, (1+bm)^3}; a nonzero constant
// component in that basis is decisive.
inline std::optional<OdeParams> match_cubic_to_ode(const Cubic& v, double beta,
                                                   double tol = 1e-10) {
  require(beta != 0.0, "match_cubic_to_ode: beta must be nonzero");
  // m = (u - 1)/beta; collect V((u-1)/beta) in powers of u.
  Poly u_poly = (1.0 / beta) * Poly::variable(1, 0) +
                Poly::constant(1, -1.0 / beta);
  Poly in_u = to_poly(v).substitute({u_poly});
  Cubic d = from_poly(in_u);
  double scale = std::max({1.0, std::fabs(d[1]), std::fabs(d[2]),
                           std::fabs(d[3])});
  if (std::fabs(d[0]) > tol * scale) return std::nullopt;
  double lam = d[3];
  double b = -beta * beta * d[2];
  double a = (b - 2 * beta * beta * d[1]) / beta;
  return OdeParams(beta, a, b, lam);
}

struct Trajectory {
  std::vector<double> m;
  std::vector<double> v;
};

// RK4 cross-check of the closed form; the span must not contain the
// singular point m = -1/beta.
inline Trajectory integrate_numeric(double beta, double a, double b, double v0,
                                    double m0, double m1, int min_steps = 2048) {
  require(beta != 0.0, "integrate: beta must be nonzero");
  double sing = -1.0 / beta;
  double lo = std::min(m0, m1), hi = std::max(m0, m1);
  if (sing >= lo && sing <= hi)
    throw SingularityError("integration span crosses m = -1/beta");
  auto rhs = [&](double m, double v) {
    double u = 1.0 + beta * m;
    return (3.0 * beta * v + (a + b * m) * u) / u;
  };
  int steps = min_steps;
  double h = (m1 - m0) / steps;
  Trajectory tr;
  tr.m.reserve(steps + 1);
  tr.v.reserve(steps + 1);
  double m = m0, v = v0;
  tr.m.push_back(m);
  tr.v.push_back(v);
  for (int i = 0; i < steps; ++i) {
    double k1 = rhs(m, v);
    double k2 = rhs(m + h / 2, v + h / 2 * k1);
    double k3 = rhs(m + h / 2, v + h / 2 * k2);
    double k4 = rhs(m + h, v + h * k3);
    v += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    m = m0 + (i + 1) * h;
    tr.m.push_back(m);
    tr.v.push_back(v);
  }
  return tr;
}

}  // namespace ode
}  // namespace neflab
