#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "neflab/common.hpp"

namespace neflab {
namespace quad {

namespace detail {

inline double simpson(const std::function<double(double)>& f, double a,
                      double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_step(const std::function<double(double)>& f, double a,
                            double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(f, a, m, fa, flm, fm);
  double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_step(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_step(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

}  // namespace detail

// `tol` is relative to the first whole-interval estimate; an absolute
// tolerance stalls at full depth when the integrand dwarfs it.
inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double b, double tol = 1e-10,
                               int max_depth = 40) {
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = detail::simpson(f, a, b, fa, fm, fb);
  double abs_tol = tol * std::max(1.0, std::fabs(whole));
  return detail::adaptive_step(f, a, b, fa, fm, fb, whole, abs_tol, max_depth);
}

// Gauss-Legendre nodes/weights on [-1,1] by Newton on the Legendre
// polynomial.
inline void gauss_legendre(int n, std::vector<double>& nodes,
                           std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) {
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        break;
      }
    }
    nodes[i] = x;
  }
}

// Composite Gauss-Legendre on [a,b], doubling the panel count until the
// estimate settles.  Tolerant of small pointwise noise in f, which defeats
// the error estimate of an adaptive rule.
inline double composite_gauss(const std::function<double(double)>& f, double a,
                              double b, int per_panel, double rel_tol,
                              int max_refine = 6) {
  std::vector<double> x, w;
  gauss_legendre(per_panel, x, w);
  auto pass = [&](int panels) {
    double h = (b - a) / panels, total = 0.0;
    for (int p = 0; p < panels; ++p) {
      double lo = a + p * h, half = 0.5 * h;
      for (int i = 0; i < per_panel; ++i)
        total += half * w[i] * f(lo + half * (x[i] + 1.0));
    }
    return total;
  };
  int panels = 8;
  double prev = pass(panels);
  for (int it = 0; it < max_refine; ++it) {
    panels *= 2;
    double cur = pass(panels);
    if (std::fabs(cur - prev) <= rel_tol * std::max(1.0, std::fabs(cur)))
      return cur;
    prev = cur;
  }
  return prev;
}

// Tensor Gauss-Legendre integral over an axis-aligned box.
inline double tensor_gauss(const std::function<double(const Vec&)>& f,
                           const Vec& lo, const Vec& hi, int per_axis) {
  int n = static_cast<int>(lo.size());
  std::vector<double> x, w;
  gauss_legendre(per_axis, x, w);
  std::vector<int> idx(n, 0);
  double total = 0.0;
  while (true) {
    Vec p(n);
    double wt = 1.0;
    for (int i = 0; i < n; ++i) {
      double half = 0.5 * (hi(i) - lo(i));
      p(i) = lo(i) + half * (x[idx[i]] + 1.0);
      wt *= half * w[idx[i]];
    }
    total += wt * f(p);
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
    if (i == n) break;
  }
  return total;
}

}  // namespace quad
}  // namespace neflab
