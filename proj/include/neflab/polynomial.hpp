#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "neflab/common.hpp"

namespace neflab {

// Multivariate polynomial stored as a coefficient table keyed by the
// exponent multi-index.
class Poly {
 public:
  using Exponents = std::vector<int>;

  explicit Poly(int nvars = 1) : nvars_(nvars) {}

  static Poly constant(int nvars, double c) {
    Poly p(nvars);
    p.add_term(Exponents(nvars, 0), c);
    return p;
  }

  static Poly variable(int nvars, int i) {
    Poly p(nvars);
    Exponents e(nvars, 0);
    e[i] = 1;
    p.add_term(e, 1.0);
    return p;
  }

  // <beta, m> as a polynomial in m.
  static Poly linear_form(const Vec& beta) {
    Poly p(static_cast<int>(beta.size()));
    for (int i = 0; i < beta.size(); ++i) {
      if (beta(i) != 0.0) p += beta(i) * variable(p.nvars_, i);
    }
    return p;
  }

  int nvars() const { return nvars_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  void add_term(const Exponents& e, double c) {
    require(static_cast<int>(e.size()) == nvars_, "exponent arity mismatch");
    double& slot = terms_[e];
    slot += c;
    if (slot == 0.0) terms_.erase(e);
  }

  int degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
      int t = 0;
      for (int x : e) t += x;
      d = std::max(d, t);
    }
    return d;
  }

  int degree_in(int var) const {
    int d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[var]);
    return d;
  }

  double max_abs_coeff() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::fabs(c));
    return m;
  }

  double eval(const Vec& x) const {
    double s = 0.0;
    for (const auto& [e, c] : terms_) {
      double t = c;
      for (int i = 0; i < nvars_; ++i)
        for (int k = 0; k < e[i]; ++k) t *= x(i);
      s += t;
    }
    return s;
  }

  Poly partial(int var) const {
    Poly out(nvars_);
    for (const auto& [e, c] : terms_) {
      if (e[var] == 0) continue;
      Exponents d = e;
      d[var] -= 1;
      out.add_term(d, c * e[var]);
    }
    return out;
  }

  Poly& operator+=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Poly& operator-=(const Poly& o) {
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Poly& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(Poly a, double s) { return a *= s; }

  friend Poly operator*(const Poly& a, const Poly& b) {
    Poly out(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        Exponents e = ea;
        for (size_t i = 0; i < e.size(); ++i) e[i] += eb[i];
        out.add_term(e, ca * cb);
      }
    return out;
  }

  Poly pow(int k) const {
    Poly out = constant(nvars_, 1.0);
    for (int i = 0; i < k; ++i) out = out * (*this);
    return out;
  }

  // Substitutes x_i -> subs[i] (each a polynomial in possibly different
  // variables, all of the same arity).
  Poly substitute(const std::vector<Poly>& subs) const {
    require(static_cast<int>(subs.size()) == nvars_, "substitution arity");
    int m = subs.empty() ? nvars_ : subs[0].nvars();
    Poly out(m);
    for (const auto& [e, c] : terms_) {
      Poly t = constant(m, c);
      for (int i = 0; i < nvars_; ++i) t = t * subs[i].pow(e[i]);
      out += t;
    }
    return out;
  }

  // p(A y + c): affine change of variables.
  Poly compose_affine(const Mat& A, const Vec& c) const {
    std::vector<Poly> subs;
    for (int i = 0; i < nvars_; ++i) {
      Poly s = constant(nvars_, c(i));
      for (int j = 0; j < nvars_; ++j)
        if (A(i, j) != 0.0) s += A(i, j) * variable(nvars_, j);
      subs.push_back(s);
    }
    return substitute(subs);
  }

  // Re-embeds a polynomial in a larger variable set, variable i of this
  // polynomial becoming variable offset+i.
  Poly lift(int new_nvars, int offset) const {
    Poly out(new_nvars);
    for (const auto& [e, c] : terms_) {
      Exponents ne(new_nvars, 0);
      for (int i = 0; i < nvars_; ++i) ne[offset + i] = e[i];
      out.add_term(ne, c);
    }
    return out;
  }

  // Drops coefficients below tol * (largest coefficient).
  Poly pruned(double rel_tol = 1e-13) const {
    double cut = max_abs_coeff() * rel_tol;
    Poly out(nvars_);
    for (const auto& [e, c] : terms_)
      if (std::fabs(c) > cut) out.add_term(e, c);
    return out;
  }

 private:
  int nvars_;
  std::map<Exponents, double> terms_;
};

// Exact division of p by the affine polynomial c0 + <beta, x>.  The
// remainder (a polynomial free of the pivot variable) is returned through
// `remainder_norm`; callers decide how small it must be.
inline Poly divide_affine(const Poly& p, double c0, const Vec& beta,
                          double* remainder_norm = nullptr) {
  int n = p.nvars();
  int j = 0;
  for (int i = 1; i < beta.size(); ++i)
    if (std::fabs(beta(i)) > std::fabs(beta(j))) j = i;
  require(beta.size() == n && beta(j) != 0.0, "divide_affine: zero divisor");

  Poly divisor = Poly::constant(n, c0) + Poly::linear_form(beta);
  Poly q(n), r = p;
  while (r.degree_in(j) >= 1) {
    int d = r.degree_in(j);
    Poly t(n);
    for (const auto& [e, c] : r.terms()) {
      if (e[j] != d) continue;
      Poly::Exponents ne = e;
      ne[j] -= 1;
      t.add_term(ne, c / beta(j));
    }
    q += t;
    r -= t * divisor;
    r = r.pruned(1e-15);
  }
  double rn = 0.0;
  for (const auto& [e, c] : r.terms()) rn = std::max(rn, std::fabs(c));
  if (remainder_norm) *remainder_norm = rn;
  return q.pruned(1e-14);
}

// Symmetric matrix of polynomials.
class PolyMat {
 public:
  PolyMat(int rows, int cols, int nvars)
      : rows_(rows), cols_(cols), data_(rows * cols, Poly(nvars)) {}

  static PolyMat identity(int n, int nvars) {
    PolyMat m(n, n, nvars);
    for (int i = 0; i < n; ++i) m.at(i, i) = Poly::constant(nvars, 1.0);
    return m;
  }

  Poly& at(int i, int j) { return data_[i * cols_ + j]; }
  const Poly& at(int i, int j) const { return data_[i * cols_ + j]; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }

  PolyMat operator*(const PolyMat& o) const {
    int nv = data_[0].nvars();
    PolyMat out(rows_, o.cols_, nv);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < o.cols_; ++j) {
        Poly s(nv);
        for (int k = 0; k < cols_; ++k) s += at(i, k) * o.at(k, j);
        out.at(i, j) = s;
      }
    return out;
  }

  Mat eval(const Vec& x) const {
    Mat m(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) m(i, j) = at(i, j).eval(x);
    return m;
  }

 private:
  int rows_, cols_;
  std::vector<Poly> data_;
};

// Real roots of a univariate polynomial via the companion matrix.
// Repeated roots come out of the eigensolver with O(eps^(1/k)) noise, so
// near-equal roots are clustered and each cluster of size k is polished
// as a simple root of the (k-1)-th derivative.
inline std::vector<double> real_roots(const Poly& p, double imag_tol = 1e-4) {
  require(p.nvars() == 1, "real_roots: univariate only");
  int d = p.degree();
  std::vector<double> coeff(d + 1, 0.0);
  for (const auto& [e, c] : p.terms()) coeff[e[0]] = c;
  while (d > 0 && std::fabs(coeff[d]) < 1e-14 * p.max_abs_coeff()) --d;
  if (d == 0) return {};
  Mat companion = Mat::Zero(d, d);
  for (int i = 0; i < d; ++i) companion(i, d - 1) = -coeff[i] / coeff[d];
  for (int i = 1; i < d; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Mat> es(companion);
  std::vector<double> raw;
  for (int i = 0; i < d; ++i) {
    auto z = es.eigenvalues()(i);
    if (std::fabs(z.imag()) < imag_tol * std::max(1.0, std::fabs(z.real())))
      raw.push_back(z.real());
  }
  std::sort(raw.begin(), raw.end());

  std::vector<double> roots;
  size_t i = 0;
  while (i < raw.size()) {
    size_t j = i + 1;
    double cluster_tol = 1e-4 * std::max(1.0, std::fabs(raw[i]));
    while (j < raw.size() && raw[j] - raw[i] < cluster_tol) ++j;
    int mult = static_cast<int>(j - i);
    double r = 0.0;
    for (size_t k = i; k < j; ++k) r += raw[k];
    r /= mult;
    Poly q = p;
    for (int k = 1; k < mult; ++k) q = q.partial(0);
    Poly dq = q.partial(0);
    for (int it = 0; it < 50; ++it) {
      double f = q.eval(vec1(r)), df = dq.eval(vec1(r));
      if (df == 0.0) break;
      double step = f / df;
      r -= step;
      if (std::fabs(step) < 1e-15 * std::max(1.0, std::fabs(r))) break;
    }
    roots.push_back(r);
    i = j;
  }
  return roots;
}

}  // namespace neflab
