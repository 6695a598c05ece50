#pragma once

#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "neflab/common.hpp"

namespace neflab {

enum class DomainKind { Box, HalfspaceIntersection, Predicate };

// An open subset of R^n given by strict halfspace constraints plus an
// optional extra predicate.  Every domain also carries a finite working
// box used for grids and quadrature; the box is a sampling window, not a
// constraint (several domains here are unbounded).
class Domain {
 public:
  Domain() = default;

  static Domain box(Vec lo, Vec hi) {
    Domain d;
    d.dim_ = static_cast<int>(lo.size());
    d.kind_ = DomainKind::Box;
    d.lo_ = std::move(lo);
    d.hi_ = std::move(hi);
    return d;
  }

  // All of R^n, sampled on [-w, w]^n.
  static Domain whole_space(int n, double w) {
    return box(Vec::Constant(n, -w), Vec::Constant(n, w));
  }

  // Adds the open constraint <normal, x> + offset > 0.
  Domain& add_halfspace(Vec normal, double offset) {
    kind_ = DomainKind::HalfspaceIntersection;
    halfspaces_.emplace_back(std::move(normal), offset);
    return *this;
  }

  Domain& set_predicate(std::function<bool(const Vec&)> pred) {
    kind_ = DomainKind::Predicate;
    extra_ = std::move(pred);
    return *this;
  }

  Domain& set_box(Vec lo, Vec hi) {
    lo_ = std::move(lo);
    hi_ = std::move(hi);
    return *this;
  }

  int dimension() const { return dim_; }
  DomainKind kind() const { return kind_; }
  const Vec& box_lo() const { return lo_; }
  const Vec& box_hi() const { return hi_; }
  const std::vector<std::pair<Vec, double>>& halfspaces() const {
    return halfspaces_;
  }

  bool contains(const Vec& x) const {
    if (x.size() != dim_) return false;
    if (!x.allFinite()) return false;
    for (const auto& [normal, offset] : halfspaces_) {
      if (normal.dot(x) + offset <= 0.0) return false;
    }
    if (extra_ && !extra_(x)) return false;
    return true;
  }

  Vec center() const { return 0.5 * (lo_ + hi_); }

  // Interior-shrunk sampling window (keeps away from boundary blowups).
  std::pair<Vec, Vec> shrunk_box(double frac = 0.05) const {
    Vec ext = hi_ - lo_;
    return {lo_ + frac * ext, hi_ - frac * ext};
  }

  // Uniform grid over the shrunk box, filtered by membership.
  std::vector<Vec> grid(int per_axis, double shrink = 0.05) const {
    auto [lo, hi] = shrunk_box(shrink);
    std::vector<Vec> pts;
    std::vector<int> idx(dim_, 0);
    while (true) {
      Vec p(dim_);
      for (int i = 0; i < dim_; ++i) {
        double t = per_axis == 1 ? 0.5
                                 : static_cast<double>(idx[i]) / (per_axis - 1);
        p(i) = lo(i) + t * (hi(i) - lo(i));
      }
      if (contains(p)) pts.push_back(p);
      int i = 0;
      for (; i < dim_; ++i) {
        if (++idx[i] < per_axis) break;
        idx[i] = 0;
      }
      if (i == dim_) break;
    }
    return pts;
  }

 private:
  int dim_ = 0;
  DomainKind kind_ = DomainKind::Box;
  Vec lo_, hi_;
  std::vector<std::pair<Vec, double>> halfspaces_;
  std::function<bool(const Vec&)> extra_;
};

// Product of two domains (block structure).
inline Domain product(const Domain& a, const Domain& b) {
  int n = a.dimension() + b.dimension();
  Vec lo(n), hi(n);
  lo << a.box_lo(), b.box_lo();
  hi << a.box_hi(), b.box_hi();
  Domain d = Domain::box(lo, hi);
  auto embed = [n](const Vec& normal, int off) {
    Vec e = Vec::Zero(n);
    e.segment(off, normal.size()) = normal;
    return e;
  };
  for (const auto& [normal, c] : a.halfspaces()) d.add_halfspace(embed(normal, 0), c);
  for (const auto& [normal, c] : b.halfspaces())
    d.add_halfspace(embed(normal, a.dimension()), c);
  int na = a.dimension();
  Domain acopy = a, bcopy = b;
  d.set_predicate([acopy, bcopy, na, n](const Vec& x) {
    return acopy.contains(x.head(na)) && bcopy.contains(x.tail(n - na));
  });
  return d;
}

}  // namespace neflab
