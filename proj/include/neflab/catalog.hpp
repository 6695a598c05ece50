#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "neflab/family.hpp"

namespace neflab {
namespace catalog {

namespace detail {

inline Domain open_ray_pos(double box_lo, double box_hi) {
  Domain d = Domain::box(vec1(box_lo), vec1(box_hi));
  d.add_halfspace(vec1(1.0), 0.0);  // x > 0
  return d;
}

inline Domain open_ray_neg(double box_lo, double box_hi) {
  Domain d = Domain::box(vec1(box_lo), vec1(box_hi));
  d.add_halfspace(vec1(-1.0), 0.0);  // x < 0
  return d;
}

inline Poly poly1(std::initializer_list<double> coeffs) {
  Poly p(1);
  int k = 0;
  for (double c : coeffs) {
    if (c != 0.0) p.add_term({k}, c);
    ++k;
  }
  return p;
}

inline FamilyDescriptor make(const std::string& name, CumulantFamily cf,
                             VarianceModel vm) {
  FamilyDescriptor f;
  f.name = name;
  f.dim = cf.dim;
  f.cumulant = std::move(cf);
  f.variance = std::move(vm);
  return f;
}

}  // namespace detail

inline FamilyDescriptor normal() {
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = Domain::whole_space(1, 6.0);
  cf.k = [](const Vec& t) { return 0.5 * t(0) * t(0); };
  cf.grad = [](const Vec& t) { return t; };
  cf.hess = [](const Vec&) { return Mat::Identity(1, 1); };
  return detail::make("normal", cf,
                      VarianceModel::scalar(Domain::whole_space(1, 6.0),
                                            detail::poly1({1.0})));
}

inline FamilyDescriptor poisson() {
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = Domain::whole_space(1, 3.0);
  cf.k = [](const Vec& t) { return std::exp(t(0)); };
  cf.grad = [](const Vec& t) { return vec1(std::exp(t(0))); };
  cf.hess = [](const Vec& t) { return Mat(vec1(std::exp(t(0))).asDiagonal()); };
  return detail::make("poisson", cf,
                      VarianceModel::scalar(detail::open_ray_pos(0.05, 20.0),
                                            detail::poly1({0.0, 1.0})));
}

inline FamilyDescriptor gamma(double shape = 1.0) {
  require(shape > 0.0, "gamma: shape must be positive");
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = detail::open_ray_neg(-20.0, -0.05);
  cf.k = [shape](const Vec& t) { return -shape * std::log(-t(0)); };
  cf.grad = [shape](const Vec& t) { return vec1(-shape / t(0)); };
  cf.hess = [shape](const Vec& t) {
    return Mat(vec1(shape / (t(0) * t(0))).asDiagonal());
  };
  return detail::make(
      "gamma", cf,
      VarianceModel::scalar(detail::open_ray_pos(0.05, 20.0),
                            detail::poly1({0.0, 0.0, 1.0 / shape})));
}

inline FamilyDescriptor binomial(int trials) {
  require(trials >= 1, "binomial: trials must be >= 1");
  double N = trials;
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = Domain::whole_space(1, 6.0);
  cf.k = [N](const Vec& t) { return N * std::log1p(std::exp(t(0))); };
  cf.grad = [N](const Vec& t) {
    double e = std::exp(t(0));
    return vec1(N * e / (1 + e));
  };
  cf.hess = [N](const Vec& t) {
    double e = std::exp(t(0));
    return Mat(vec1(N * e / ((1 + e) * (1 + e))).asDiagonal());
  };
  Domain md = Domain::box(vec1(0.02 * N), vec1(0.98 * N));
  md.add_halfspace(vec1(1.0), 0.0);   // m > 0
  md.add_halfspace(vec1(-1.0), N);    // m < N
  return detail::make("binomial", cf,
                      VarianceModel::scalar(md, detail::poly1({0.0, 1.0, -1.0 / N})));
}

inline FamilyDescriptor negative_binomial(double N) {
  require(N >= 1.0, "negative-binomial: shape must be >= 1");
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = detail::open_ray_neg(-6.0, -0.05);
  cf.k = [N](const Vec& t) { return -N * std::log1p(-std::exp(t(0))); };
  cf.grad = [N](const Vec& t) {
    double e = std::exp(t(0));
    return vec1(N * e / (1 - e));
  };
  cf.hess = [N](const Vec& t) {
    double e = std::exp(t(0));
    return Mat(vec1(N * e / ((1 - e) * (1 - e))).asDiagonal());
  };
  return detail::make(
      "negative-binomial", cf,
      VarianceModel::scalar(detail::open_ray_pos(0.05, 20.0),
                            detail::poly1({0.0, 1.0, 1.0 / N})));
}

inline FamilyDescriptor hyperbolic_cosine() {
  CumulantFamily cf;
  cf.dim = 1;
  Domain td = Domain::box(vec1(-1.45), vec1(1.45));
  td.add_halfspace(vec1(1.0), M_PI / 2);   // theta > -pi/2
  td.add_halfspace(vec1(-1.0), M_PI / 2);  // theta < pi/2
  cf.theta_domain = td;
  cf.k = [](const Vec& t) { return -std::log(std::cos(t(0))); };
  cf.grad = [](const Vec& t) { return vec1(std::tan(t(0))); };
  cf.hess = [](const Vec& t) {
    double c = std::cos(t(0));
    return Mat(vec1(1.0 / (c * c)).asDiagonal());
  };
  return detail::make("hyperbolic-cosine", cf,
                      VarianceModel::scalar(Domain::whole_space(1, 8.0),
                                            detail::poly1({1.0, 0.0, 1.0})));
}

inline FamilyDescriptor inverse_gaussian() {
  CumulantFamily cf;
  cf.dim = 1;
  cf.theta_domain = detail::open_ray_neg(-8.0, -0.02);
  cf.k = [](const Vec& t) { return -std::sqrt(-2.0 * t(0)); };
  cf.grad = [](const Vec& t) { return vec1(1.0 / std::sqrt(-2.0 * t(0))); };
  cf.hess = [](const Vec& t) {
    return Mat(vec1(std::pow(-2.0 * t(0), -1.5)).asDiagonal());
  };
  return detail::make("inverse-gaussian", cf,
                      VarianceModel::scalar(detail::open_ray_pos(0.3, 5.0),
                                            detail::poly1({0.0, 0.0, 0.0, 1.0})));
}

inline std::vector<std::string> ids() {
  return {"normal",   "poisson",           "gamma",
          "binomial", "negative-binomial", "hyperbolic-cosine",
          "inverse-gaussian"};
}

inline FamilyDescriptor build(const std::string& id,
                              const std::map<std::string, double>& params = {}) {
  auto get = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  for (const auto& [key, value] : params) {
    (void)value;
    if (key != "shape" && key != "trials")
      throw std::invalid_argument("unknown parameter: " + key);
  }
  FamilyDescriptor f;
  if (id == "normal") f = normal();
  else if (id == "poisson") f = poisson();
  else if (id == "gamma") f = gamma(get("shape", 1.0));
  else if (id == "binomial") {
    double N = get("trials", 1.0);
    require(N == std::floor(N), "binomial: trials must be an integer");
    f = binomial(static_cast<int>(N));
  } else if (id == "negative-binomial") f = negative_binomial(get("shape", 1.0));
  else if (id == "hyperbolic-cosine") f = hyperbolic_cosine();
  else if (id == "inverse-gaussian") f = inverse_gaussian();
  else throw ParseError("unknown catalog id: " + id, "cumulant.kind");
  f.catalog_kind = id;
  f.catalog_params = params;
  return f;
}

// Independent product of one-dimensional families: k sums, the variance
// is block diagonal, domains multiply.
inline FamilyDescriptor product_family(const std::vector<FamilyDescriptor>& parts) {
  require(!parts.empty(), "product_family: empty list");
  for (const auto& p : parts) {
    require(p.dim == 1, "product_family: parts must be one-dimensional");
    require(p.cumulant.has_value(), "product_family: part without cumulant");
  }
  int n = static_cast<int>(parts.size());

  CumulantFamily cf;
  cf.dim = n;
  Domain td = parts[0].cumulant->theta_domain;
  Domain md = parts[0].variance->mean_domain();
  for (int i = 1; i < n; ++i) {
    td = product(td, parts[i].cumulant->theta_domain);
    md = product(md, parts[i].variance->mean_domain());
  }
  cf.theta_domain = td;
  auto fams = parts;
  cf.k = [fams](const Vec& t) {
    double s = 0.0;
    for (size_t i = 0; i < fams.size(); ++i) s += fams[i].cumulant->k(vec1(t(i)));
    return s;
  };
  cf.grad = [fams](const Vec& t) {
    Vec g(t.size());
    for (size_t i = 0; i < fams.size(); ++i)
      g(i) = fams[i].cumulant->grad_at(vec1(t(i)))(0);
    return g;
  };
  cf.hess = [fams](const Vec& t) {
    Mat h = Mat::Zero(t.size(), t.size());
    for (size_t i = 0; i < fams.size(); ++i)
      h(i, i) = fams[i].cumulant->hess_at(vec1(t(i)))(0, 0);
    return h;
  };

  PolyMat pm(n, n, n);
  for (int i = 0; i < n; ++i)
    pm.at(i, i) = parts[i].variance->poly().at(0, 0).lift(n, i);

  FamilyDescriptor f;
  f.name = "product(";
  for (int i = 0; i < n; ++i)
    f.name += (i ? "," : "") + parts[i].name;
  f.name += ")";
  f.dim = n;
  f.cumulant = cf;
  f.variance = VarianceModel(n, md, pm);
  return f;
}

}  // namespace catalog
}  // namespace neflab
