#include <doctest.h>

#include <random>

#include "neflab/catalog.hpp"
#include "neflab/cubic.hpp"
#include "neflab/mean_param.hpp"

using namespace neflab;

namespace {

Poly poly1(std::initializer_list<double> coeffs) {
  Poly p(1);
  int k = 0;
  for (double c : coeffs) {
    if (c != 0.0) p.add_term({k}, c);
    ++k;
  }
  return p;
}

// Simple quadratic shape alpha m m^T + sum_k m_k B_k + C; the rank-one
// quadratic part is what makes the twisted numerator divisible by the
// affine factor in n >= 2.
VarianceModel random_quadratic(std::mt19937& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double alpha = u(rng);
  PolyMat pm(n, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Poly p(n);
      p.add_term(Poly::Exponents(n, 0), u(rng) + (i == j ? 2.0 : 0.0));
      for (int a = 0; a < n; ++a) {
        Poly::Exponents e(n, 0);
        e[a] = 1;
        p.add_term(e, u(rng));
      }
      Poly::Exponents e2(n, 0);
      e2[i] += 1;
      e2[j] += 1;
      p.add_term(e2, alpha);
      pm.at(i, j) = p;
      pm.at(j, i) = p;
    }
  Domain md = Domain::box(Vec::Constant(n, -0.4), Vec::Constant(n, 0.4));
  return VarianceModel(n, md, pm);
}

}  // namespace

TEST_CASE("forward transform of the flat variance gives (1+m)^3") {
  auto v = forward_variance(
      VarianceModel::scalar(Domain::whole_space(1, 6.0), poly1({1.0})),
      vec1(1.0));
  CHECK((v.poly().at(0, 0) - poly1({1.0, 3.0, 3.0, 1.0})).max_abs_coeff() <
        1e-12);
}

TEST_CASE("forward transform of V=m gives m(1+m)^2") {
  auto base = catalog::poisson();
  auto v = forward_variance(*base.variance, vec1(1.0));
  CHECK((v.poly().at(0, 0) - poly1({0.0, 1.0, 2.0, 1.0})).max_abs_coeff() <
        1e-12);
}

TEST_CASE("forward transform of V=m^2 gives m^2(1+m)") {
  auto base = catalog::gamma(1.0);
  auto v = forward_variance(*base.variance, vec1(1.0));
  CHECK((v.poly().at(0, 0) - poly1({0.0, 0.0, 1.0, 1.0})).max_abs_coeff() <
        1e-12);
}

TEST_CASE("rank-one twist determinant identity") {
  // det(I + m beta^T) = 1 + <beta, m> underpins the determinant law.
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n : {1, 2, 3}) {
    Vec m(n), beta(n);
    for (int i = 0; i < n; ++i) {
      m(i) = u(rng);
      beta(i) = u(rng);
    }
    Mat twist = Mat::Identity(n, n) + m * beta.transpose();
    CHECK(twist.determinant() ==
          doctest::Approx(1.0 + beta.dot(m)).epsilon(1e-12));
  }
}

TEST_CASE("forward then inverse is the identity on coefficients") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 1 + (trial % 2);
    VarianceModel v1 = random_quadratic(rng, n);
    Vec beta(n);
    for (int i = 0; i < n; ++i) beta(i) = u(rng);
    if (beta.lpNorm<Eigen::Infinity>() < 0.1) beta(0) = 1.0;

    auto fwd = forward_variance(v1, beta);
    auto back = inverse_variance(fwd, beta);
    double scale = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        scale = std::max(scale, v1.poly().at(i, j).max_abs_coeff());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double diff =
            (back.poly().at(i, j) - v1.poly().at(i, j)).max_abs_coeff();
        CHECK(diff < 1e-12 * scale);
      }
  }
}

TEST_CASE("determinant law of the forward transform") {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    int n = 1 + (trial % 2);
    VarianceModel v1 = random_quadratic(rng, n);
    Vec beta(n);
    for (int i = 0; i < n; ++i) beta(i) = u(rng) + 0.5;
    auto fwd = forward_variance(v1, beta);
    for (int pt = 0; pt < 20; ++pt) {
      Vec m(n);
      for (int i = 0; i < n; ++i) m(i) = u(rng);
      double s = 1.0 + beta.dot(m);
      double lhs = fwd.poly().eval(m).determinant();
      double rhs =
          std::pow(s, n + 2) * v1.poly().eval(Vec(m / s)).determinant();
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
  }
}

TEST_CASE("twisted domain keeps the base image") {
  Domain M = Domain::box(vec1(0.05), vec1(20.0));
  M.add_halfspace(vec1(1.0), 0.0);  // m > 0
  Domain d = domain_beta(M, vec1(1.0));
  CHECK(d.contains(vec1(0.5)));
  CHECK_FALSE(d.contains(vec1(-0.5)));   // maps to a negative base mean
  CHECK_FALSE(d.contains(vec1(-1.5)));   // wrong side of the singular line
}

TEST_CASE("transformed cumulant matches the variance polynomial") {
  for (auto* base_fn : {&catalog::normal, &catalog::poisson}) {
    auto fam = cubic_transform((*base_fn)(), vec1(1.0));
    for (const Vec& lam : fam.cumulant->theta_domain.grid(9, 0.15)) {
      Mat h = fam.cumulant->hess_at(lam);
      Vec m = fam.cumulant->grad_at(lam);
      if (!fam.mean_domain().contains(m)) continue;
      Mat v = fam.variance->at(m);
      CHECK((h - v).lpNorm<Eigen::Infinity>() <
            1e-7 * std::max(1.0, v.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("direct inverse mean map agrees with the cumulant gradient") {
  auto fam = cubic_transform(catalog::poisson(), vec1(1.0));
  MeanParam mp = make_mean_param(fam);
  for (const Vec& m : fam.mean_domain().grid(15, 0.1)) {
    Vec lam = mp.psi(m);
    Vec back = fam.cumulant->grad_at(lam);
    // residual tolerance 1e-12 stretched by dm/dlambda = V(m)
    double cond = std::max(1.0, fam.variance->at(m).lpNorm<Eigen::Infinity>());
    CHECK((back - m).lpNorm<Eigen::Infinity>() < 1e-10 * cond);
    CHECK(mp.kpsi(m) == doctest::Approx(fam.cumulant->k(lam)).epsilon(1e-9));
  }
}

TEST_CASE("construction constants follow the inverse relation") {
  CubicConstructionParams p(vec1(2.0), 0.7, vec1(-0.3));
  CHECK(p.k1() == doctest::Approx(-0.7));
  CHECK(p.theta1()(0) == doctest::Approx(0.3 - 2.0 * 0.7));
}

TEST_CASE("transform with shift constants keeps the variance and shifts k") {
  auto plain = cubic_transform(catalog::normal(), vec1(1.0));
  auto shifted = cubic_transform(catalog::normal(), vec1(1.0), 0.5,
                                 std::optional<Vec>(vec1(0.25)));
  CHECK((plain.variance->poly().at(0, 0) -
         shifted.variance->poly().at(0, 0)).max_abs_coeff() < 1e-12);
  // k_mu(lambda) = k_nu(theta) - k0 with lambda = theta - beta k_nu - l0:
  // evaluating both families at matched lambda points differs by k0 and
  // the lambda0 shift of the argument.
  Vec lam = vec1(0.1);
  double kp = plain.cumulant->k(lam);
  double ks = shifted.cumulant->k(vec1(0.1 - 0.25));
  CHECK(ks == doctest::Approx(kp - 0.5).epsilon(1e-9));
}

TEST_CASE("n=2 product transform stays symmetric with degree 3") {
  auto base =
      catalog::product_family({catalog::poisson(), catalog::poisson()});
  auto fam = cubic_transform(base, vec2(1.0, 0.0));
  const PolyMat& v = fam.variance->poly();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(v.at(i, j).degree() <= 3);
      CHECK((v.at(i, j) - v.at(j, i)).max_abs_coeff() < 1e-12);
    }
}

TEST_CASE("forward transform rejects degree-3 input") {
  auto ig = catalog::inverse_gaussian();
  CHECK_THROWS_AS(forward_variance(*ig.variance, vec1(1.0)),
                  std::invalid_argument);
}
