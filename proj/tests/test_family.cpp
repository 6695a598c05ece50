#include <doctest.h>

#include "neflab/catalog.hpp"

using namespace neflab;

TEST_CASE("finite-difference gradient matches a closed form") {
  auto f = [](const Vec& x) { return std::exp(x(0)) + x(0) * x(1); };
  Vec x = vec2(0.4, -1.1);
  Vec g = fd::gradient(f, x);
  CHECK(g(0) == doctest::Approx(std::exp(0.4) - 1.1).epsilon(1e-9));
  CHECK(g(1) == doctest::Approx(0.4).epsilon(1e-9));
}

TEST_CASE("cumulant hessian falls back to differencing the gradient") {
  CumulantFamily cf;
  cf.dim = 2;
  cf.theta_domain = Domain::whole_space(2, 4.0);
  Mat A(2, 2);
  A << 2.0, 0.5, 0.5, 1.0;
  cf.k = [A](const Vec& t) { return 0.5 * t.dot(A * t); };
  cf.grad = [A](const Vec& t) { return Vec(A * t); };
  // no hess given
  Mat h = cf.hess_at(vec2(0.3, -0.2));
  CHECK((h - A).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("variance model rejects degree overflow and asymmetry") {
  Domain md = Domain::whole_space(1, 2.0);
  Poly quartic(1);
  quartic.add_term({4}, 1.0);
  CHECK_THROWS_AS(VarianceModel::scalar(md, quartic), ValidationError);

  PolyMat pm(2, 2, 2);
  pm.at(0, 0) = Poly::constant(2, 1.0);
  pm.at(1, 1) = Poly::constant(2, 1.0);
  pm.at(0, 1) = Poly::variable(2, 0);
  pm.at(1, 0) = Poly::variable(2, 1);  // not the mirror
  CHECK_THROWS_AS(VarianceModel(2, Domain::whole_space(2, 2.0), pm),
                  ValidationError);
}

TEST_CASE("affine shift of the inverse-gaussian gives (m-1)^3") {
  auto shifted =
      affine_image(catalog::inverse_gaussian(), Mat::Identity(1, 1), vec1(1.0));
  REQUIRE(shifted.variance->has_poly());
  const Poly& v = shifted.variance->poly().at(0, 0);
  // (m-1)^3 = m^3 - 3m^2 + 3m - 1
  Poly expect(1);
  expect.add_term({3}, 1.0);
  expect.add_term({2}, -3.0);
  expect.add_term({1}, 3.0);
  expect.add_term({0}, -1.0);
  CHECK((v - expect).max_abs_coeff() < 1e-12);
  CHECK(shifted.variance->mean_domain().contains(vec1(2.0)));
  CHECK_FALSE(shifted.variance->mean_domain().contains(vec1(0.5)));
}

TEST_CASE("affine scaling of the poisson variance") {
  // phi(x) = 2x: V_new(m) = 2 V(m/2) * 2 = 2m.
  auto scaled =
      affine_image(catalog::poisson(), 2.0 * Mat::Identity(1, 1), vec1(0.0));
  const Poly& v = scaled.variance->poly().at(0, 0);
  Poly expect = 2.0 * Poly::variable(1, 0);
  CHECK((v - expect).max_abs_coeff() < 1e-12);

  // Cumulant side: k_new(theta) = k(2 theta), so k'_new = 2 e^{2 theta}.
  Vec t = vec1(0.3);
  CHECK(scaled.cumulant->grad_at(t)(0) ==
        doctest::Approx(2.0 * std::exp(0.6)).epsilon(1e-12));
  CHECK((scaled.cumulant->hess_at(t) -
         Mat(4.0 * std::exp(0.6) * Mat::Identity(1, 1)))
            .norm() < 1e-12);
}

TEST_CASE("jorgensen power rescales the variance") {
  // gamma(shape p): V = m^2/p, so V_lam(m) = lam (m/lam)^2 / p = m^2/(lam p).
  auto g = catalog::gamma(2.0);
  auto pw = jorgensen_power(g, 3.0);
  Vec m = vec1(1.7);
  CHECK(pw.variance->at(m)(0, 0) ==
        doctest::Approx(1.7 * 1.7 / (3.0 * 2.0)).epsilon(1e-12));
  Vec t = vec1(-0.8);
  CHECK(pw.cumulant->k(t) == doctest::Approx(3.0 * g.cumulant->k(t)));
  CHECK(pw.provenance.power == doctest::Approx(3.0));
}

TEST_CASE("jorgensen power composes multiplicatively") {
  auto g = catalog::poisson();
  auto a = jorgensen_power(jorgensen_power(g, 2.0), 3.0);
  auto b = jorgensen_power(g, 6.0);
  Vec m = vec1(4.2);
  CHECK(a.variance->at(m)(0, 0) ==
        doctest::Approx(b.variance->at(m)(0, 0)).epsilon(1e-12));
  Vec t = vec1(0.4);
  CHECK(a.cumulant->k(t) == doctest::Approx(b.cumulant->k(t)).epsilon(1e-12));
}

TEST_CASE("product family sums cumulants and blocks variances") {
  auto prod =
      catalog::product_family({catalog::poisson(), catalog::gamma(2.0)});
  CHECK(prod.dim == 2);
  Vec t = vec2(0.5, -1.5);
  double expect = std::exp(0.5) + (-2.0) * std::log(1.5);
  CHECK(prod.cumulant->k(t) == doctest::Approx(expect).epsilon(1e-12));

  Vec m = vec2(2.0, 3.0);
  Mat v = prod.variance->at(m);
  CHECK(v(0, 0) == doctest::Approx(2.0));
  CHECK(v(1, 1) == doctest::Approx(9.0 / 2.0));
  CHECK(v(0, 1) == doctest::Approx(0.0));
  CHECK(prod.variance->mean_domain().contains(m));
  CHECK_FALSE(prod.variance->mean_domain().contains(vec2(-1.0, 3.0)));
}
