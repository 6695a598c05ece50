#include <doctest.h>

#include <random>

#include "neflab/polynomial.hpp"

using namespace neflab;

TEST_CASE("poly eval and partial derivatives") {
  // p(x,y) = x^2 y + 2 y
  Poly p(2);
  p.add_term({2, 1}, 1.0);
  p.add_term({0, 1}, 2.0);
  CHECK(p.eval(vec2(2.0, 3.0)) == doctest::Approx(18.0));
  CHECK(p.degree() == 3);
  CHECK(p.degree_in(0) == 2);

  Poly px = p.partial(0);  // 2xy
  CHECK(px.eval(vec2(2.0, 3.0)) == doctest::Approx(12.0));
  Poly py = p.partial(1);  // x^2 + 2
  CHECK(py.eval(vec2(2.0, 3.0)) == doctest::Approx(6.0));
}

TEST_CASE("poly arithmetic cancels exactly") {
  Poly a = Poly::variable(1, 0);
  Poly b = a * a - 2.0 * a;
  Poly c = b - (a * a) + 2.0 * a;
  CHECK(c.is_zero());
}

TEST_CASE("compose_affine agrees with pointwise evaluation") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Poly p(2);
  p.add_term({2, 0}, 1.5);
  p.add_term({1, 1}, -2.0);
  p.add_term({0, 2}, 0.5);
  p.add_term({1, 0}, 3.0);
  p.add_term({0, 0}, -1.0);
  Mat A(2, 2);
  A << 1.0, 0.5, -0.25, 2.0;
  Vec c = vec2(0.3, -0.7);
  Poly q = p.compose_affine(A, c);
  for (int i = 0; i < 20; ++i) {
    Vec y = vec2(u(rng), u(rng));
    CHECK(q.eval(y) == doctest::Approx(p.eval(A * y + c)).epsilon(1e-12));
  }
}

TEST_CASE("divide_affine recovers exact quotients") {
  // (1 + 2x)(3 + x - x^2)
  Poly q0(1);
  q0.add_term({0}, 3.0);
  q0.add_term({1}, 1.0);
  q0.add_term({2}, -1.0);
  Poly divisor = Poly::constant(1, 1.0) + 2.0 * Poly::variable(1, 0);
  Poly prod = divisor * q0;
  double rem = 1.0;
  Poly q = divide_affine(prod, 1.0, vec1(2.0), &rem);
  CHECK(rem == doctest::Approx(0.0));
  CHECK((q - q0).max_abs_coeff() == doctest::Approx(0.0));
}

TEST_CASE("divide_affine reports a nonzero remainder when not divisible") {
  Poly p = Poly::constant(1, 1.0) + Poly::variable(1, 0);  // 1 + x
  double rem = 0.0;
  divide_affine(p, 1.0, vec1(2.0), &rem);  // by 1 + 2x
  CHECK(rem > 0.1);
}

TEST_CASE("divide_affine works in two variables") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec beta = vec2(1.0, -0.5);
  Poly divisor = Poly::constant(2, 1.0) + Poly::linear_form(beta);
  Poly q0(2);
  q0.add_term({1, 1}, u(rng));
  q0.add_term({2, 0}, u(rng));
  q0.add_term({0, 1}, u(rng));
  q0.add_term({0, 0}, u(rng));
  double rem = 1.0;
  Poly q = divide_affine(divisor * q0, 1.0, beta, &rem);
  CHECK(rem < 1e-12);
  CHECK((q - q0).max_abs_coeff() < 1e-12);
}

TEST_CASE("real_roots finds simple and repeated roots") {
  // (x - 1)^2 (x + 2)
  Poly p(1);
  p.add_term({3}, 1.0);
  p.add_term({2}, 0.0);
  p.add_term({1}, -3.0);
  p.add_term({0}, 2.0);
  auto roots = real_roots(p);
  REQUIRE(roots.size() == 2);
  CHECK(roots[0] == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(roots[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("real_roots handles a triple root at zero") {
  Poly p(1);
  p.add_term({3}, 1.0);
  auto roots = real_roots(p);
  REQUIRE(roots.size() == 1);
  CHECK(std::fabs(roots[0]) < 1e-8);
}

TEST_CASE("real_roots ignores complex pairs") {
  Poly p(1);  // x^2 + 1
  p.add_term({2}, 1.0);
  p.add_term({0}, 1.0);
  CHECK(real_roots(p).empty());
}

TEST_CASE("polymat product evaluates like the matrix product") {
  PolyMat a(2, 2, 2), b(2, 2, 2);
  a.at(0, 0) = Poly::variable(2, 0);
  a.at(0, 1) = Poly::constant(2, 1.0);
  a.at(1, 0) = Poly::variable(2, 1);
  a.at(1, 1) = Poly::variable(2, 0) * Poly::variable(2, 1);
  b.at(0, 0) = Poly::constant(2, 2.0);
  b.at(1, 1) = Poly::variable(2, 0);
  PolyMat c = a * b;
  Vec x = vec2(0.7, -1.3);
  Mat lhs = c.eval(x);
  Mat rhs = a.eval(x) * b.eval(x);
  CHECK((lhs - rhs).norm() < 1e-14);
}
