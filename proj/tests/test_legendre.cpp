#include <doctest.h>

#include "neflab/catalog.hpp"
#include "neflab/mean_param.hpp"

using namespace neflab;

TEST_CASE("inverse mean map matches closed forms") {
  // normal: psi(m) = m; poisson: log m; gamma(p): -p/m; IG: -1/(2 m^2).
  auto check1 = [](const FamilyDescriptor& fam, double m, double expect) {
    Vec t = invert_mean_map(fam, vec1(m));
    CHECK(t(0) == doctest::Approx(expect).epsilon(1e-10));
  };
  check1(catalog::normal(), 1.3, 1.3);
  check1(catalog::poisson(), 2.5, std::log(2.5));
  check1(catalog::gamma(2.0), 4.0, -0.5);
  check1(catalog::inverse_gaussian(), 2.0, -1.0 / 8.0);
}

TEST_CASE("psi is a two-sided inverse of the mean map") {
  for (const auto& id : catalog::ids()) {
    std::map<std::string, double> params;
    if (id == "binomial") params["trials"] = 3;
    auto fam = catalog::build(id, params);
    CAPTURE(id);
    for (const Vec& theta : fam.cumulant->theta_domain.grid(9, 0.1)) {
      Vec m = fam.cumulant->grad_at(theta);
      Vec back = invert_mean_map(fam, m);
      CHECK((back - theta).lpNorm<Eigen::Infinity>() < 1e-9);
    }
    for (const Vec& m : fam.mean_domain().grid(9, 0.1)) {
      Vec theta = invert_mean_map(fam, m);
      CHECK((fam.cumulant->grad_at(theta) - m).lpNorm<Eigen::Infinity>() <
            1e-9);
    }
  }
}

TEST_CASE("variance_at equals the catalog polynomial") {
  for (const auto& id : catalog::ids()) {
    std::map<std::string, double> params;
    if (id == "binomial") params["trials"] = 3;
    auto fam = catalog::build(id, params);
    CAPTURE(id);
    for (const Vec& m : fam.mean_domain().grid(25, 0.1)) {
      Mat lhs = variance_at(fam, m);
      Mat rhs = fam.variance->at(m);
      CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() <
            1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()));
    }
  }
}

TEST_CASE("newton refuses a mean outside the image") {
  // poisson means are positive
  CHECK_THROWS_AS(invert_mean_map(catalog::poisson(), vec1(-1.0)),
                  std::runtime_error);
}

TEST_CASE("mean_param warm starts agree with cold solves") {
  auto fam = catalog::gamma(1.5);
  MeanParam mp = make_mean_param(fam);
  for (const Vec& m : fam.mean_domain().grid(40, 0.05)) {
    Vec warm = mp.psi(m);
    Vec cold = invert_mean_map(fam, m);
    CHECK((warm - cold).lpNorm<Eigen::Infinity>() < 1e-10);
  }
}

TEST_CASE("variance-only reconstruction matches the cumulant route") {
  // Strip the cumulant off the gamma family; psi and k(psi) are then
  // rebuilt by quadrature up to additive constants.
  auto fam = catalog::gamma(1.0);
  FamilyDescriptor bare;
  bare.name = "gamma#bare";
  bare.dim = 1;
  bare.variance = fam.variance;
  MeanParam full = make_mean_param(fam);
  MeanParam recon = make_mean_param(bare);

  Vec ref = vec1(5.0);
  double psi_off = recon.psi(ref)(0) - full.psi(ref)(0);
  double kpsi_off = recon.kpsi(ref) - full.kpsi(ref);
  for (const Vec& m : fam.mean_domain().grid(15, 0.1)) {
    CHECK(recon.psi(m)(0) - psi_off ==
          doctest::Approx(full.psi(m)(0)).epsilon(1e-8));
    CHECK(recon.kpsi(m) - kpsi_off ==
          doctest::Approx(full.kpsi(m)).epsilon(1e-8));
  }
}

TEST_CASE("logdetV flags a non-positive determinant") {
  Domain md = Domain::whole_space(1, 2.0);
  VarianceModel vm(1, md, [](const Vec& m) {
    return Mat(vec1(m(0)).asDiagonal());  // negative left of zero
  });
  FamilyDescriptor f;
  f.dim = 1;
  f.variance = vm;
  f.psi_direct = [](const Vec& m) { return m; };
  f.kpsi_direct = [](const Vec&) { return 0.0; };
  MeanParam mp = make_mean_param(f);
  CHECK_THROWS_AS(mp.logdetV(vec1(-0.5)), SingularityError);
}
