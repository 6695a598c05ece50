#pragma once

#include <cmath>
#include <memory>

#include "neflab/legendre.hpp"
#include "neflab/quadrature.hpp"

namespace neflab {

// Mean-parametrized view of a family: psi(m), k(psi(m)), V(m) and
// log det V(m).  Three sources, in order of preference:
//   - a direct inverse mean map attached to the descriptor,
//   - Newton inversion of the cumulant gradient (with warm starts),
//   - for 1-D variance-only families, reconstruction by quadrature from
//     psi' = V^{-1} and (k o psi)' = m / V(m); both are then defined up
//     to additive constants, which downstream fits absorb.
struct MeanParam {
  std::function<Vec(const Vec&)> psi;
  std::function<double(const Vec&)> kpsi;
  std::function<Mat(const Vec&)> variance;
  std::function<double(const Vec&)> logdetV;
};

inline MeanParam make_mean_param(const FamilyDescriptor& fam) {
  MeanParam mp;
  FamilyDescriptor f = fam;

  if (f.variance) {
    auto vm = *f.variance;
    mp.variance = [vm](const Vec& m) { return vm.at(m); };
  }

  if (f.psi_direct && f.kpsi_direct) {
    mp.psi = f.psi_direct;
    mp.kpsi = f.kpsi_direct;
    if (!mp.variance) {
      mp.variance = [f](const Vec& m) {
        return f.cumulant->hess_at(f.psi_direct(m));
      };
    }
  } else if (f.cumulant) {
    auto warm = std::make_shared<std::optional<Vec>>();
    auto solve = [f, warm](const Vec& m) {
      NewtonConfig cfg;
      if (*warm) {
        cfg.init = **warm;
        try {
          Vec t = invert_mean_map(f, m, cfg);
          **warm = t;
          return t;
        } catch (const std::exception&) {
          // fall through to a cold start
        }
      }
      cfg.init.reset();
      Vec t = invert_mean_map(f, m, cfg);
      *warm = t;
      return t;
    };
    mp.psi = solve;
    mp.kpsi = [f, solve](const Vec& m) { return f.cumulant->k(solve(m)); };
    if (!mp.variance)
      mp.variance = [f, solve](const Vec& m) {
        return f.cumulant->hess_at(solve(m));
      };
  } else {
    require(f.variance.has_value() && f.dim == 1,
            "mean parametrization needs a cumulant or a 1-D variance model");
    auto vm = *f.variance;
    double mref = vm.mean_domain().center()(0);
    auto vfun = [vm](double x) { return vm.at(vec1(x))(0, 0); };
    mp.psi = [vfun, mref](const Vec& m) {
      return vec1(quad::adaptive_simpson(
          [vfun](double x) { return 1.0 / vfun(x); }, mref, m(0), 1e-12));
    };
    mp.kpsi = [vfun, mref](const Vec& m) {
      return quad::adaptive_simpson([vfun](double x) { return x / vfun(x); },
                                    mref, m(0), 1e-12);
    };
  }

  auto var = mp.variance;
  mp.logdetV = [var](const Vec& m) {
    Mat v = var(m);
    double det = v.determinant();
    if (det <= 0.0)
      throw SingularityError("variance determinant non-positive");
    return std::log(det);
  };
  return mp;
}

}  // namespace neflab
