#pragma once

#include <string>
#include <vector>

#include "neflab/catalog.hpp"
#include "neflab/verifier.hpp"

namespace neflab {
namespace battery {

struct Entry {
  FamilyDescriptor family;
  bool expect_pass;
  std::vector<Vec> probe_betas;  // extra candidates for negative cases
};

// The standard test battery: the six real quadratic catalog families,
// three constructed cubics, the shifted pure-cubic family (m-1)^3, the
// same family in raw position m^3, and a quartic counterexample.
inline std::vector<Entry> standard() {
  std::vector<Entry> out;
  const std::vector<std::string> morris = {
      "normal",   "poisson",           "gamma",
      "binomial", "negative-binomial", "hyperbolic-cosine"};
  for (const std::string& id : morris) {
    std::map<std::string, double> params;
    if (id == "binomial") params["trials"] = 3;
    if (id == "negative-binomial") params["shape"] = 2;
    out.push_back({catalog::build(id, params), true, {}});
  }

  out.push_back({cubic_transform(catalog::normal(), vec1(1.0)), true, {}});
  out.push_back({cubic_transform(catalog::poisson(), vec1(1.0)), true, {}});
  out.push_back({cubic_transform(catalog::product_family(
                                     {catalog::poisson(), catalog::poisson()}),
                                 vec2(1.0, 0.0)),
                 true,
                 {}});

  // Shifted inverse-Gaussian: V(m) = (m-1)^3 on m > 1; passes with
  // beta = -1.
  FamilyDescriptor shifted =
      affine_image(catalog::inverse_gaussian(), Mat::Identity(1, 1), vec1(1.0));
  shifted.name = "inverse-gaussian#shifted";
  out.push_back({shifted, true, {}});

  // Raw position m^3: no variance root away from zero, so candidates are
  // probes only; every one must fail.
  FamilyDescriptor raw = catalog::inverse_gaussian();
  out.push_back({raw, false, {vec1(1.0), vec1(2.0)}});

  // Quartic counterexample V(m) = m^4 on m > 0, reconstructed from the
  // variance alone.
  {
    Domain md = Domain::box(vec1(0.5), vec1(4.0));
    md.add_halfspace(vec1(1.0), 0.0);
    VarianceModel quartic(1, md, [](const Vec& m) {
      return Mat(vec1(std::pow(m(0), 4)).asDiagonal());
    });
    FamilyDescriptor f;
    f.name = "quartic-counterexample";
    f.dim = 1;
    f.variance = quartic;
    out.push_back({f, false, {vec1(1.0)}});
  }
  return out;
}

struct Row {
  std::string family;
  bool expect_pass;
  VerdictReport report;
  bool verdict_ok;   // classify outcome matches the expectation
  bool agreement;
};

struct Result {
  std::vector<Row> rows;
  bool all_agree = true;
  bool all_verdicts_ok = true;
};

inline Result run(const ClassifyConfig& base_cfg = {}) {
  Result res;
  for (const Entry& e : standard()) {
    ClassifyConfig cfg = base_cfg;
    cfg.user_betas = e.probe_betas;
    Row row;
    row.family = e.family.name;
    row.expect_pass = e.expect_pass;
    row.report = classify(e.family, cfg);
    row.agreement = row.report.agreement;
    row.verdict_ok = row.report.overall_pass == e.expect_pass;
    res.all_agree = res.all_agree && row.agreement;
    res.all_verdicts_ok = res.all_verdicts_ok && row.verdict_ok;
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace battery
}  // namespace neflab
