#include <doctest.h>

#include "neflab/json_io.hpp"

using namespace neflab;
using nlohmann::json;

TEST_CASE("catalog lists seven families and builds them") {
  auto ids = catalog::ids();
  CHECK(ids.size() == 7);
  for (const auto& id : ids) {
    std::map<std::string, double> params;
    if (id == "binomial") params["trials"] = 2;
    auto fam = catalog::build(id, params);
    CHECK(fam.dim == 1);
    CHECK(fam.cumulant.has_value());
    CHECK(fam.variance.has_value());
    CHECK(fam.catalog_kind == id);
  }
  CHECK_THROWS(catalog::build("cauchy"));
  CHECK_THROWS_AS(catalog::build("normal", {{"bogus", 1.0}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(catalog::build("binomial", {{"trials", 2.5}}),
                  std::invalid_argument);
}

TEST_CASE("product determinant is the product of determinants") {
  auto a = catalog::poisson();
  auto b = catalog::gamma(2.0);
  auto prod = catalog::product_family({a, b});
  for (const Vec& m : prod.mean_domain().grid(7, 0.1)) {
    double lhs = prod.variance->at(m).determinant();
    double rhs = a.variance->at(vec1(m(0))).determinant() *
                 b.variance->at(vec1(m(1))).determinant();
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("descriptor serialization round trips") {
  auto fam = catalog::build("gamma", {{"shape", 2.0}});
  json j = io::serialize_descriptor(fam);
  auto back = io::parse_descriptor(j);
  CHECK(back.name == fam.name);
  CHECK(back.dim == 1);
  for (const Vec& m : fam.mean_domain().grid(9, 0.1)) {
    CHECK(back.variance->at(m)(0, 0) ==
          doctest::Approx(fam.variance->at(m)(0, 0)).epsilon(1e-12));
  }
  Vec t = vec1(-1.2);
  CHECK(back.cumulant->k(t) == doctest::Approx(fam.cumulant->k(t)));
}

TEST_CASE("parser rejects malformed descriptors") {
  auto parse = [](const std::string& text) {
    return io::parse_descriptor_text(text);
  };
  CHECK_THROWS_AS(parse("not json"), ParseError);
  CHECK_THROWS_AS(parse(R"({"name":"x"})"), ParseError);  // no dimension
  CHECK_THROWS_AS(parse(R"({"dimension":1})"), ParseError);  // nothing to build
  CHECK_THROWS_AS(parse(R"({"dimension":1,"cumulant":{"kind":"poisson"},
                            "extra":1})"),
                  ParseError);
  // degree-4 variance entry
  CHECK_THROWS_AS(
      parse(R"({"dimension":1,"variance":{
        "entries":[{"row":0,"col":0,
                    "terms":[{"exponents":[4],"coeff":1.0}]}],
        "mean_domain":{"box_lo":[0.1],"box_hi":[2.0]}}})"),
      ValidationError);
  // off-diagonal entries that disagree with their mirror
  CHECK_THROWS_AS(
      parse(R"({"dimension":2,"variance":{
        "entries":[
          {"row":0,"col":0,"terms":[{"exponents":[0,0],"coeff":1.0}]},
          {"row":1,"col":1,"terms":[{"exponents":[0,0],"coeff":1.0}]},
          {"row":0,"col":1,"terms":[{"exponents":[1,0],"coeff":1.0}]},
          {"row":1,"col":0,"terms":[{"exponents":[0,1],"coeff":1.0}]}],
        "mean_domain":{"box_lo":[-1,-1],"box_hi":[1,1]}}})"),
      ValidationError);
}

TEST_CASE("parser cross-checks variance against the cumulant") {
  // normal cumulant with the poisson variance V(m) = m: inconsistent.
  CHECK_THROWS_AS(
      io::parse_descriptor_text(R"({"dimension":1,
        "cumulant":{"kind":"normal"},
        "variance":{
          "entries":[{"row":0,"col":0,
                      "terms":[{"exponents":[1],"coeff":1.0}]}],
          "mean_domain":{"box_lo":[0.5],"box_hi":[3.0]}}})"),
      ValidationError);
}

TEST_CASE("transformed cumulant recipes parse and evaluate") {
  json j;
  j["dimension"] = 1;
  j["cumulant"] = {{"kind", "transformed"},
                   {"base", {{"dimension", 1},
                             {"cumulant", {{"kind", "poisson"}}}}},
                   {"beta", {1.0}}};
  auto fam = io::parse_descriptor(j);
  auto direct = cubic_transform(catalog::poisson(), vec1(1.0));
  // V(m) = m(1+m)^2
  const Poly& v = fam.variance->poly().at(0, 0);
  CHECK((v - direct.variance->poly().at(0, 0)).max_abs_coeff() < 1e-12);
}

TEST_CASE("product cumulant recipes parse") {
  json j;
  j["dimension"] = 2;
  j["cumulant"] = {{"kind", "product"},
                   {"parts", {{{"kind", "poisson"}},
                              {{"kind", "gamma"},
                               {"params", {{"shape", 2.0}}}}}}};
  auto fam = io::parse_descriptor(j);
  CHECK(fam.dim == 2);
  Vec t = vec2(0.2, -1.0);
  CHECK(fam.cumulant->k(t) ==
        doctest::Approx(std::exp(0.2) + 0.0).epsilon(1e-12));
}

TEST_CASE("domain serialization keeps halfspaces") {
  Domain d = Domain::box(vec1(0.1), vec1(5.0));
  d.add_halfspace(vec1(1.0), 0.0);
  json j = io::domain_to_json(d);
  Domain back = io::parse_domain(j, "$");
  CHECK(back.contains(vec1(1.0)));
  CHECK_FALSE(back.contains(vec1(-1.0)));
  CHECK(back.box_hi()(0) == doctest::Approx(5.0));
}
