#pragma once

#include <json.hpp>
#include <set>
#include <string>

#include "neflab/catalog.hpp"
#include "neflab/cubic.hpp"
#include "neflab/legendre.hpp"

namespace neflab {
namespace io {

using json = nlohmann::json;

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& known,
                           const std::string& path) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key()))
      throw ParseError("unknown field '" + it.key() + "'", path);
}

inline Vec parse_vec(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ParseError("expected array", path);
  Vec v(arr.size());
  for (size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError("expected number", path);
    v(i) = arr[i].get<double>();
  }
  return v;
}

inline json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace detail

inline json domain_to_json(const Domain& d) {
  json j;
  switch (d.kind()) {
    case DomainKind::Box: j["kind"] = "box"; break;
    case DomainKind::HalfspaceIntersection:
      j["kind"] = "halfspace-intersection";
      break;
    case DomainKind::Predicate:
      j["kind"] = "predicate-with-bounding-box";
      break;
  }
  j["box_lo"] = detail::vec_to_json(d.box_lo());
  j["box_hi"] = detail::vec_to_json(d.box_hi());
  if (!d.halfspaces().empty()) {
    json hs = json::array();
    for (const auto& [normal, offset] : d.halfspaces())
      hs.push_back({{"normal", detail::vec_to_json(normal)}, {"offset", offset}});
    j["halfspaces"] = hs;
  }
  return j;
}

inline Domain parse_domain(const json& j, const std::string& path) {
  detail::reject_unknown(j, {"kind", "box_lo", "box_hi", "halfspaces"}, path);
  if (!j.contains("box_lo") || !j.contains("box_hi"))
    throw ParseError("domain needs box_lo/box_hi", path);
  Domain d = Domain::box(detail::parse_vec(j["box_lo"], path + ".box_lo"),
                         detail::parse_vec(j["box_hi"], path + ".box_hi"));
  std::string kind = j.value("kind", "box");
  if (kind != "box" && kind != "halfspace-intersection" &&
      kind != "predicate-with-bounding-box")
    throw ParseError("unknown domain kind '" + kind + "'", path + ".kind");
  if (j.contains("halfspaces")) {
    for (size_t i = 0; i < j["halfspaces"].size(); ++i) {
      const json& h = j["halfspaces"][i];
      detail::reject_unknown(h, {"normal", "offset"}, path + ".halfspaces");
      d.add_halfspace(detail::parse_vec(h["normal"], path + ".normal"),
                      h.value("offset", 0.0));
    }
  }
  return d;
}

inline json variance_to_json(const VarianceModel& vm) {
  json j;
  json entries = json::array();
  for (int i = 0; i < vm.dim(); ++i)
    for (int k = i; k < vm.dim(); ++k) {
      json terms = json::array();
      for (const auto& [e, c] : vm.poly().at(i, k).terms()) {
        json exps = json::array();
        for (int x : e) exps.push_back(x);
        terms.push_back({{"exponents", exps}, {"coeff", c}});
      }
      entries.push_back({{"row", i}, {"col", k}, {"terms", terms}});
    }
  j["entries"] = entries;
  j["mean_domain"] = domain_to_json(vm.mean_domain());
  return j;
}

inline VarianceModel parse_variance(const json& j, int dim,
                                    const std::string& path) {
  detail::reject_unknown(j, {"entries", "mean_domain"}, path);
  if (!j.contains("entries") || !j.contains("mean_domain"))
    throw ParseError("variance needs entries and mean_domain", path);
  Domain md = parse_domain(j["mean_domain"], path + ".mean_domain");
  PolyMat pm(dim, dim, dim);
  std::vector<std::vector<bool>> given(dim, std::vector<bool>(dim, false));
  for (size_t i = 0; i < j["entries"].size(); ++i) {
    const json& e = j["entries"][i];
    std::string epath = path + ".entries[" + std::to_string(i) + "]";
    detail::reject_unknown(e, {"row", "col", "terms"}, epath);
    int r = e.value("row", -1), c = e.value("col", -1);
    if (r < 0 || r >= dim || c < 0 || c >= dim)
      throw ParseError("entry index out of range", epath);
    Poly p(dim);
    for (const json& t : e["terms"]) {
      detail::reject_unknown(t, {"exponents", "coeff"}, epath + ".terms");
      if (!t.contains("exponents") || !t.contains("coeff"))
        throw ParseError("term needs exponents and coeff", epath);
      std::vector<int> exps;
      for (const json& x : t["exponents"]) exps.push_back(x.get<int>());
      if (static_cast<int>(exps.size()) != dim)
        throw ParseError("exponent arity mismatch", epath);
      p.add_term(exps, t["coeff"].get<double>());
    }
    if (given[r][c] || given[c][r]) {
      Poly diff = pm.at(r, c) - p;
      if (diff.max_abs_coeff() > 1e-12)
        throw ValidationError("variance entries (" + std::to_string(r) + "," +
                              std::to_string(c) + ") disagree with mirror");
    }
    pm.at(r, c) = p;
    if (!given[c][r]) pm.at(c, r) = p;
    given[r][c] = true;
  }
  return VarianceModel(dim, md, pm);  // degree/symmetry enforced there
}

inline json cumulant_recipe_to_json(const FamilyDescriptor& fam) {
  json c;
  c["kind"] = fam.catalog_kind;
  if (!fam.catalog_params.empty()) {
    json p;
    for (const auto& [k, v] : fam.catalog_params) p[k] = v;
    c["params"] = p;
  }
  return c;
}

inline json serialize_descriptor(const FamilyDescriptor& fam) {
  json j;
  j["name"] = fam.name;
  j["dimension"] = fam.dim;
  if (!fam.catalog_kind.empty()) j["cumulant"] = cumulant_recipe_to_json(fam);
  if (fam.variance && fam.variance->has_poly())
    j["variance"] = variance_to_json(*fam.variance);
  json prov;
  if (!fam.provenance.base.empty()) prov["base"] = fam.provenance.base;
  if (fam.provenance.beta)
    prov["beta"] = detail::vec_to_json(*fam.provenance.beta);
  if (fam.provenance.power) prov["power"] = *fam.provenance.power;
  if (!fam.provenance.note.empty()) prov["note"] = fam.provenance.note;
  if (!prov.empty()) j["provenance"] = prov;
  return j;
}

inline FamilyDescriptor parse_cumulant(const json& c, const std::string& path);

inline FamilyDescriptor parse_descriptor(const json& j) {
  detail::reject_unknown(j, {"name", "dimension", "cumulant", "variance",
                             "provenance"},
                         "$");
  if (!j.contains("dimension") || !j["dimension"].is_number_integer())
    throw ParseError("dimension must be an integer", "$.dimension");
  int dim = j["dimension"].get<int>();
  if (dim < 1) throw ParseError("dimension must be positive", "$.dimension");
  if (!j.contains("cumulant") && !j.contains("variance"))
    throw ParseError("descriptor needs a cumulant or a variance", "$");

  FamilyDescriptor fam;
  if (j.contains("cumulant")) {
    fam = parse_cumulant(j["cumulant"], "$.cumulant");
    if (fam.dim != dim)
      throw ValidationError("cumulant dimension disagrees with descriptor");
  } else {
    fam.dim = dim;
  }
  if (j.contains("name")) fam.name = j["name"].get<std::string>();

  if (j.contains("variance")) {
    VarianceModel vm = parse_variance(j["variance"], dim, "$.variance");
    if (fam.cumulant) {
      // Cross-check V(m) = k''(psi(m)) on a few interior points.
      for (const Vec& m : vm.mean_domain().grid(3, 0.2)) {
        Mat a = vm.at(m);
        Mat b = variance_at(fam, m);
        double rel = (a - b).norm() / std::max(1.0, b.norm());
        if (rel > 1e-6)
          throw ValidationError(
              "variance model disagrees with the cumulant family");
      }
    }
    fam.variance = vm;
  }
  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    detail::reject_unknown(p, {"base", "beta", "power", "note"},
                           "$.provenance");
    if (p.contains("base")) fam.provenance.base = p["base"].get<std::string>();
    if (p.contains("beta"))
      fam.provenance.beta = detail::parse_vec(p["beta"], "$.provenance.beta");
    if (p.contains("power")) fam.provenance.power = p["power"].get<double>();
    if (p.contains("note")) fam.provenance.note = p["note"].get<std::string>();
  }
  return fam;
}

// Cumulant recipes: a catalog id, an independent product of catalog
// entries, or a cubic transform of another descriptor.
inline FamilyDescriptor parse_cumulant(const json& c, const std::string& path) {
  detail::reject_unknown(
      c, {"kind", "params", "parts", "base", "beta", "k0", "lambda0"}, path);
  if (!c.contains("kind")) throw ParseError("cumulant needs kind", path);
  std::string kind = c["kind"].get<std::string>();
  std::map<std::string, double> params;
  if (c.contains("params"))
    for (auto it = c["params"].begin(); it != c["params"].end(); ++it)
      params[it.key()] = it.value().get<double>();

  if (kind == "product") {
    if (!c.contains("parts")) throw ParseError("product needs parts", path);
    std::vector<FamilyDescriptor> parts;
    for (const json& p : c["parts"])
      parts.push_back(parse_cumulant(p, path + ".parts"));
    return catalog::product_family(parts);
  }
  if (kind == "transformed") {
    if (!c.contains("base") || !c.contains("beta"))
      throw ParseError("transformed needs base and beta", path);
    FamilyDescriptor base = parse_descriptor(c["base"]);
    Vec beta = detail::parse_vec(c["beta"], path + ".beta");
    double k0 = c.value("k0", 0.0);
    std::optional<Vec> l0;
    if (c.contains("lambda0"))
      l0 = detail::parse_vec(c["lambda0"], path + ".lambda0");
    return cubic_transform(base, beta, k0, l0);
  }
  return catalog::build(kind, params);
}

inline FamilyDescriptor parse_descriptor_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "$");
  }
  return parse_descriptor(j);
}

}  // namespace io
}  // namespace neflab
