// neflab: natural exponential family toolbox CLI.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "neflab/battery.hpp"
#include "neflab/json_io.hpp"

namespace {

using namespace neflab;
using nlohmann::json;

constexpr const char* kSchema = R"SCHEMA({
  "descriptor": {
    "type": "object",
    "required": ["dimension"],
    "additionalProperties": false,
    "properties": {
      "name": {"type": "string"},
      "dimension": {"type": "integer", "minimum": 1},
      "cumulant": {
        "type": "object",
        "required": ["kind"],
        "properties": {
          "kind": {"enum": ["normal", "poisson", "gamma", "binomial",
                            "negative-binomial", "hyperbolic-cosine",
                            "inverse-gaussian", "product", "transformed"]},
          "params": {"type": "object"},
          "parts": {"type": "array"},
          "base": {"$ref": "#/descriptor"},
          "beta": {"type": "array", "items": {"type": "number"}},
          "k0": {"type": "number"},
          "lambda0": {"type": "array", "items": {"type": "number"}}
        }
      },
      "variance": {
        "type": "object",
        "required": ["entries", "mean_domain"],
        "properties": {
          "entries": {"type": "array", "items": {
            "type": "object",
            "required": ["row", "col", "terms"],
            "properties": {
              "row": {"type": "integer"},
              "col": {"type": "integer"},
              "terms": {"type": "array", "items": {
                "type": "object",
                "required": ["exponents", "coeff"],
                "properties": {
                  "exponents": {"type": "array", "items": {"type": "integer"}},
                  "coeff": {"type": "number"}
                }
              }}
            }
          }},
          "mean_domain": {"$ref": "#/domain"}
        }
      },
      "provenance": {"type": "object"}
    }
  },
  "domain": {
    "type": "object",
    "required": ["box_lo", "box_hi"],
    "properties": {
      "kind": {"enum": ["box", "halfspace-intersection",
                        "predicate-with-bounding-box"]},
      "box_lo": {"type": "array", "items": {"type": "number"}},
      "box_hi": {"type": "array", "items": {"type": "number"}},
      "halfspaces": {"type": "array", "items": {
        "type": "object",
        "properties": {
          "normal": {"type": "array", "items": {"type": "number"}},
          "offset": {"type": "number"}
        }
      }}
    }
  },
  "verdict_report": {
    "type": "object",
    "properties": {
      "family": {"type": "string"},
      "seed": {"type": "integer"},
      "agreement": {"type": "boolean"},
      "overall_pass": {"type": "boolean"},
      "quadratic_pass": {"type": "boolean"},
      "verdicts": {"type": "array", "items": {
        "type": "object",
        "properties": {
          "beta": {"oneOf": [{"const": "quadratic-mode"},
                             {"type": "array", "items": {"type": "number"}}]},
          "p1": {"$ref": "#/fit"}, "p2": {"$ref": "#/fit"},
          "p3": {"$ref": "#/fit"},
          "agreement": {"type": "boolean"},
          "all_pass": {"type": "boolean"},
          "ode": {"type": "object"}
        }
      }}
    }
  },
  "fit": {
    "type": "object",
    "properties": {
      "applicable": {"type": "boolean"},
      "a": {"type": "array", "items": {"type": "number"}},
      "b": {"type": "number"}, "c": {"type": "number"},
      "residual": {"type": "number"},
      "grid_size": {"type": "integer"},
      "pass": {"type": "boolean"},
      "note": {"type": "string"}
    }
  }
})SCHEMA";

Vec parse_vector(const std::string& text) {
  std::vector<double> vals;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    vals.push_back(std::stod(tok));
  }
  Vec v(vals.size());
  for (size_t i = 0; i < vals.size(); ++i) v(i) = vals[i];
  return v;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

FamilyDescriptor load_family(const std::string& spec,
                             const std::map<std::string, double>& params) {
  auto ids = catalog::ids();
  if (std::find(ids.begin(), ids.end(), spec) != ids.end())
    return catalog::build(spec, params);
  std::ifstream in(spec);
  if (!in) throw std::invalid_argument("not a catalog id or readable file: " + spec);
  std::stringstream buf;
  buf << in.rdbuf();
  return io::parse_descriptor_text(buf.str());
}

std::map<std::string, double> parse_params(const std::vector<std::string>& kvs) {
  std::map<std::string, double> out;
  for (const auto& kv : kvs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected name=value: " + kv);
    out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
  return out;
}

json fit_json(const FitResult& f) {
  json j;
  j["applicable"] = f.applicable;
  if (f.applicable) {
    j["a"] = vec_json(f.a);
    j["b"] = f.b;
    j["c"] = f.c;
    j["residual"] = f.residual;
    j["grid_size"] = f.grid_size;
  }
  j["pass"] = f.pass;
  if (!f.note.empty()) j["note"] = f.note;
  return j;
}

json report_json(const VerdictReport& r, long seed) {
  json j;
  j["family"] = r.family;
  j["seed"] = seed;
  j["agreement"] = r.agreement;
  j["overall_pass"] = r.overall_pass;
  j["quadratic_pass"] = r.quadratic_pass;
  if (r.passing_beta) j["passing_beta"] = vec_json(*r.passing_beta);
  json vs = json::array();
  for (const auto& v : r.verdicts) {
    json vj;
    if (v.beta) vj["beta"] = vec_json(*v.beta);
    else vj["beta"] = "quadratic-mode";
    vj["p1"] = fit_json(v.p1);
    vj["p2"] = fit_json(v.p2);
    vj["p3"] = fit_json(v.p3);
    vj["all_pass"] = v.all_pass;
    vj["agreement"] = v.agreement;
    if (v.ode_match) {
      vj["ode"] = {{"beta", v.ode_match->beta},
                   {"a", v.ode_match->a},
                   {"b", v.ode_match->b},
                   {"lambda", v.ode_match->lam}};
    }
    vs.push_back(vj);
  }
  j["verdicts"] = vs;
  return j;
}

int run(int argc, char** argv) {
  CLI::App app{"neflab: cumulant/variance toolbox for natural exponential families"};
  app.require_subcommand(0, 1);
  long seed = 0;
  bool show_schema = false;
  app.add_option("--seed", seed, "seed echoed into reports");
  app.add_flag("--schema", show_schema, "print the JSON schemas and exit");
  if (const char* threads = std::getenv("NEFLAB_THREADS")) {
    (void)threads;  // evaluation is single-threaded and deterministic
  }

  // catalog
  auto* cat = app.add_subcommand("catalog", "list or show catalog families");
  auto* cat_list = cat->add_subcommand("list", "list ids");
  auto* cat_show = cat->add_subcommand("show", "print a descriptor");
  std::string show_id;
  std::vector<std::string> show_params;
  cat_show->add_option("id", show_id)->required();
  cat_show->add_option("--param", show_params, "name=value");

  // eval
  auto* ev = app.add_subcommand("eval", "evaluate k, k', k'' and V");
  std::string ev_family, ev_theta, ev_mean;
  std::vector<std::string> ev_params;
  ev->add_option("--family", ev_family)->required();
  ev->add_option("--param", ev_params, "name=value");
  ev->add_option("--theta", ev_theta, "comma-separated point of Theta");
  ev->add_option("--m", ev_mean, "comma-separated mean point");

  // transform
  auto* tr = app.add_subcommand("transform", "cubic construction at variance level");
  std::string tr_family, tr_beta, tr_lambda0;
  std::vector<std::string> tr_params;
  bool tr_inverse = false;
  double tr_k0 = 0.0;
  tr->add_option("--family", tr_family)->required();
  tr->add_option("--param", tr_params, "name=value");
  tr->add_option("--beta", tr_beta)->required();
  tr->add_flag("--inverse", tr_inverse, "apply the inverse relation");
  tr->add_option("--k0", tr_k0);
  tr->add_option("--lambda0", tr_lambda0);

  // verify
  auto* vf = app.add_subcommand("verify", "run the three property checks");
  std::string vf_family, vf_beta = "auto", vf_props = "1,2,3", vf_csv;
  std::vector<std::string> vf_params;
  double tol_p1 = 1e-6, tol_p2 = 1e-6, tol_p3 = 1e-4;
  int vf_grid = 25;
  vf->add_option("--family", vf_family)->required();
  vf->add_option("--param", vf_params, "name=value");
  vf->add_option("--beta", vf_beta, "'auto' or semicolon list of comma vectors");
  vf->add_option("--properties", vf_props, "subset of 1,2,3");
  vf->add_option("--tol-p1", tol_p1);
  vf->add_option("--tol-p2", tol_p2);
  vf->add_option("--tol-p3", tol_p3);
  vf->add_option("--grid", vf_grid);
  vf->add_option("--csv", vf_csv, "write per-point P1 residuals");

  // priors
  auto* pr = app.add_subcommand("priors", "prior log-densities and normalizers");
  std::string pr_family, pr_tag = "PI", pr_m0, pr_beta;
  std::vector<std::string> pr_params;
  double pr_t = 1.0, pr_a = 0.0, pr_b = 0.0;
  int pr_grid = 41;
  bool pr_push = false;
  pr->add_option("--family", pr_family)->required();
  pr->add_option("--param", pr_params, "name=value");
  pr->add_option("--family-tag", pr_tag, "PI | PI_STAR | PI_TILDE");
  pr->add_option("--t", pr_t);
  pr->add_option("--m0", pr_m0)->required();
  pr->add_option("--beta", pr_beta);
  pr->add_option("--a", pr_a, "omega shift (reported only)");
  pr->add_option("--b", pr_b, "omega tilt (reported only)");
  pr->add_option("--grid", pr_grid);
  pr->add_flag("--pushforward", pr_push, "emit the mean-map pushforward density");

  // ode
  auto* od = app.add_subcommand("ode", "the 1-D cubic variance ODE");
  auto* od_solve = od->add_subcommand("solve", "closed-form solution");
  double os_beta = 1.0, os_a = 0.0, os_b = 0.0, os_lam = 0.0;
  od_solve->add_option("--beta", os_beta)->required();
  od_solve->add_option("--a", os_a);
  od_solve->add_option("--b", os_b);
  od_solve->add_option("--lambda", os_lam);
  auto* od_match = od->add_subcommand("match", "membership test for a cubic");
  std::string om_poly;
  double om_beta = 1.0;
  od_match->add_option("--poly", om_poly, "c0,c1,c2,c3")->required();
  od_match->add_option("--beta", om_beta)->required();
  auto* od_int = od->add_subcommand("integrate", "RK4 trajectory (CSV)");
  double oi_beta = 1.0, oi_a = 0.0, oi_b = 0.0, oi_v0 = 1.0;
  std::string oi_span;
  od_int->add_option("--beta", oi_beta)->required();
  od_int->add_option("--a", oi_a);
  od_int->add_option("--b", oi_b);
  od_int->add_option("--v0", oi_v0, "V at the left end of the span")->required();
  od_int->add_option("--span", oi_span, "lo,hi")->required();

  // battery
  auto* bt = app.add_subcommand("battery", "run the full verification battery");
  int bt_grid = 25;
  bt->add_option("--grid", bt_grid);

  // let --seed / --schema appear after a subcommand as well
  for (CLI::App* s : {cat, cat_list, cat_show, ev, tr, vf, pr, od, od_solve,
                      od_match, od_int, bt})
    s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  if (show_schema) {
    std::cout << kSchema << "\n";
    return 0;
  }

  if (cat->parsed()) {
    if (cat_list->parsed() || !cat_show->parsed()) {
      for (const auto& id : catalog::ids()) std::cout << id << "\n";
      return 0;
    }
    auto fam = catalog::build(show_id, parse_params(show_params));
    std::cout << io::serialize_descriptor(fam).dump(2) << "\n";
    return 0;
  }

  if (ev->parsed()) {
    auto fam = load_family(ev_family, parse_params(ev_params));
    json out;
    out["family"] = fam.name;
    out["seed"] = seed;
    if (!ev_theta.empty()) {
      Vec theta = parse_vector(ev_theta);
      require(fam.cumulant.has_value(), "family has no cumulant evaluator");
      out["theta"] = vec_json(theta);
      out["k"] = fam.cumulant->k(theta);
      out["grad_k"] = vec_json(fam.cumulant->grad_at(theta));
      Mat h = fam.cumulant->hess_at(theta);
      json hj = json::array();
      for (int i = 0; i < h.rows(); ++i) hj.push_back(vec_json(h.row(i)));
      out["hess_k"] = hj;
    }
    if (!ev_mean.empty()) {
      Vec m = parse_vector(ev_mean);
      MeanParam mp = make_mean_param(fam);
      out["m"] = vec_json(m);
      out["psi"] = vec_json(mp.psi(m));
      out["k_at_psi"] = mp.kpsi(m);
      Mat v = mp.variance(m);
      json vj = json::array();
      for (int i = 0; i < v.rows(); ++i) vj.push_back(vec_json(v.row(i)));
      out["variance"] = vj;
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (tr->parsed()) {
    auto fam = load_family(tr_family, parse_params(tr_params));
    Vec beta = parse_vector(tr_beta);
    require(fam.variance && fam.variance->has_poly(),
            "transform needs a polynomial variance model");
    json out;
    if (tr_inverse) {
      VarianceModel v1 = inverse_variance(*fam.variance, beta);
      FamilyDescriptor inv;
      inv.name = fam.name + "#inverse";
      inv.dim = fam.dim;
      inv.variance = v1;
      inv.provenance.base = fam.name;
      inv.provenance.beta = beta;
      out = io::serialize_descriptor(inv);
    } else if (fam.cumulant) {
      std::optional<Vec> l0;
      if (!tr_lambda0.empty()) l0 = parse_vector(tr_lambda0);
      FamilyDescriptor cub = cubic_transform(fam, beta, tr_k0, l0);
      out = io::serialize_descriptor(cub);
      if (!fam.catalog_kind.empty()) {
        json c;
        c["kind"] = "transformed";
        c["base"] = io::serialize_descriptor(fam);
        c["beta"] = vec_json(beta);
        if (tr_k0 != 0.0) c["k0"] = tr_k0;
        if (l0) c["lambda0"] = vec_json(*l0);
        out["cumulant"] = c;
      }
    } else {
      VarianceModel v = forward_variance(*fam.variance, beta);
      FamilyDescriptor fwd;
      fwd.name = fam.name + "#cubic";
      fwd.dim = fam.dim;
      fwd.variance = v;
      fwd.provenance.base = fam.name;
      fwd.provenance.beta = beta;
      out = io::serialize_descriptor(fwd);
    }
    std::cout << out.dump(2) << "\n";
    return 0;
  }

  if (vf->parsed()) {
    auto fam = load_family(vf_family, parse_params(vf_params));
    ClassifyConfig cfg;
    cfg.tol_p1 = tol_p1;
    cfg.tol_p2 = tol_p2;
    cfg.tol_p3 = tol_p3;
    cfg.grid_per_axis = vf_grid;
    cfg.run_p3 = vf_props.find('3') != std::string::npos;
    if (vf_beta != "auto") {
      std::stringstream ss(vf_beta);
      std::string tok;
      while (std::getline(ss, tok, ';'))
        if (!tok.empty()) cfg.user_betas.push_back(parse_vector(tok));
    }
    VerdictReport rep = classify(fam, cfg);
    std::cout << report_json(rep, seed).dump(2) << "\n";

    if (!vf_csv.empty()) {
      std::ofstream csv(vf_csv);
      csv << "beta,point,y,fit,residual\n";
      MeanParam mp = make_mean_param(fam);
      auto grid = fam.mean_domain().grid(cfg.grid_per_axis, cfg.grid_shrink);
      csv.precision(17);
      for (const auto& v : rep.verdicts) {
        if (!v.p1.applicable || v.p1.a.size() == 0) continue;
        for (const Vec& m : grid) {
          double s = 1.0;
          if (v.beta) {
            s = 1.0 + v.beta->dot(m);
            if (std::fabs(s) < 1e-8) continue;
          }
          double y = mp.logdetV(m);
          if (v.beta) y -= (fam.dim + 2) * std::log(std::fabs(s));
          double fit = v.p1.a.dot(mp.psi(m)) + v.p1.b * mp.kpsi(m) + v.p1.c;
          std::string betatxt = "quadratic-mode";
          if (v.beta) {
            std::stringstream bs;
            bs << v.beta->transpose();
            betatxt = bs.str();
          }
          csv << '"' << betatxt << '"' << ',' << '"' << m.transpose() << '"'
              << ',' << y << ',' << fit << ',' << (y - fit) << "\n";
        }
      }
    }
    return 0;
  }

  if (pr->parsed()) {
    auto fam = load_family(pr_family, parse_params(pr_params));
    Vec m0 = parse_vector(pr_m0);
    PriorFamilyTag tag = PriorFamilyTag::PI;
    if (pr_tag == "PI_STAR") tag = PriorFamilyTag::PI_STAR;
    else if (pr_tag == "PI_TILDE") tag = PriorFamilyTag::PI_TILDE;
    else if (pr_tag != "PI") throw std::invalid_argument("bad family tag");
    std::optional<Vec> beta;
    if (!pr_beta.empty()) beta = parse_vector(pr_beta);
    PriorSpec spec(tag, pr_t, m0, beta);
    MeanParam mp = make_mean_param(fam);
    const Domain& dom = tag == PriorFamilyTag::PI
                            ? fam.cumulant->theta_domain
                            : fam.variance->mean_domain();
    pr_push = pr_push && tag != PriorFamilyTag::PI;  // mean-side only
    std::cout.precision(17);
    std::cout << "point,log_density";
    if (pr_push) std::cout << ",pushforward_log_density";
    std::cout << "\n";
    for (const Vec& x : dom.grid(pr_grid)) {
      std::cout << '"' << x.transpose() << '"' << ','
                << log_density(spec, fam, x, mp);
      if (pr_push)
        std::cout << ',' << pushforward_log_density(fam, pr_t, m0, x, mp);
      std::cout << "\n";
    }
    json summary;
    summary["family"] = fam.name;
    summary["family_tag"] = pr_tag;
    summary["seed"] = seed;
    summary["t"] = pr_t;
    summary["m0"] = vec_json(m0);
    summary["omega"] = {{"a", pr_a}, {"b", pr_b}};
    try {
      double c = normalizer(spec, fam);
      summary["normalizer"] = c;
      summary["log_mass"] = -std::log(c);
      summary["normalizable"] = true;
    } catch (const NonNormalizableError& e) {
      summary["normalizable"] = false;
      summary["error"] = e.what();
    }
    std::cerr << summary.dump(2) << "\n";
    return 0;
  }

  if (od->parsed()) {
    if (od_solve->parsed()) {
      auto c = ode::solve_closed_form(ode::OdeParams(os_beta, os_a, os_b, os_lam));
      json out = {{"coefficients", {c[0], c[1], c[2], c[3]}},
                  {"seed", seed}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (od_match->parsed()) {
      Vec cv = parse_vector(om_poly);
      require(cv.size() == 4, "--poly needs c0,c1,c2,c3");
      ode::Cubic c{cv(0), cv(1), cv(2), cv(3)};
      auto m = ode::match_cubic_to_ode(c, om_beta);
      json out;
      out["seed"] = seed;
      out["member"] = m.has_value();
      if (m)
        out["params"] = {{"beta", m->beta}, {"a", m->a}, {"b", m->b},
                         {"lambda", m->lam}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (od_int->parsed()) {
      Vec span = parse_vector(oi_span);
      require(span.size() == 2, "--span needs lo,hi");
      auto tr2 = ode::integrate_numeric(oi_beta, oi_a, oi_b, oi_v0, span(0),
                                        span(1));
      std::cout.precision(17);
      std::cout << "m,v\n";
      for (size_t i = 0; i < tr2.m.size(); ++i)
        std::cout << tr2.m[i] << ',' << tr2.v[i] << "\n";
      return 0;
    }
    std::cerr << od->help();
    return 1;
  }

  if (bt->parsed()) {
    ClassifyConfig cfg;
    cfg.grid_per_axis = bt_grid;
    auto res = battery::run(cfg);
    json out;
    out["seed"] = seed;
    json rows = json::array();
    for (const auto& row : res.rows) {
      rows.push_back({{"family", row.family},
                      {"expect_pass", row.expect_pass},
                      {"pass", row.report.overall_pass},
                      {"verdict_ok", row.verdict_ok},
                      {"agreement", row.agreement},
                      {"report", report_json(row.report, seed)}});
    }
    out["families"] = rows;
    out["all_agree"] = res.all_agree;
    out["all_verdicts_ok"] = res.all_verdicts_ok;
    std::cout << out.dump(2) << "\n";
    return res.all_agree && res.all_verdicts_ok ? 0 : 3;
  }

  std::cerr << app.help();
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const neflab::ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const neflab::SingularityError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const neflab::DomainEscapeError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const neflab::NonNormalizableError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
