#pragma once
// psi-lattice command line front end. run() is usable in-process.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <thread>

#include "CLI11.hpp"
#include "psilat/json_io.hpp"

namespace psilat::cli {

// ---------------------------------------------------------------------------
// Inputs.

struct Input {
  enum class Kind { module, presentation, triple } kind = Kind::module;
  PhiGammaModule module;
  Presentation pres;
  ExampleTriple triple;
  json canonical;
};

inline UpSetFamily parse_family(const json& j, int n) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "empty") return family_empty(n);
    if (s == "all") return family_all_nonempty(n);
    throw ParseError("family must be \"empty\", \"all\" or a list of subsets");
  }
  if (!j.is_array()) throw ParseError("family must be \"empty\", \"all\" or a list of subsets");
  UpSetFamily F{n, {}};
  for (const auto& c : j) {
    unsigned mask = 0;
    for (int d : c.get<std::vector<int>>()) {
      if (d < 1 || d > n) throw ParameterOutOfRange("family member names direction " + std::to_string(d));
      mask |= 1u << (d - 1);
    }
    if (mask == 0) throw ParameterOutOfRange("family members must be nonempty");
    F.members.push_back(mask);
  }
  std::sort(F.members.begin(), F.members.end());
  F.members.erase(std::unique(F.members.begin(), F.members.end()), F.members.end());
  for (unsigned C : F.members)
    for (int d = 0; d < n; ++d)
      if (!F.contains(C | (1u << d))) throw ParameterOutOfRange("family is not closed under enlarging subsets");
  return F;
}

inline json family_json(const UpSetFamily& F) {
  json j = json::array();
  for (unsigned C : F.members) {
    json c = json::array();
    for (int d = 0; d < F.n; ++d)
      if (C >> d & 1u) c.push_back(d + 1);
    j.push_back(c);
  }
  return j;
}

/// Parameters of a worked example, with defaults filled in.
inline json canonical_example(const json& j) {
  detail::allow_keys(j, {"example", "q", "vars", "c", "m", "family", "alpha", "a", "s", "kappa"}, "example");
  const auto which = detail::get_req<std::string>(j, "example", "example");
  json o;
  o["example"] = which;
  o["q"] = detail::get_or<long>(j, "q", 3);
  if (which == "a") {
    const int n = detail::get_or<int>(j, "vars", 1);
    if (n < 1 || n > 3) throw ParameterOutOfRange("example (a) supports 1 to 3 variables");
    o["vars"] = n;
    o["c"] = detail::get_or<std::vector<long>>(j, "c", std::vector<long>(n, 1));
    o["m"] = detail::get_or<std::vector<int>>(j, "m", std::vector<int>(n, 0));
    o["family"] = family_json(parse_family(detail::get_or<json>(j, "family", "all"), n));
    if (o["c"].size() != static_cast<std::size_t>(n) || o["m"].size() != static_cast<std::size_t>(n))
      throw ParameterOutOfRange("example (a) needs one c and one m per variable");
  } else if (which == "b") {
    o["alpha"] = detail::get_or<long>(j, "alpha", 1);
    o["a"] = detail::get_or<int>(j, "a", 0);
  } else if (which == "c") {
    o["a"] = detail::get_or<int>(j, "a", 0);
    o["s"] = detail::get_or<int>(j, "s", 0);
  } else if (which == "d") {
    o["kappa"] = detail::get_or<int>(j, "kappa", 1);
    o["s"] = detail::get_or<int>(j, "s", 0);
  } else {
    throw ParseError("unknown example '" + which + "'");
  }
  return o;
}

inline Input example_input(const json& spec) {
  Input in;
  in.canonical = canonical_example(spec);
  const json& o = in.canonical;
  const std::string which = o["example"];
  const long q = o["q"];
  if (which == "a") {
    in.kind = Input::Kind::presentation;
    in.pres = example_a(q, o["c"].get<std::vector<long>>(), o["m"].get<std::vector<int>>(), parse_family(o["family"], o["vars"]));
    return in;
  }
  in.kind = Input::Kind::triple;
  if (which == "b") in.triple = example_b(q, o["alpha"], o["a"]);
  if (which == "c") in.triple = example_c(q, o["a"], o["s"]);
  if (which == "d") in.triple = example_d(q, o["kappa"], o["s"]);
  in.pres = in.triple.total;
  return in;
}

inline json triple_json(const ExampleTriple& T) {
  json j;
  j["total"] = presentation_json(T.total);
  j["sub"] = presentation_json(T.sub);
  j["quot"] = presentation_json(T.quot);
  json sm = json::array(), qm = json::array();
  for (int g : T.sub_map) sm.push_back(T.total.gens.at(g));
  for (int g : T.quot_map) qm.push_back(g < 0 ? json(nullptr) : json(T.quot.gens.at(g)));
  j["sub_map"] = sm;
  j["quot_map"] = qm;
  j["notes"] = T.notes;
  return j;
}

inline ExampleTriple parse_triple(const json& j) {
  detail::allow_keys(j, {"total", "sub", "quot", "sub_map", "quot_map", "notes"}, "sequence");
  ExampleTriple T;
  T.total = parse_presentation(j.at("total"));
  T.sub = parse_presentation(j.at("sub"));
  T.quot = parse_presentation(j.at("quot"));
  const auto sm = j.at("sub_map");
  const auto qm = j.at("quot_map");
  if (!sm.is_array() || static_cast<int>(sm.size()) != T.sub.ngens()) throw ParseError("sub_map needs one entry per sub generator");
  if (!qm.is_array() || static_cast<int>(qm.size()) != T.total.ngens()) throw ParseError("quot_map needs one entry per total generator");
  for (const auto& x : sm) T.sub_map.push_back(T.total.gen_index(x.get<std::string>()));
  for (const auto& x : qm) T.quot_map.push_back(x.is_null() ? -1 : T.quot.gen_index(x.get<std::string>()));
  T.notes = detail::get_or<std::vector<std::string>>(j, "notes", {});
  return T;
}

inline Input load_input(const std::string& path) {
  const json j = read_json_file(path);
  if (!j.is_object()) throw ParseError(path + ": top level must be an object");
  Input in;
  if (j.contains("example")) {
    in = example_input(j);
  } else if (j.contains("total")) {
    in.kind = Input::Kind::triple;
    in.triple = parse_triple(j);
    in.pres = in.triple.total;
    in.canonical = triple_json(in.triple);
  } else if (j.contains("phi")) {
    in.kind = Input::Kind::module;
    in.module = parse_module(j);
    in.canonical = module_json(in.module);
  } else if (j.contains("generators")) {
    in.kind = Input::Kind::presentation;
    in.pres = parse_presentation(j);
    in.canonical = presentation_json(in.pres);
  } else {
    throw ParseError(path + ": neither a module, a presentation, a sequence nor an example");
  }
  return in;
}

// ---------------------------------------------------------------------------
// Outcomes.

/// 1 for a failed mathematical check, 2 for everything operational.
inline int exit_code_for(const Error& e) {
  static const std::set<std::string> math = {"NotEtale", "CommutationFailure", "NotAdmissible", "NotEquivariant", "NotFullRank", "NotInvertible"};
  return math.count(e.kind()) ? 1 : 2;
}

struct Outcome {
  json report;
  int code = 0;
};

inline json skeleton(const std::string& command) {
  json r;
  r["version"] = kVersion;
  r["command"] = command;
  r["input"] = nullptr;
  r["result"] = nullptr;
  r["status"] = "ok";
  return r;
}

/// Runs f(report) and turns library errors into the report's error block.
template <class F>
Outcome guarded(const std::string& command, F&& f) {
  Outcome o{skeleton(command), 0};
  try {
    o.code = f(o.report);
    if (o.code == 1) o.report["status"] = "failed";
  } catch (const Error& e) {
    o.code = exit_code_for(e);
    o.report["status"] = o.code == 1 ? "failed" : "error";
    o.report["error"] = {{"kind", e.kind()}, {"message", e.what()}};
  } catch (const json::exception& e) {
    o.code = 2;
    o.report["status"] = "error";
    o.report["error"] = {{"kind", "ParseError"}, {"message", e.what()}};
  } catch (const std::exception& e) {
    o.code = 2;
    o.report["status"] = "error";
    o.report["error"] = {{"kind", "InternalError"}, {"message", e.what()}};
  }
  return o;
}

// ---------------------------------------------------------------------------
// Commands on a single input.

struct Options {
  std::optional<int> top;
  std::vector<std::string> gamma{"teich"};
  std::optional<std::string> var;
  std::optional<std::string> element;
  int random = 0;
  std::uint64_t seed = 0;
  bool diagonal = false;
  int bound = 10;
  std::string report = "module";
};

inline json derived_json(const DerivedModule& m) {
  const Field& k = *m.module.ring->field;
  json j;
  j["rank"] = m.rank();
  j["basis"] = m.basis_names;
  j["phi_matrix"] = lmatrix_json(k, m.A);
  j["phi_matrix_inverse"] = lmatrix_json(k, m.H);
  j["exact"] = m.exact;
  j["precision"] = m.precision;
  j["expansion_level"] = m.tower->top();
  j["admissibility"] = {{"clauses", m.admissibility.clauses}, {"delta_t_dim", m.admissibility.delta_t_dim},
                        {"nilpotency", m.admissibility.nilpotency}, {"phi_injective", m.admissibility.phi_injective}};
  j["module"] = module_json(m.module);
  return j;
}

inline json lattice_pair_json(const OneVarModule& M) {
  const DSharpResult ds = dsharp(M);
  const DNaturalResult dn = dnatural(M, ds.lattice);
  const QuotientReport qr = dn.lattice.quotient_dims(ds.lattice);
  json j;
  j["dsharp_basis"] = lattice_json(ds.lattice);
  j["dnatural_basis"] = lattice_json(dn.lattice);
  j["quotient_dim"] = qr.dim;
  j["quotient_divisors"] = qr.divisors;
  j["standard_pair_n"] = standard_pair(M).n;
  j["stabilization"] = {{"n0", ds.n0}, {"m0", ds.m0}, {"saturation_steps", dn.saturation_steps}};
  j["uniqueness_checked"] = ds.uniqueness_checked;
  return j;
}

inline OneVarModule engine_for(const Input& in, const Options& opt, json& extra) {
  if (in.kind == Input::Kind::module) {
    check_etale(in.module);
    if (in.module.nvars() == 1) return OneVarModule::from(in.module);
    if (!opt.diagonal) throw InvalidArgument("module has " + std::to_string(in.module.nvars()) + " variables; pass --diagonal to restrict");
    const PhiGammaModule R = diagonal_restriction(in.module);
    check_etale(R);
    extra["diagonal_restriction"] = module_json(R);
    return OneVarModule::from(R);
  }
  const DerivedModule m = derive_module(in.pres, opt.top);
  extra["derived"] = derived_json(m);
  return m.engine();
}

/// The certificate needs phi injective on Delta; otherwise it is not attempted.
inline Klara80Report klara80_or_skip(const Presentation& P, int top, const AdmissibilityReport& adm) {
  if (!adm.phi_injective) return {false, "not attempted: phi has a kernel on Delta"};
  return klara80_certify(P, top);
}

inline int cmd_validate(const Input& in, const Options& opt, json& r) {
  r["input"] = in.canonical;
  json res;
  if (in.kind == Input::Kind::module) {
    res["kind"] = "module";
    const EtaleReport e = check_etale(in.module);
    res["etale"] = true;
    res["det_valuation"] = e.det_valuation;
    res["commutations"] = check_commutations(in.module).checked;
  } else {
    const auto check = [&](const Presentation& P) {
      json p;
      const Tower T(P, opt.top.value_or(default_top(P.q, P.nvars())));
      const AdmissibilityReport a = check_admissible(T, false);
      p["admissibility"] = {{"clauses", a.clauses}, {"delta_t_dim", a.delta_t_dim}, {"nilpotency", a.nilpotency}, {"phi_injective", a.phi_injective}};
      json ent = json::array();
      for (const auto& e : gamma_eigen_check(P, opt.gamma).entries)
        ent.push_back({{"relation", e.relation}, {"direction", e.direction}, {"gamma", e.label}, {"exponent", e.exponent}, {"strict", e.strict}});
      p["gamma_eigen"] = ent;
      return p;
    };
    if (in.kind == Input::Kind::presentation) {
      res["kind"] = "presentation";
      res["presentation"] = check(in.pres);
    } else {
      res["kind"] = "sequence";
      res["total"] = check(in.triple.total);
      res["sub"] = check(in.triple.sub);
      res["quot"] = check(in.triple.quot);
    }
  }
  r["result"] = res;
  return 0;
}

inline ModuleElem parse_element(const PhiGammaModule& D, const json& j) {
  if (!j.is_array() || static_cast<int>(j.size()) != D.rank) throw ParseError("element needs " + std::to_string(D.rank) + " coordinates");
  ModuleElem x;
  for (const auto& c : j) x.push_back(parse_series(D.ring, c));
  return x;
}

inline json element_json(const ModuleElem& x) {
  json j = json::array();
  for (const auto& c : x) j.push_back(series_json(c));
  return j;
}

/// Laurent polynomials with exponents in [-3, 3] in every variable.
inline ModuleElem random_element(const PhiGammaModule& D, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> coeff(0, D.field().order() - 1);
  std::uniform_int_distribution<int> ex(-3, 3), nterms(0, 3);
  ModuleElem x;
  for (int i = 0; i < D.rank; ++i) {
    Series s(D.ring);
    for (int t = nterms(rng); t > 0; --t) {
      Exponent e(D.nvars());
      for (auto& v : e) v = ex(rng);
      s.add_to(e, FieldElem{coeff(rng)});
    }
    x.push_back(s);
  }
  return x;
}

inline int cmd_psi(const Input& in, const Options& opt, json& r) {
  if (in.kind != Input::Kind::module) throw InvalidArgument("psi needs a module file");
  const PhiGammaModule& D = in.module;
  check_etale(D);
  json input;
  input["module"] = in.canonical;
  input["direction"] = opt.var ? json(*opt.var) : json("D");
  std::vector<ModuleElem> xs;
  if (opt.element) {
    const json e = json::parse(*opt.element);
    xs.push_back(parse_element(D, e));
    input["element"] = element_json(xs.back());
  }
  if (opt.random > 0) {
    input["random"] = opt.random;
    input["seed"] = opt.seed;
    std::mt19937_64 rng(opt.seed);
    for (int i = 0; i < opt.random; ++i) xs.push_back(random_element(D, rng));
  }
  if (xs.empty()) throw InvalidArgument("psi needs --element or --random");
  r["input"] = input;
  const int d = opt.var ? D.ring->var_index(*opt.var) : -1;
  json out = json::array();
  bool all_ok = true;
  for (const auto& x : xs) {
    json e;
    e["x"] = element_json(x);
    const ModuleElem y = d < 0 ? psi_D(D, x) : psi_module(D, x, d);
    e["psi"] = element_json(y);
    // psi(phi(x)) = x needs q/pi = 1.
    if (D.ring->is_Qp) {
      const ModuleElem px = d < 0 ? phi_D(D, x) : phi_module(D, x, d);
      const ModuleElem back = d < 0 ? psi_D(D, px) : psi_module(D, px, d);
      bool ok = true;
      for (int i = 0; i < D.rank; ++i) ok = ok && (back[i] - x[i]).is_zero();
      e["psi_phi_identity"] = ok;
      all_ok = all_ok && ok;
    }
    out.push_back(e);
  }
  r["result"] = {{"elements", out}};
  return all_ok ? 0 : 1;
}

inline int cmd_lattices(const Input& in, const Options& opt, json& r) {
  r["input"] = in.canonical;
  json extra = json::object();
  const OneVarModule M = engine_for(in, opt, extra);
  json res = lattice_pair_json(M);
  for (auto it = extra.begin(); it != extra.end(); ++it) res[it.key()] = *it;
  if (in.kind != Input::Kind::module && in.pres.nvars() == 1) {
    const Klara80Report k = klara80_or_skip(in.pres, opt.top.value_or(default_top(in.pres.q, 1)), check_admissible(Tower(in.pres, opt.top.value_or(default_top(in.pres.q, 1))), false));
    res["klara80"] = {{"certified", k.certified}, {"detail", k.detail}};
    const Lattice standard = Lattice::standard(M.field(), M.rank(), 0);
    res["delta_star_equals_dnatural"] = dnatural(M).lattice == standard;
    res["delta_star_equals_dsharp"] = dsharp(M).lattice == standard;
  }
  r["result"] = res;
  return 0;
}

inline int cmd_dual(const Input& in, const Options& opt, json& r) {
  if (in.kind == Input::Kind::module) throw InvalidArgument("dual needs a presentation");
  r["input"] = in.canonical;
  json res;
  auto one = [&](const Presentation& P) {
    const DerivedModule m = derive_module(P, opt.top);
    json j = derived_json(m);
    const Klara80Report k = klara80_or_skip(P, m.tower->top(), m.admissibility);
    j["klara80"] = {{"certified", k.certified}, {"detail", k.detail}};
    if (k.certified) j["delta_star_equals_dnatural"] = dnatural(m.engine()).lattice == Lattice::standard(m.engine().field(), m.rank(), 0);
    return j;
  };
  if (in.kind == Input::Kind::presentation) {
    res = one(in.pres);
  } else {
    res["total"] = one(in.triple.total);
    res["sub"] = one(in.triple.sub);
    res["quot"] = one(in.triple.quot);
  }
  r["result"] = res;
  return 0;
}

inline json exactness_json(const ExactnessReport& e) {
  json j;
  j["sequence"] = e.which == SequenceKind::natural ? "natural" : "sharp";
  j["left_exact"] = e.left_exact;
  j["right_exact"] = e.right_exact;
  j["middle_exact"] = e.middle_exact;
  j["middle_homology_dim"] = e.middle_homology_dim;
  j["L"] = lattice_json(e.L);
  j["L1"] = lattice_json(e.L1);
  j["L2"] = lattice_json(e.L2);
  j["L_cap_D1"] = lattice_json(e.preimage);
  return j;
}

inline json triple_maps_json(const DerivedTriple& T) {
  const Field& k = *T.d.module.ring->field;
  json j;
  j["iota"] = lmatrix_json(k, T.iota);
  j["rho"] = lmatrix_json(k, T.rho);
  return j;
}

inline int cmd_report_exactness(const Input& in, const Options& opt, json& r) {
  if (in.kind != Input::Kind::triple) throw InvalidArgument("report-exactness needs a sequence (examples b, c, d)");
  r["input"] = in.canonical;
  const DerivedTriple T = derive_triple(in.triple);
  json res;
  res["maps"] = triple_maps_json(T);
  res["natural"] = exactness_json(exactness_report(T, SequenceKind::natural));
  res["sharp"] = exactness_json(exactness_report(T, SequenceKind::sharp));
  const SplittingReport s = splitting_search(T, opt.bound);
  json sp = {{"bound", s.bound}, {"found", s.found}, {"exact_data", s.exact_data}};
  if (s.found) sp["section"] = lmatrix_json(*T.d.module.ring->field, s.section);
  res["splitting"] = sp;
  res["notes"] = in.triple.notes;
  r["result"] = res;
  return 0;
}

inline json family_report_json(const LatticeFamilyReport& R) {
  json j;
  json ents = json::array();
  for (const auto& e : R.entries)
    ents.push_back({{"family", family_json(e.family)},
                    {"lattice", mono_lattice_json(e.lattice)},
                    {"psi_stable", e.psi_stable},
                    {"delta_t_dim", e.delta_t_dim},
                    {"generators_match", e.generators_match},
                    {"phi_injective", e.phi_injective},
                    {"dims_match", e.dims_match}});
  j["lattices"] = ents;
  j["count"] = R.entries.size();
  j["distinct"] = R.distinct;
  j["equal"] = R.equal;
  j["order_reversed"] = R.order_reversed;
  j["annihilator_valuation"] = R.ann_valuation;
  json dirs = json::array();
  for (const auto& d : R.module.directions()) dirs.push_back({{"alpha", d.alpha}, {"c", d.c.v}});
  j["phi_directions"] = dirs;
  j["dsharp"] = mono_lattice_json(R.sharp);
  j["dnatural"] = mono_lattice_json(R.natural);
  j["dsharp_unique"] = R.sharp_unique;
  j["empty_family_is_dsharp"] = R.empty_is_sharp;
  j["full_family_is_dnatural"] = R.full_is_natural;
  j["klara80_full_family"] = R.klara_full;
  j["klara80_empty_family"] = R.klara_empty;
  j["expansion_levels"] = R.tops;
  j["ok"] = R.ok();
  return j;
}

inline int cmd_example(const Input& in, const Options& opt, json& r) {
  r["input"] = {{"example", in.canonical}, {"report", opt.report}};
  const std::string which = in.canonical["example"];
  json res;
  int code = 0;
  if (opt.report == "presentation") {
    res = in.kind == Input::Kind::triple ? triple_json(in.triple) : presentation_json(in.pres);
  } else if (opt.report == "module") {
    if (in.kind == Input::Kind::triple) {
      const DerivedTriple T = derive_triple(in.triple);
      res["total"] = derived_json(T.d);
      res["quot"] = derived_json(T.d1);
      res["sub"] = derived_json(T.d2);
      res["maps"] = triple_maps_json(T);
      res["notes"] = in.triple.notes;
    } else {
      if (in.pres.nvars() != 1) throw InvalidArgument("--report module needs one variable; use --report lattices or diagonal");
      res = derived_json(derive_module(in.pres, opt.top));
    }
  } else if (opt.report == "lattices") {
    if (which != "a") {
      Options o = opt;
      json tmp;
      cmd_lattices(in, o, tmp);
      res = tmp["result"];
    } else {
      const json& p = in.canonical;
      const LatticeFamilyReport R = lattice_family_report(p["q"], p["c"].get<std::vector<long>>(), p["m"].get<std::vector<int>>());
      res = family_report_json(R);
      code = R.ok() ? 0 : 1;
    }
  } else if (opt.report == "exactness") {
    json tmp;
    cmd_report_exactness(in, opt, tmp);
    res = tmp["result"];
  } else if (opt.report == "diagonal") {
    if (which != "a") throw InvalidArgument("--report diagonal is for example a");
    const json& p = in.canonical;
    const DiagonalReport D = diagonal_report(p["q"], p["c"].get<std::vector<long>>(), p["m"].get<std::vector<int>>());
    const QuotientReport qr = D.natural.quotient_dims(D.sharp);
    res["module"] = module_json(D.module);
    res["restricted"] = module_json(D.restricted);
    res["etale"] = D.etale;
    res["composition_order_independent"] = D.order_independent;
    res["dsharp_basis"] = lattice_json(D.sharp);
    res["dnatural_basis"] = lattice_json(D.natural);
    res["quotient_dim"] = qr.dim;
    code = D.quotient_dim == 1 && D.etale ? 0 : 1;
  } else {
    throw InvalidArgument("unknown report '" + opt.report + "'");
  }
  r["result"] = res;
  return code;
}

inline int cmd_lubin_tate(const json& params, json& r) {
  r["input"] = params;
  LocalRingParams lp;
  lp.p = params["p"];
  lp.f = params["f"];
  lp.e = params["e"];
  const int tprec = params["tprec"];
  if (tprec < 2) throw ParameterOutOfRange("tprec must be >= 2");
  lp.M = tprec + 2;
  const LocalRing R(lp);
  const auto& res_field = *R.residue_field();
  const auto sparse = [&](const ReducedSeries& s) {
    json a = json::array();
    for (int i = 0; i < s.tprec; ++i)
      if (s.coeffs[i].v != 0) a.push_back(std::to_string(i) + ":" + res_field.to_string(s.coeffs[i]));
    return a;
  };
  json res = json::object();
  json samples = json::array();
  std::vector<LTSeries> series;
  std::vector<LocalRingElem> elems;
  for (const auto& lab : params["gamma"].get<std::vector<std::string>>()) {
    const LocalRingElem g = gamma_from_label(R, lab);
    const LTSeries s = gamma_series(R, g, tprec);
    const ReducedSeries red = reduce_series(R, s);
    bool linear = red.coeffs[0].v == 0 && red.coeffs[1] == R.reduce(g);
    for (long i = 2; i < std::min<long>(R.q(), tprec); ++i) linear = linear && red.coeffs[i].v == 0;
    json e;
    e["gamma"] = lab;
    e["reduced"] = sparse(red);
    e["certified_prec"] = s.certified_prec();
    e["functional_equation"] = vanishes_at_certified_prec(R, functional_equation_residual(R, s));
    e["linear_term"] = linear;
    samples.push_back(e);
    series.push_back(s);
    elems.push_back(g);
  }
  json comp = json::array();
  bool ok = true;
  for (std::size_t a = 0; a < series.size(); ++a)
    for (std::size_t b = 0; b < series.size(); ++b) {
      const ReducedSeries lhs = reduce_series(R, gamma_series(R, R.mul(elems[a], elems[b]), tprec));
      const ReducedSeries rhs = reduce_series(R, lt::compose(R, series[a], series[b]));
      const bool eq = lhs.coeffs == rhs.coeffs;
      ok = ok && eq;
      comp.push_back({{"gamma", samples[a]["gamma"]}, {"delta", samples[b]["gamma"]}, {"composition", eq}});
    }
  for (const auto& s : samples) ok = ok && s["functional_equation"].get<bool>() && s["linear_term"].get<bool>();
  res["samples"] = samples;
  res["compositions"] = comp;
  r["result"] = res;
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Batch driver and argument parsing.

inline std::vector<Outcome> run_batch(const std::vector<std::string>& files, int jobs,
                                      const std::function<Outcome(const std::string&)>& one) {
  std::vector<Outcome> out(files.size());
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(files.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < files.size();) out[i] = one(files[i]);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

inline std::uint64_t seed_from_env() {
  const char* s = std::getenv("PSI_LATTICE_SEED");
  if (!s || !*s) return 0;
  try {
    return std::stoull(s);
  } catch (const std::logic_error&) {
    throw ParseError("PSI_LATTICE_SEED must be a non-negative integer");
  }
}

inline int emit(const json& j, const std::string& path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty() || path == "-") {
    out << text;
    return 0;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) return 2;
  f << text;
  return f ? 0 : 2;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Lattices D-sharp and D-natural of etale phi-modules and their duals", "psi-lattice"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  std::string output;
  int jobs = 1;
  app.add_option("-o,--output", output, "write the report here instead of stdout");
  app.add_option("-j,--jobs", jobs, "run independent input files concurrently")->check(CLI::PositiveNumber);

  Options opt;
  std::vector<std::string> files;
  int top = 0;
  auto add_files = [&](CLI::App* s) { s->add_option("files", files, "input JSON files")->required()->check(CLI::ExistingFile); };
  auto add_top = [&](CLI::App* s) { s->add_option("--top", top, "expansion level of the presentation")->check(CLI::PositiveNumber); };

  auto* validate = app.add_subcommand("validate", "check etale/commutation conditions or admissibility");
  add_files(validate);
  add_top(validate);
  validate->add_option("--gamma", opt.gamma, "gamma samples for the eigen check");

  auto* psi = app.add_subcommand("psi", "apply psi_d or psi_D to module elements");
  add_files(psi);
  psi->add_option("--var", opt.var, "direction (default: psi_D over all variables)");
  psi->add_option("--element", opt.element, "JSON array of series, one per coordinate");
  psi->add_option("--random", opt.random, "number of random elements (seed from PSI_LATTICE_SEED)")->check(CLI::NonNegativeNumber);

  auto* dsharp_cmd = app.add_subcommand("dsharp", "compute D-sharp (and D-natural) of a module or presentation");
  auto* dnatural_cmd = app.add_subcommand("dnatural", "compute D-natural (and D-sharp) of a module or presentation");
  for (auto* s : {dsharp_cmd, dnatural_cmd}) {
    add_files(s);
    add_top(s);
    s->add_flag("--diagonal", opt.diagonal, "restrict a multivariable module to one variable first");
  }

  auto* dual = app.add_subcommand("dual", "derive D from a presentation of its dual");
  add_files(dual);
  add_top(dual);

  auto* rex = app.add_subcommand("report-exactness", "exactness of the lattice sequences and a splitting search");
  std::string target;
  rex->add_option("target", target, "example name (b, c, d) or sequence file")->required();
  rex->add_option("--bound", opt.bound, "exponent bound of the splitting search")->check(CLI::NonNegativeNumber);

  auto* ex = app.add_subcommand("example", "build a worked example and report on it");
  std::string which;
  long q = 3;
  int vars = 1;
  std::vector<long> c;
  std::vector<int> m;
  std::string family = "all";
  long alpha = 1;
  int a = 0, s = 0, kappa = 1;
  for (auto* sc : {ex, rex}) {
    sc->add_option("--q", q, "residue field size (2 or 3)");
    sc->add_option("--alpha", alpha, "example b parameter");
    sc->add_option("-a,--a", a, "example b/c parameter");
    sc->add_option("-s,--s", s, "example c/d parameter");
    sc->add_option("--kappa", kappa, "example d parameter");
  }
  ex->add_option("which", which, "a, b, c or d")->required()->check(CLI::IsMember({"a", "b", "c", "d"}));
  ex->add_option("--vars", vars, "number of variables (example a)");
  ex->add_option("--c", c, "example a: one unit c_d per variable");
  ex->add_option("--m", m, "example a: one weight m_d per variable");
  ex->add_option("--family", family, "example a: empty, all, or JSON list of subsets");
  ex->add_option("--report", opt.report, "presentation, module, lattices, exactness, diagonal")
      ->check(CLI::IsMember({"presentation", "module", "lattices", "exactness", "diagonal"}));
  ex->add_option("--bound", opt.bound, "exponent bound of the splitting search")->check(CLI::NonNegativeNumber);
  add_top(ex);

  auto* lt = app.add_subcommand("lubin-tate", "[gamma](t) for the Lubin-Tate group of pi t + t^q");
  int p = 3, f = 1, e = 1, tprec = 32;
  std::vector<std::string> lt_gamma{"teich", "1+pi", "(1+pi)^2"};
  lt->add_option("--p", p, "residue characteristic");
  lt->add_option("--f", f, "residue degree");
  lt->add_option("--e", e, "ramification index (Eisenstein polynomial X^e - p)");
  lt->add_option("--tprec", tprec, "t-adic precision");
  lt->add_option("--gamma", lt_gamma, "sampled units");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& pe) {
    const int rc = app.exit(pe, out, err);
    return rc == 0 ? 0 : 2;
  }
  if (top > 0) opt.top = top;

  auto example_spec = [&](const std::string& name) {
    json j = {{"example", name}, {"q", q}};
    if (name == "a") {
      j["vars"] = vars;
      j["c"] = c.empty() ? std::vector<long>(vars, 1) : c;
      j["m"] = m.empty() ? std::vector<int>(vars, 0) : m;
      j["family"] = (family == "all" || family == "empty") ? json(family) : json::parse(family);
    }
    if (name == "b") j.update({{"alpha", alpha}, {"a", a}});
    if (name == "c") j.update({{"a", a}, {"s", s}});
    if (name == "d") j.update({{"kappa", kappa}, {"s", s}});
    return j;
  };

  std::vector<Outcome> outcomes;
  std::string command = app.get_subcommands().front()->get_name();
  if (lt->parsed()) {
    const json params = {{"p", p}, {"f", f}, {"e", e}, {"tprec", tprec}, {"gamma", lt_gamma}};
    outcomes.push_back(guarded(command, [&](json& r) { return cmd_lubin_tate(params, r); }));
  } else if (ex->parsed()) {
    outcomes.push_back(guarded(command, [&](json& r) {
      const Input in = example_input(example_spec(which));
      return cmd_example(in, opt, r);
    }));
  } else if (rex->parsed()) {
    outcomes.push_back(guarded(command, [&](json& r) {
      const Input in = (target == "b" || target == "c" || target == "d") ? example_input(example_spec(target)) : load_input(target);
      return cmd_report_exactness(in, opt, r);
    }));
  } else {
    int (*fn)(const Input&, const Options&, json&) = nullptr;
    if (validate->parsed()) fn = cmd_validate;
    if (psi->parsed()) {
      fn = cmd_psi;
      try {
        opt.seed = seed_from_env();
      } catch (const Error& er) {
        err << er.what() << "\n";
        return 2;
      }
    }
    if (dsharp_cmd->parsed() || dnatural_cmd->parsed()) fn = cmd_lattices;
    if (dual->parsed()) fn = cmd_dual;
    outcomes = run_batch(files, jobs, [&](const std::string& path) {
      return guarded(command, [&](json& r) {
        r["path"] = path;
        return fn(load_input(path), opt, r);
      });
    });
  }

  int code = 0;
  for (const auto& o : outcomes) {
    code = std::max(code, o.code);
    if (o.report.contains("error")) err << "psi-lattice: " << o.report["error"]["message"].get<std::string>() << "\n";
  }
  json doc;
  if (outcomes.size() == 1) {
    doc = outcomes.front().report;
  } else {
    doc = skeleton(command);
    doc.erase("input");
    doc.erase("result");
    doc["status"] = code == 0 ? "ok" : (code == 1 ? "failed" : "error");
    doc["reports"] = json::array();
    for (const auto& o : outcomes) doc["reports"].push_back(o.report);
  }
  if (emit(doc, output, out) != 0) {
    err << "psi-lattice: cannot write '" << output << "'\n";
    return 2;
  }
  return code;
}

}  // namespace psilat::cli
