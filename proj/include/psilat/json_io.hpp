#pragma once
// JSON formats for rings, series, modules and presentations. Emission is
// canonical: keys sorted, every default spelled out.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "psilat/corpus.hpp"
#include "psilat/phigamma.hpp"

namespace psilat {

using json = nlohmann::json;

inline constexpr const char* kVersion = "psi-lattice 1.0.0";

namespace detail {

inline void allow_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": expected an object");
  std::set<std::string> ok(keys.begin(), keys.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key())) throw ParseError(where + ": unknown field '" + it.key() + "'");
}

template <class T>
T get_or(const json& j, const char* key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T get_req(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return get_or<T>(j, key, T{});
}

inline std::string coeff_text(const json& c) {
  if (c.is_string()) return c.get<std::string>();
  if (c.is_number_integer()) return std::to_string(c.get<long>());
  throw ParseError("coefficient must be a string or an integer");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Ring: {"p":3,"m":1,"f":1,"e":1,"vars":["t"]} plus optional "modulus",
// "eisenstein", "precision" (pi-adic, for the gamma samples).

struct RingSpec {
  FieldPtr field;
  SeriesRingPtr ring;
  LocalRingParams local;
};

inline RingSpec parse_ring(const json& j) {
  detail::allow_keys(j, {"p", "m", "f", "e", "vars", "modulus", "eisenstein", "precision"}, "ring");
  const int p = detail::get_req<int>(j, "p", "ring");
  const int f = detail::get_or<int>(j, "f", 1);
  const int m = detail::get_or<int>(j, "m", f);
  const int e = detail::get_or<int>(j, "e", 1);
  auto vars = detail::get_or<std::vector<std::string>>(j, "vars", {"t"});
  std::set<std::string> uniq(vars.begin(), vars.end());
  if (uniq.size() != vars.size()) throw ParseError("ring: repeated variable name");
  for (const auto& v : vars)
    if (v.empty() || v == "prec" || v == "1" || v.find_first_of(" ^") != std::string::npos) throw ParseError("ring: bad variable name '" + v + "'");
  RingSpec r;
  r.field = make_field(p, m, f, detail::get_or<std::vector<int>>(j, "modulus", {}));
  r.ring = make_series_ring(r.field, vars, f == 1 && e == 1);
  r.local.p = p;
  r.local.f = f;
  r.local.e = e;
  r.local.eisenstein = detail::get_or<std::vector<std::vector<long>>>(j, "eisenstein", {});
  r.local.M = detail::get_or<int>(j, "precision", 16);
  // residue field of F: the degree-f subfield; take its own default modulus
  if (e > 1 && r.local.eisenstein.empty()) throw ParseError("ring: a ramified F needs its Eisenstein polynomial");
  return r;
}

inline json ring_json(const SeriesRing& R, const LocalRingParams& L) {
  const auto& fp = R.field->params();
  json j;
  j["p"] = fp.p;
  j["m"] = fp.m;
  j["f"] = fp.f;
  j["e"] = L.e;
  j["vars"] = R.vars;
  j["modulus"] = fp.modulus;
  if (!L.eisenstein.empty()) j["eisenstein"] = L.eisenstein;
  j["precision"] = L.M;
  return j;
}

// ---------------------------------------------------------------------------
// Series: {"t^-1": "1", "t1^2 t2": "2", "prec": {"t": 20}}. A monomial key is
// "1" or space-separated factors "v" / "v^e"; "prec" bounds each variable
// (the series is known modulo t_d^prec_d); absent means exact.

inline Exponent parse_monomial(const SeriesRing& R, const std::string& key) {
  Exponent e(R.nvars(), 0);
  if (key == "1") return e;
  std::istringstream is(key);
  std::string tok;
  bool any = false;
  while (is >> tok) {
    any = true;
    const auto hat = tok.find('^');
    const std::string v = tok.substr(0, hat);
    int d = 0;
    try {
      d = R.var_index(v);
    } catch (const InvalidArgument&) {
      throw ParseError("unknown variable '" + v + "' in monomial '" + key + "'");
    }
    int x = 1;
    if (hat != std::string::npos) {
      std::size_t used = 0;
      try {
        x = std::stoi(tok.substr(hat + 1), &used);
      } catch (const std::logic_error&) {
        throw ParseError("bad exponent in monomial '" + key + "'");
      }
      if (used != tok.size() - hat - 1) throw ParseError("bad exponent in monomial '" + key + "'");
    }
    e[d] += x;
  }
  if (!any) throw ParseError("empty monomial");
  return e;
}

inline Series parse_series(const SeriesRingPtr& R, const json& j) {
  if (j.is_number_integer() || j.is_string()) return Series::constant(R, R->field->parse(detail::coeff_text(j)));
  if (!j.is_object()) throw ParseError("series must be an object");
  Series s(R);
  std::vector<int> prec(R->nvars(), kExact);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() == "prec") {
      if (!it->is_object()) throw ParseError("series prec must be an object");
      for (auto p = it->begin(); p != it->end(); ++p) prec[R->var_index(p.key())] = p->get<int>();
      continue;
    }
    s.add_to(parse_monomial(*R, it.key()), R->field->parse(detail::coeff_text(*it)));
  }
  s.truncate(prec);
  return s;
}

inline json series_json(const Series& s) {
  json j = json::object();
  for (const auto& [e, c] : s.terms()) j[s.monomial_key(e)] = s.field().to_string(c);
  if (!s.is_exact()) {
    json p = json::object();
    for (int d = 0; d < s.nvars(); ++d)
      if (s.prec(d) < kExact) p[s.ring()->vars[d]] = s.prec(d);
    j["prec"] = p;
  }
  return j;
}

inline SMatrix parse_matrix(const SeriesRingPtr& R, const json& j, int n, const std::string& what) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) throw ParseError(what + ": expected " + std::to_string(n) + " rows");
  SMatrix m(n, std::vector<Series>(n, Series(R)));
  for (int i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != n) throw ParseError(what + ": row " + std::to_string(i) + " has wrong length");
    for (int k = 0; k < n; ++k) m[i][k] = parse_series(R, j[i][k]);
  }
  return m;
}

inline json matrix_json(const SMatrix& m) {
  json j = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& x : row) r.push_back(series_json(x));
    j.push_back(r);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Module: {"ring":…, "rank":n, "labels":[…], "phi":{"t":[[…]]},
// "gamma":{"t":{"teich":[[…]]}}}. Rows index result coordinates, so column
// j holds phi_d(e_j).

inline PhiGammaModule parse_module(const json& j) {
  detail::allow_keys(j, {"ring", "rank", "labels", "phi", "gamma"}, "module");
  if (!j.contains("ring")) throw ParseError("module: missing field 'ring'");
  const RingSpec rs = parse_ring(j.at("ring"));
  PhiGammaModule D;
  D.ring = rs.ring;
  D.local = rs.local;
  D.rank = detail::get_req<int>(j, "rank", "module");
  if (D.rank < 1) throw ParseError("module: rank must be positive");
  D.labels = detail::get_or<std::vector<std::string>>(j, "labels", {});
  if (D.labels.empty())
    for (int i = 0; i < D.rank; ++i) D.labels.push_back("e" + std::to_string(i + 1));
  if (static_cast<int>(D.labels.size()) != D.rank) throw ParseError("module: one label per basis vector");
  if (!j.contains("phi") || !j.at("phi").is_object()) throw ParseError("module: missing 'phi'");
  D.phi.assign(D.nvars(), {});
  std::vector<bool> seen(D.nvars(), false);
  for (auto it = j.at("phi").begin(); it != j.at("phi").end(); ++it) {
    const int d = D.ring->var_index(it.key());
    D.phi[d] = parse_matrix(D.ring, *it, D.rank, "phi[" + it.key() + "]");
    seen[d] = true;
  }
  for (int d = 0; d < D.nvars(); ++d)
    if (!seen[d]) throw ParseError("module: no phi-matrix for " + D.ring->vars[d]);
  if (j.contains("gamma")) {
    const json& g = j.at("gamma");
    if (!g.is_object()) throw ParseError("module: 'gamma' must be an object");
    for (auto it = g.begin(); it != g.end(); ++it) {
      const int d = D.ring->var_index(it.key());
      for (auto lab = it->begin(); lab != it->end(); ++lab)
        D.gamma[{d, lab.key()}] = parse_matrix(D.ring, *lab, D.rank, "gamma[" + it.key() + "][" + lab.key() + "]");
    }
  }
  return D;
}

inline json module_json(const PhiGammaModule& D) {
  json j;
  j["ring"] = ring_json(*D.ring, D.local);
  j["rank"] = D.rank;
  j["labels"] = D.labels;
  json phi = json::object();
  for (int d = 0; d < D.nvars(); ++d) phi[D.ring->vars[d]] = matrix_json(D.phi[d]);
  j["phi"] = phi;
  if (!D.gamma.empty()) {
    json g = json::object();
    for (const auto& [key, m] : D.gamma) g[D.ring->vars[key.first]][key.second] = matrix_json(m);
    j["gamma"] = g;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Presentation: generators with their t-images and Gamma-weights, and
// relations as lists of terms coeff * t^texp phi_dir (x) gen.
// {"ring":…, "generators":[{"name":"e0","t":{"t":"e1"},"weight":{"t":0}}],
//  "relations":[{"label":"r","terms":[{"coeff":"1","t":{"t":2},"phi":"t","gen":"e0"}]}]}

inline Presentation parse_presentation(const json& j) {
  detail::allow_keys(j, {"ring", "generators", "relations"}, "presentation");
  if (!j.contains("ring")) throw ParseError("presentation: missing field 'ring'");
  const RingSpec rs = parse_ring(j.at("ring"));
  Presentation P;
  P.k = rs.field;
  P.q = rs.field->q();
  P.is_Qp = rs.ring->is_Qp;
  P.local = rs.local;
  P.vars = rs.ring->vars;
  const int n = P.nvars();
  const json& gens = j.at("generators");
  if (!gens.is_array() || gens.empty()) throw ParseError("presentation: 'generators' must be a nonempty array");
  for (const auto& g : gens) {
    detail::allow_keys(g, {"name", "t", "weight"}, "generator");
    P.gens.push_back(detail::get_req<std::string>(g, "name", "generator"));
  }
  P.t_action.assign(n, std::vector<int>(P.ngens(), -1));
  P.weights.assign(n, std::vector<int>(P.ngens(), 0));
  for (int i = 0; i < P.ngens(); ++i) {
    const json& g = gens[i];
    if (g.contains("t"))
      for (auto it = g.at("t").begin(); it != g.at("t").end(); ++it)
        P.t_action[rs.ring->var_index(it.key())][i] = it->is_null() ? -1 : P.gen_index(it->get<std::string>());
    if (g.contains("weight"))
      for (auto it = g.at("weight").begin(); it != g.at("weight").end(); ++it) P.weights[rs.ring->var_index(it.key())][i] = it->get<int>();
  }
  for (const auto& r : detail::get_or<json>(j, "relations", json::array())) {
    detail::allow_keys(r, {"label", "terms"}, "relation");
    Relation rel{detail::get_or<std::string>(r, "label", "r" + std::to_string(P.relations.size() + 1)), {}};
    for (const auto& t : r.at("terms")) {
      detail::allow_keys(t, {"coeff", "t", "phi", "gen"}, "relation term");
      RelTerm term;
      term.coeff = P.k->parse(t.contains("coeff") ? detail::coeff_text(t.at("coeff")) : "1");
      term.texp.assign(n, 0);
      if (t.contains("t"))
        for (auto it = t.at("t").begin(); it != t.at("t").end(); ++it) term.texp[rs.ring->var_index(it.key())] = it->get<int>();
      term.phi_dir = t.contains("phi") && !t.at("phi").is_null() ? rs.ring->var_index(t.at("phi").get<std::string>()) : -1;
      term.gen = P.gen_index(detail::get_req<std::string>(t, "gen", "relation term"));
      if (term.coeff.v != 0) rel.terms.push_back(std::move(term));
    }
    P.relations.push_back(std::move(rel));
  }
  P.validate();
  return P;
}

inline json presentation_json(const Presentation& P) {
  json j;
  auto ring = make_series_ring(P.k, P.vars, P.is_Qp);
  j["ring"] = ring_json(*ring, P.local);
  json gens = json::array();
  for (int i = 0; i < P.ngens(); ++i) {
    json g;
    g["name"] = P.gens[i];
    json t = json::object(), w = json::object();
    for (int d = 0; d < P.nvars(); ++d) {
      t[P.vars[d]] = P.t_action[d][i] < 0 ? json(nullptr) : json(P.gens[P.t_action[d][i]]);
      w[P.vars[d]] = P.weights[d][i];
    }
    g["t"] = t;
    g["weight"] = w;
    gens.push_back(g);
  }
  j["generators"] = gens;
  json rels = json::array();
  for (const auto& r : P.relations) {
    json terms = json::array();
    for (const auto& term : r.terms) {
      json t;
      t["coeff"] = P.k->to_string(term.coeff);
      json te = json::object();
      for (int d = 0; d < P.nvars(); ++d) te[P.vars[d]] = term.texp[d];
      t["t"] = te;
      t["phi"] = term.phi_dir < 0 ? json(nullptr) : json(P.vars[term.phi_dir]);
      t["gen"] = P.gens[term.gen];
      terms.push_back(t);
    }
    rels.push_back({{"label", r.label}, {"terms", terms}});
  }
  j["relations"] = rels;
  return j;
}

// ---------------------------------------------------------------------------
// Report fragments.

inline json laurent_json(const Field& k, const Laurent& x) {
  json j = json::object();
  for (int e = x.start; e < x.end(); ++e)
    if (x.at(e).v != 0) j[e == 0 ? "1" : "t^" + std::to_string(e)] = k.to_string(x.at(e));
  if (!x.exact()) j["prec"] = json{{"t", x.prec}};
  return j;
}

inline json lmatrix_json(const Field& k, const LMatrix& m) {
  json j = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const auto& x : row) r.push_back(laurent_json(k, x));
    j.push_back(r);
  }
  return j;
}

/// Hermite basis as a list of column vectors.
inline json lattice_json(const Lattice& L) {
  json j;
  json basis = json::array();
  for (const auto& b : L.basis()) {
    json v = json::array();
    for (const auto& x : b) v.push_back(laurent_json(L.field(), x));
    basis.push_back(v);
  }
  j["basis"] = basis;
  j["pivot_valuations"] = L.pivot_valuations();
  j["text"] = L.to_string();
  return j;
}

inline json mono_lattice_json(const MonoLattice& L) {
  return {{"generators", L.gens()}, {"text", L.to_string()}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace psilat
