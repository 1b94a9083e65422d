#pragma once

// Duals of admissible presentations: admissibility clauses, the generation
// certificate for Delta[t], Gamma-eigenvector checks, and extraction of the
// etale module D = Delta^* (x) k((t)) for one variable.

#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/lattice.hpp"
#include "psilat/lubin_tate.hpp"
#include "psilat/phigamma.hpp"
#include "psilat/presentation.hpp"

namespace psilat {

// ---------------------------------------------------------------------------
// Dense operators on truncations.

inline std::vector<KVec> t_images(const Tower& T, int d, int L) {
  std::vector<KVec> out;
  for (int idx : T.basis(L)) out.push_back(T.coords(T.t(d, Tower::unit(idx)), L));
  return out;
}

/// Delta[t_.] inside V_L: common kernel of all t_d.
inline std::vector<KVec> t_kernel(const Tower& T, int L) {
  const int D = T.presentation().nvars();
  const std::size_t dim = T.basis(L).size();
  std::vector<std::vector<KVec>> per(D);
  for (int d = 0; d < D; ++d) per[d] = t_images(T, d, L);
  std::vector<KVec> stacked(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (int d = 0; d < D; ++d) stacked[i].insert(stacked[i].end(), per[d][i].begin(), per[d][i].end());
  return kernel(T.field(), stacked, dim * D);
}

inline int level_of(const Tower& T, const Sparse& v) {
  int l = 0;
  for (const auto& [idx, c] : v) l = std::max(l, T.mono(idx).level);
  return l;
}

/// Smallest subspace of V_L containing `seeds` and stable under all t_d and,
/// when `with_phi`, under phi_d applied to elements of level < L.
inline KSpace closure(const Tower& T, int L, const std::vector<Sparse>& seeds, bool with_phi) {
  KSpace S(&T.field(), T.basis(L).size());
  std::vector<Sparse> queue = seeds;
  const int D = T.presentation().nvars();
  while (!queue.empty()) {
    Sparse v = std::move(queue.back());
    queue.pop_back();
    if (v.empty() || level_of(T, v) > L) continue;
    if (!S.insert(T.coords(v, L))) continue;
    for (int d = 0; d < D; ++d) {
      queue.push_back(T.t(d, v));
      if (with_phi && level_of(T, v) < L) queue.push_back(T.phi(d, v));
    }
  }
  return S;
}

// ---------------------------------------------------------------------------

struct AdmissibilityReport {
  std::vector<std::string> clauses;  ///< verified clauses with detail
  int delta_t_dim = 0;
  std::vector<int> nilpotency;  ///< per direction, on the largest checked truncation
  bool phi_injective = true;
};

/// With `require_phi_injective` false a kernel of phi_d is recorded instead of
/// rejected; the dual is still a lattice, but psi need not be onto.
inline AdmissibilityReport check_admissible(const Tower& T, bool require_phi_injective = true) {
  const int Lv = T.valid_level();
  if (Lv < 2) throw InvalidArgument("admissibility needs expansion level >= 4");
  const Presentation& P = T.presentation();
  const int D = P.nvars();
  const Field& k = T.field();
  AdmissibilityReport rep;
  for (int d = 0; d < D; ++d) {
    int worst = 0;
    for (int idx : T.basis(Lv)) {
      Sparse v = Tower::unit(idx);
      int s = 0;
      while (!v.empty()) {
        v = T.t(d, v);
        if (++s > static_cast<int>(T.basis(Lv).size()) + 1) throw NotAdmissible("t-torsion: t_" + P.vars[d] + " is not nilpotent");
      }
      worst = std::max(worst, s);
    }
    rep.nilpotency.push_back(worst);
  }
  rep.clauses.push_back("t-torsion: every t_d nilpotent on the truncation");
  const auto k1 = t_kernel(T, Lv - 1), k2 = t_kernel(T, Lv);
  if (k1.size() != k2.size())
    throw NotAdmissible("finite t-kernel: dim Delta[t] grows with the level (" + std::to_string(k1.size()) + " -> " + std::to_string(k2.size()) + ")");
  rep.delta_t_dim = static_cast<int>(k2.size());
  rep.clauses.push_back("finite t-kernel: dim Delta[t] = " + std::to_string(rep.delta_t_dim));
  for (int d = 0; d < D; ++d) {
    KSpace img(&k, T.basis(Lv).size());
    for (const auto& v : t_images(T, d, Lv)) img.insert(v);
    // t_d Delta is a k[[t]][phi]-submodule, so it is everything once it holds M.
    for (int idx : T.basis(0))
      if (!img.contains(T.coords(Tower::unit(idx), Lv)))
        throw NotAdmissible("t surjective: " + T.mono_string(idx) + " is not in the image of t_" + P.vars[d]);
  }
  rep.clauses.push_back("t surjective: every generator lies in t_d Delta");
  for (int d = 0; d < D; ++d) {
    KSpace img(&k, T.basis(Lv).size());
    std::vector<Sparse> seeds;
    for (int idx : T.basis(Lv - 1)) {
      Sparse y = T.phi(d, Tower::unit(idx));
      img.insert(T.coords(y, Lv));
      seeds.push_back(y);
    }
    if (img.rank() != T.basis(Lv - 1).size()) {
      if (require_phi_injective) throw NotAdmissible("phi injective: phi_" + P.vars[d] + " has a kernel");
      rep.phi_injective = false;
    }
    const KSpace span = closure(T, Lv, seeds, false);
    for (int idx : T.basis(0))
      if (!span.contains(T.coords(Tower::unit(idx), Lv)))
        throw NotAdmissible("phi generates: " + T.mono_string(idx) + " not in k[[t]] phi_" + P.vars[d] + "(Delta)");
  }
  if (rep.phi_injective) rep.clauses.push_back("phi injective: hence each psi_d is surjective on the dual");
  rep.clauses.push_back("phi generates: Delta = k[[t]] phi_d(Delta) for each d");
  return rep;
}

struct Klara80Report {
  bool certified = false;
  std::string detail;
};

namespace detail {

/// Whether the k[[t]][phi]-span of Delta[t] reaches the generators on T.
inline bool span_reaches_generators(const Tower& T) {
  const int Lv = T.valid_level();
  std::vector<Sparse> seeds;
  for (const auto& v : t_kernel(T, Lv)) seeds.push_back(T.from_coords(v, Lv));
  const KSpace S = closure(T, Lv, seeds, true);
  for (int idx : T.basis(0))
    if (!S.contains(T.coords(Tower::unit(idx), Lv))) return false;
  return true;
}

}  // namespace detail

/// Delta is generated by its level-0 part, so the span of Delta[t] is all of
/// Delta iff it contains the generators; a positive answer on a truncation is
/// a proof. A negative answer must repeat one level lower.
inline Klara80Report klara80_certify(const Presentation& P, int top) {
  const Tower T(P, top);
  check_admissible(T);
  if (detail::span_reaches_generators(T)) return {true, "Delta[t] generates Delta"};
  const Tower T2(P, top - 1);
  if (detail::span_reaches_generators(T2))
    throw Inconclusive("generation by Delta[t] differs between expansion levels " + std::to_string(top - 1) + " and " + std::to_string(top));
  return {false, "Delta[t] does not generate the generators at expansion levels " + std::to_string(top - 1) + " and " + std::to_string(top)};
}

// ---------------------------------------------------------------------------
// Gamma.

struct EigenReport {
  struct Entry {
    std::string relation, direction, label;
    long exponent = 0;  ///< eigenvalue = gamma_bar^exponent, modulo q - 1
    bool strict = true;  ///< false: eigenvector only modulo the relation submodule
  };
  std::vector<Entry> entries;
};

namespace detail {

using FreeKey = std::tuple<std::array<int, kMaxVars>, std::array<int, kMaxVars>, int>;
using FreeElem = std::map<FreeKey, FieldElem>;

inline bool free_normalize(const Presentation& P, std::array<int, kMaxVars>& i, const std::array<int, kMaxVars>& n, int& gen) {
  for (int d = 0; d < P.nvars(); ++d) {
    long b = 1;
    for (int s = 0; s < n[d]; ++s) b *= P.q;
    long u = i[d] / b;
    i[d] = static_cast<int>(i[d] % b);
    while (u-- > 0) {
      gen = P.t_action[d][gen];
      if (gen < 0) return false;
    }
  }
  return true;
}

inline void free_add(const Presentation& P, FreeElem& x, std::array<int, kMaxVars> i, const std::array<int, kMaxVars>& n, int gen, FieldElem c) {
  if (c.v == 0 || !free_normalize(P, i, n, gen)) return;
  const FreeKey key{i, n, gen};
  const FieldElem v = P.k->add(x.count(key) ? x[key] : FieldElem{0}, c);
  if (v.v == 0)
    x.erase(key);
  else
    x[key] = v;
}

inline FreeElem relation_elem(const Presentation& P, const Relation& r) {
  FreeElem x;
  for (const auto& term : r.terms) {
    std::array<int, kMaxVars> i{}, n{};
    for (int d = 0; d < P.nvars(); ++d) i[d] = term.texp[d];
    if (term.phi_dir >= 0) n[term.phi_dir] = 1;
    free_add(P, x, i, n, term.gen, term.coeff);
  }
  return x;
}

/// gamma_d applied to an element of the free module, given [gamma](t) mod pi
/// in k and gamma_bar = its linear coefficient.
inline FreeElem free_gamma(const Presentation& P, const FreeElem& x, int d, const std::vector<FieldElem>& g) {
  const Field& k = *P.k;
  FreeElem out;
  const FieldElem gbar = g[1];
  for (const auto& [key, c] : x) {
    const auto& [i, n, gen] = key;
    // [gamma](t_d)^{i_d} modulo t^{g.size()}
    std::vector<FieldElem> pw(g.size(), FieldElem{0});
    pw[0] = k.one();
    for (int s = 0; s < i[d]; ++s) {
      std::vector<FieldElem> nx(g.size(), FieldElem{0});
      for (std::size_t a = 0; a < g.size(); ++a)
        if (pw[a].v)
          for (std::size_t b = 1; a + b < g.size(); ++b)
            if (g[b].v) nx[a + b] = k.add(nx[a + b], k.mul(pw[a], g[b]));
      pw = std::move(nx);
    }
    const FieldElem scal = k.mul(c, k.pow(gbar, P.weights[d][gen]));
    for (std::size_t s = 0; s < pw.size(); ++s) {
      if (pw[s].v == 0) continue;
      auto ii = i;
      ii[d] = static_cast<int>(s);
      free_add(P, out, ii, n, gen, k.mul(scal, pw[s]));
    }
  }
  return out;
}

/// Whether a free-module element lies in the relation submodule.
inline bool vanishes_in_quotient(const Presentation& P, const FreeElem& x, std::optional<Tower>& T) {
  int level = 0;
  for (const auto& [key, c] : x) {
    const auto& n = std::get<1>(key);
    level = std::max(level, *std::max_element(n.begin(), n.begin() + P.nvars()));
  }
  if (!T || T->valid_level() < level + 1) T.emplace(P, level + 3);
  Sparse v;
  for (const auto& [key, c] : x) {
    const auto& [i, n, gen] = key;
    const int idx = T->index(i, n, gen);
    if (idx == -2) throw Inconclusive("gamma image leaves the expansion window");
    if (idx < 0) continue;
    const FieldElem s = P.k->add(v.count(idx) ? v[idx] : FieldElem{0}, c);
    if (s.v == 0)
      v.erase(idx);
    else
      v[idx] = s;
  }
  return T->nf(v).empty();
}

}  // namespace detail

/// Every relation, and every t-action identity t_d m = m', is an eigenvector of
/// each sampled gamma_d, in the free module or at least modulo the relations.
inline EigenReport gamma_eigen_check(const Presentation& P, const std::vector<std::string>& labels) {
  P.validate();
  const Field& k = *P.k;
  EigenReport rep;
  std::vector<Relation> rels = P.relations;
  for (int d = 0; d < P.nvars(); ++d)
    for (int g = 0; g < P.ngens(); ++g) {
      if (P.t_action[d][g] < 0) continue;
      Relation r;
      r.label = P.vars[d] + " " + P.gens[g] + " - " + P.gens[P.t_action[d][g]];
      std::vector<int> one(P.nvars(), 0), zero(P.nvars(), 0);
      one[d] = 1;
      r.terms = {RelTerm{k.one(), one, -1, g}, RelTerm{k.neg(k.one()), zero, -1, P.t_action[d][g]}};
      rels.push_back(r);
    }
  // Enough t-precision that every dropped term dies in the free module.
  int tprec = 2;
  for (int d = 0; d < P.nvars(); ++d) tprec = std::max(tprec, static_cast<int>(P.q * P.nilpotency(d)) + 2);
  for (const auto& r : rels)
    for (const auto& term : r.terms)
      for (int e : term.texp) tprec = std::max(tprec, e + static_cast<int>(P.q * (P.ngens() + 1)) + 2);
  std::optional<Tower> tower;
  for (const auto& lab : labels) {
    LocalRingParams lp = P.local;
    lp.M = tprec + 2;
    const LocalRing R(lp);
    const auto g = embed_action_series(gamma_series_mod_p(R, gamma_from_label(R, lab), tprec), R.residue_field(), P.k);
    for (int d = 0; d < P.nvars(); ++d)
      for (const auto& r : rels) {
        const detail::FreeElem x = detail::relation_elem(P, r);
        if (x.empty()) continue;
        const auto& [i0, n0, g0] = x.begin()->first;
        (void)n0;
        const long q1 = P.q - 1;
        const long e = ((i0[d] + P.weights[d][g0]) % q1 + q1) % q1;
        const FieldElem lambda = k.pow(g[1], e);
        detail::FreeElem gx = detail::free_gamma(P, x, d, g);
        for (const auto& [key, c] : x) {
          const auto& [i, n, gen] = key;
          detail::free_add(P, gx, i, n, gen, k.neg(k.mul(lambda, c)));
        }
        bool strict = gx.empty();
        if (!strict && !detail::vanishes_in_quotient(P, gx, tower))
          throw NotEquivariant("relation '" + r.label + "' is not an eigenvector of gamma_" + P.vars[d] + "[" + lab + "]");
        rep.entries.push_back({r.label, P.vars[d], lab, e, strict});
      }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Coordinates of functionals in the dual basis.

/// Expresses linear forms on V_L in the k[[t]]-basis g_j = mu_j^* of the dual.
class DualSolver {
public:
  DualSolver(const Tower& T, int L, std::vector<int> mu) : T_(&T), L_(L), mu_(std::move(mu)) {
    const Field& k = T.field();
    const auto& B = T.basis(L);
    const int r = static_cast<int>(mu_.size());
    // orbit[p][a] = t^a x_p
    std::vector<std::vector<Sparse>> orbit(B.size());
    nil_ = 0;
    for (std::size_t p = 0; p < B.size(); ++p) {
      Sparse v = Tower::unit(B[p]);
      while (!v.empty()) {
        orbit[p].push_back(v);
        v = T.t(0, v);
      }
      nil_ = std::max(nil_, static_cast<int>(orbit[p].size()));
    }
    vecs_.assign(static_cast<std::size_t>(r) * nil_, KVec(B.size(), FieldElem{0}));
    for (int j = 0; j < r; ++j)
      for (std::size_t p = 0; p < B.size(); ++p)
        for (std::size_t a = 0; a < orbit[p].size(); ++a) {
          auto it = orbit[p][a].find(mu_[j]);
          if (it != orbit[p][a].end()) vecs_[j * nil_ + a][p] = it->second;
        }
    auto ker = kernel(k, vecs_, B.size());
    std::vector<LVector> gens;
    for (const auto& v : ker) gens.push_back(to_lvector(v));
    for (const auto& u : unit_vectors(r, k, nil_)) gens.push_back(u);
    kernel_lattice_ = Lattice::from_generators(k, r, gens);
    prec_ = kernel_lattice_.lo();
  }

  int level() const { return L_; }
  /// Coordinates are determined modulo t^precision().
  int precision() const { return prec_; }
  int nilpotency() const { return nil_; }
  const Lattice& kernel_lattice() const { return kernel_lattice_; }

  /// Coordinates of the form with values f[p] on basis(L)[p]; nullopt if it is
  /// not in the span of the t^a g_j on this truncation.
  std::optional<LVector> coords(const KVec& f) const {
    auto c = solve(T_->field(), vecs_, f);
    if (!c) return std::nullopt;
    LVector out = to_lvector(*c);
    for (auto& x : out) x.truncate(prec_);
    return out;
  }

  /// f(x) = coefficient of mu at op(x), for x in basis(L).
  template <class Op>
  KVec functional(int mu, Op op) const {
    const auto& B = T_->basis(L_);
    KVec f(B.size(), FieldElem{0});
    for (std::size_t p = 0; p < B.size(); ++p) {
      const Sparse y = op(Tower::unit(B[p]));
      auto it = y.find(mu);
      if (it != y.end()) f[p] = it->second;
    }
    return f;
  }

private:
  LVector to_lvector(const KVec& c) const {
    const int r = static_cast<int>(mu_.size());
    LVector out(r);
    for (int j = 0; j < r; ++j)
      for (int a = 0; a < nil_; ++a)
        if (c[j * nil_ + a].v != 0) out[j].set(a, c[j * nil_ + a]);
    return out;
  }

  const Tower* T_;
  int L_;
  std::vector<int> mu_;
  int nil_ = 0;
  std::vector<KVec> vecs_;
  Lattice kernel_lattice_;
  int prec_ = 0;
};

/// Dual-basis monomials: pivots of Delta[t] in V_L, smallest monomials first.
inline std::vector<int> dual_monomials(const Tower& T, int L) {
  KSpace S(&T.field(), T.basis(L).size());
  for (const auto& v : t_kernel(T, L)) S.insert(v);
  std::vector<int> mu;
  for (std::size_t p : S.pivots()) mu.push_back(T.basis(L)[p]);
  return mu;
}

// ---------------------------------------------------------------------------

/// Default expansion level for one-variable presentations.
inline int default_top(long q, int nvars) {
  if (nvars == 1) return q <= 2 ? 8 : (q <= 3 ? 6 : 5);
  return q <= 2 ? 5 : 4;
}

struct DerivedModule {
  std::shared_ptr<const Tower> tower;
  std::vector<int> mu;
  std::vector<std::string> basis_names;  ///< mu_j^* labels
  std::shared_ptr<const DualSolver> solver;
  LMatrix A;  ///< phi(g_j) = sum_i A_ij g_i
  LMatrix H;  ///< A^{-1}
  bool exact = false;
  int precision = 0;  ///< certified t-precision of psi-coordinates
  AdmissibilityReport admissibility;
  FieldElem omega{0};                  ///< the sampled Teichmuller unit in k
  std::vector<FieldElem> teich_diag;   ///< its action on g_j
  PhiGammaModule module;

  int rank() const { return static_cast<int>(mu.size()); }
  OneVarModule engine() const {
    bool h_exact = true;
    for (const auto& row : H)
      for (const auto& x : row) h_exact = h_exact && x.exact();
    return OneVarModule(module.ring->field, module.ring->q(), module.ring->is_Qp, A, h_exact ? std::optional<LMatrix>(H) : std::nullopt);
  }
};

namespace detail {

inline Laurent snap(const Laurent& x) {
  if (x.exact()) return x;
  if (x.is_zero() ? x.prec >= 2 : (x.end() <= x.prec / 2 && x.prec >= 4)) {
    Laurent r = x;
    r.prec = kExact;
    r.normalize();
    return r;
  }
  return x;
}

inline bool agree(const Field& k, const Laurent& a, const Laurent& b) {
  const int p = std::min(a.prec, b.prec);
  return sub(k, a.truncated(p), b.truncated(p)).is_zero();
}

/// psi(t^i g_j) for i < imax, coordinates[i][j] in the g-basis.
inline std::vector<std::vector<LVector>> psi_coordinates(const Tower& T, const DualSolver& S, const std::vector<int>& mu, int imax) {
  std::vector<std::vector<LVector>> out(imax);
  for (int i = 0; i < imax; ++i)
    for (int mj : mu) {
      const KVec f = S.functional(mj, [&](const Sparse& x) { return T.t_pow(0, T.phi(0, x), i); });
      auto c = S.coords(f);
      if (!c) throw RankExtractionUnstable("psi of a dual basis vector is not in the dual on the truncation");
      out[i].push_back(*c);
    }
  return out;
}

}  // namespace detail

/// D = Delta^* (x) k((t)) for a one-variable admissible presentation, in the
/// basis g_j = mu_j^*. The phi-matrix is reconstructed from psi(t^i g_j),
/// i < q, snapped to Laurent polynomials when stable, and re-verified against
/// psi(t^i g_j) for q <= i < 2q.
namespace detail {

inline DerivedModule derive_at(const Presentation& P, int top) {
  auto T = std::make_shared<const Tower>(P, top);
  const AdmissibilityReport adm = check_admissible(*T, false);
  const Field& k = *P.k;
  const int Lv = T->valid_level();
  DerivedModule out;
  out.tower = T;
  out.admissibility = adm;
  out.mu = dual_monomials(*T, Lv);
  for (int m : out.mu) out.basis_names.push_back("(" + T->mono_string(m) + ")^*");
  const int r = out.rank();
  if (r == 0) throw RankExtractionUnstable("Delta[t] is zero");
  for (int m : out.mu)
    if (T->mono(m).level > Lv - 2) throw RankExtractionUnstable("dual basis monomial too close to the truncation");
  const long q = P.q;
  const FieldElem qpi = P.is_Qp ? k.one() : k.zero();
  auto S = std::make_shared<const DualSolver>(*T, Lv - 1, out.mu);
  const DualSolver S_low(*T, Lv - 2, out.mu);
  out.solver = S;
  out.precision = S->precision();
  const auto hi = detail::psi_coordinates(*T, *S, out.mu, static_cast<int>(2 * q));
  const auto lo = detail::psi_coordinates(*T, S_low, out.mu, static_cast<int>(q));
  for (long i = 0; i < q; ++i)
    for (int j = 0; j < r; ++j)
      for (int l = 0; l < r; ++l)
        if (!detail::agree(k, hi[i][j][l], lo[i][j][l])) throw RankExtractionUnstable("psi-coordinates disagree between truncation levels");
  // H_lj from y_i = psi(t^i H_lj).
  out.H.assign(r, LVector(r));
  out.exact = true;
  for (int l = 0; l < r; ++l)
    for (int j = 0; j < r; ++j) {
      std::vector<Laurent> y;
      for (long i = 0; i < q; ++i) y.push_back(hi[i][j][l]);
      const auto parts = components_from_psi(k, y, qpi, S->precision());
      out.H[l][j] = detail::snap(recompose(k, parts));
    }
  if (determinant(k, out.H).is_zero()) throw RankExtractionUnstable("reconstructed inverse phi-matrix is singular");
  const int want = 4 * static_cast<int>(q) * (S->precision() + 4);
  out.A = inverse_matrix(k, out.H, want);
  for (auto& row : out.A)
    for (auto& x : row) {
      x = detail::snap(x);
      out.exact = out.exact && x.exact();
    }
  if (out.exact) out.H = inverse_matrix(k, out.A, want);
  // Independent check on the shifts not used by the reconstruction.
  for (long i = 0; i < 2 * q; ++i)
    for (int j = 0; j < r; ++j)
      for (int l = 0; l < r; ++l) {
        const Laurent pred = psi(k, mul(k, Laurent::monomial(static_cast<int>(i), k.one()), out.H[l][j]), q, qpi);
        if (!detail::agree(k, pred, hi[i][j][l])) throw RankExtractionUnstable("reconstructed matrix fails the psi cross-check");
      }
  // Module data; the Teichmuller sample acts diagonally on the dual basis.
  PhiGammaModule& M = out.module;
  M.ring = make_series_ring(P.k, P.vars, P.is_Qp);
  M.local = P.local;
  M.rank = r;
  SMatrix phi(r, std::vector<Series>(r, Series(M.ring)));
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) phi[i][j] = to_series(M.ring, out.A[i][j]);
  M.phi = {phi};
  const auto omega = action_series(M, "teich", 2)[1];
  SMatrix G(r, std::vector<Series>(r, Series(M.ring)));
  out.omega = omega;
  for (int j = 0; j < r; ++j) {
    out.teich_diag.push_back(k.pow(omega, -T->weight(0, out.mu[j])));
    G[j][j] = Series::constant(M.ring, out.teich_diag.back());
  }
  M.labels = out.basis_names;
  M.gamma[{0, "teich"}] = G;
  check_etale(M);
  check_commutations(M);
  return out;
}

}  // namespace detail

/// Without an explicit level, raises the expansion level (up to
/// kPrecisionRetries times) until the snapped phi-matrix is exact.
inline DerivedModule derive_module(const Presentation& P, std::optional<int> top_opt = {}) {
  if (P.nvars() != 1) throw InvalidArgument("derive_module handles one variable; multivariable example (a) goes through the monomial engine");
  if (top_opt) return detail::derive_at(P, *top_opt);
  const int top = default_top(P.q, 1);
  DerivedModule out = detail::derive_at(P, top);
  for (int r = 1; r <= kPrecisionRetries && !out.exact; ++r) out = detail::derive_at(P, top + r);
  return out;
}

/// Matrix of l -> l o f from (target dual) to (source dual), for the map
/// f: Delta_src -> Delta_dst sending generator g to gen_map[g] (-1: zero).
inline LMatrix pullback_matrix(const DerivedModule& src, const DerivedModule& dst, const std::vector<int>& gen_map) {
  const Tower& Ts = *src.tower;
  const Tower& Td = *dst.tower;
  const Field& k = Ts.field();
  auto f = [&](const Sparse& x) {
    Sparse y;
    for (const auto& [idx, c] : x) {
      const auto& m = Ts.mono(idx);
      const int g = gen_map.at(m.gen);
      if (g < 0) continue;
      const int j = Td.index(m.i, m.n, g);
      if (j == -1) continue;
      if (j == -2) throw InvalidArgument("map leaves the target expansion");
      const FieldElem v = k.add(y.count(j) ? y[j] : FieldElem{0}, c);
      if (v.v == 0)
        y.erase(j);
      else
        y[j] = v;
    }
    return Td.nf(y);
  };
  LMatrix m(src.rank(), LVector(dst.rank()));
  for (int j = 0; j < dst.rank(); ++j) {
    const KVec fun = src.solver->functional(dst.mu[j], f);
    auto c = src.solver->coords(fun);
    if (!c) throw RankExtractionUnstable("pulled-back functional is not in the dual on the truncation");
    for (int i = 0; i < src.rank(); ++i) m[i][j] = (*c)[i];
  }
  return m;
}

}  // namespace psilat
