#pragma once

// The worked examples: up-closed families, the presentations (a)-(d) with
// their sub/quotient pieces, and verdict reports built on top of them.

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "psilat/dual.hpp"
#include "psilat/monomial_engine.hpp"

namespace psilat {

// ---------------------------------------------------------------------------
// Up-closed families of nonempty subsets of {0..n-1}, subsets as bitmasks.

struct UpSetFamily {
  int n = 0;
  std::vector<unsigned> members;  ///< sorted

  bool contains(unsigned C) const { return std::binary_search(members.begin(), members.end(), C); }
  bool subset_of(const UpSetFamily& o) const {
    return std::includes(o.members.begin(), o.members.end(), members.begin(), members.end());
  }
  std::string name() const {
    std::string s = "{";
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (i) s += ",";
      s += "{";
      bool first = true;
      for (int d = 0; d < n; ++d)
        if (members[i] >> d & 1u) {
          if (!first) s += ",";
          s += std::to_string(d + 1);
          first = false;
        }
      s += "}";
    }
    return s + "}";
  }
};

/// All up-closed families, ordered by size then lexicographically.
inline std::vector<UpSetFamily> enumerate_upsets(int n) {
  if (n < 1 || n > 4) throw InvalidArgument("enumerate_upsets supports 1..4 variables");
  const unsigned full = (1u << n) - 1;
  std::vector<unsigned> subsets;
  for (unsigned C = 1; C <= full; ++C) subsets.push_back(C);
  std::vector<UpSetFamily> out;
  const unsigned long total = 1ul << subsets.size();
  for (unsigned long mask = 0; mask < total; ++mask) {
    UpSetFamily F{n, {}};
    for (std::size_t i = 0; i < subsets.size(); ++i)
      if (mask >> i & 1ul) F.members.push_back(subsets[i]);
    bool closed = true;
    for (unsigned C : F.members)
      for (int d = 0; d < n && closed; ++d)
        if (!F.contains(C | (1u << d))) closed = false;
    if (closed) out.push_back(std::move(F));
  }
  std::sort(out.begin(), out.end(), [](const UpSetFamily& a, const UpSetFamily& b) {
    return a.members.size() != b.members.size() ? a.members.size() < b.members.size() : a.members < b.members;
  });
  return out;
}

inline UpSetFamily family_empty(int n) { return {n, {}}; }
inline UpSetFamily family_all_nonempty(int n) {
  UpSetFamily F{n, {}};
  for (unsigned C = 1; C < (1u << n); ++C) F.members.push_back(C);
  return F;
}

// ---------------------------------------------------------------------------
// Presentation assembly.

namespace detail {

class PresBuilder {
public:
  PresBuilder(long q, std::vector<std::string> vars) {
    if (q != 2 && q != 3) throw ParameterOutOfRange("the examples are built for q = p in {2, 3}");
    P_.k = make_field(q);
    P_.q = q;
    P_.is_Qp = true;
    P_.local = LocalRingParams{static_cast<int>(q), 1, 1, {}, 16, {}};
    P_.vars = std::move(vars);
    P_.t_action.resize(P_.vars.size());
    P_.weights.resize(P_.vars.size());
  }
  int gen(const std::string& name, int weight) {
    P_.gens.push_back(name);
    for (std::size_t d = 0; d < P_.vars.size(); ++d) {
      P_.t_action[d].push_back(-1);
      P_.weights[d].push_back(weight);
    }
    return P_.ngens() - 1;
  }
  void set_weight(int d, int g, int w) { P_.weights[d][g] = w; }
  void t_maps(int d, int from, int to) { P_.t_action[d][from] = to; }
  /// term: coeff * t_d^e phi_{phi_dir} gen (single-variable exponent in direction d)
  struct T {
    long coeff;
    int e;
    bool phi;
    int gen;
  };
  void rel(const std::string& label, int d, std::vector<T> terms) {
    Relation r{label, {}};
    for (const auto& x : terms) {
      if (x.coeff % P_.q == 0) continue;
      std::vector<int> texp(P_.vars.size(), 0);
      texp[d] = x.e;
      r.terms.push_back(RelTerm{P_.k->from_int(x.coeff), texp, x.phi ? d : -1, x.gen});
    }
    P_.relations.push_back(std::move(r));
  }
  Presentation done() {
    P_.validate();
    return std::move(P_);
  }

private:
  Presentation P_;
};

}  // namespace detail

/// A presentation together with the two ends of its exact sequence of Delta's.
/// sub_map sends sub generators into the total, quot_map sends total
/// generators to the quotient (-1 for zero).
struct ExampleTriple {
  Presentation total, sub, quot;
  std::vector<int> sub_map, quot_map;
  std::vector<std::string> notes;
};

/// Example (a): B_D = B / span{e_C : C in family}, one relation per direction.
inline Presentation example_a(long q, const std::vector<long>& c, const std::vector<int>& m, const UpSetFamily& family) {
  const int n = family.n;
  if (static_cast<int>(c.size()) != n || static_cast<int>(m.size()) != n) throw InvalidArgument("example (a) needs one c and one m per variable");
  for (long x : c)
    if (((x % q) + q) % q == 0) throw ParameterOutOfRange("c_d must be a unit of k");
  std::vector<std::string> vars;
  for (int d = 0; d < n; ++d) vars.push_back(n == 1 ? "t" : "t" + std::to_string(d + 1));
  detail::PresBuilder B(q, vars);
  std::vector<int> idx(1u << n, -1);
  for (unsigned C = 0; C < (1u << n); ++C) {
    if (family.contains(C)) continue;
    std::string name = "e_";
    if (C == 0) name += "0";
    for (int d = 0; d < n; ++d)
      if (C >> d & 1u) name += std::to_string(d + 1);
    idx[C] = B.gen(name, 0);
    for (int d = 0; d < n; ++d) B.set_weight(d, idx[C], m[d] + static_cast<int>(C >> d & 1u));
  }
  for (unsigned C = 0; C < (1u << n); ++C) {
    if (idx[C] < 0) continue;
    for (int d = 0; d < n; ++d)
      if (!(C >> d & 1u) && idx[C | (1u << d)] >= 0) B.t_maps(d, idx[C], idx[C | (1u << d)]);
  }
  for (int d = 0; d < n; ++d) B.rel("r" + std::to_string(d + 1), d, {{1, static_cast<int>(q - 1), true, idx[0]}, {-c[d], 0, false, idx[0]}});
  return B.done();
}

/// Example (b): extension of two rank-one modules, parameter alpha in k.
inline ExampleTriple example_b(long q, long alpha, int a) {
  ExampleTriple X;
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", 1 + a), e2 = B.gen("e2", 2 + a), f = B.gen("f", 2 + a);
    B.t_maps(0, e1, e2);
    B.rel("t^(q-1) phi f - f", 0, {{1, static_cast<int>(q - 1), true, f}, {-1, 0, false, f}});
    B.rel("t^(q-1) phi e1 - e1 - alpha t^(q-2) phi f", 0,
          {{1, static_cast<int>(q - 1), true, e1}, {-1, 0, false, e1}, {-alpha, static_cast<int>(q - 2), true, f}});
    X.total = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int f = B.gen("f", 2 + a);
    B.rel("t^(q-1) phi f - f", 0, {{1, static_cast<int>(q - 1), true, f}, {-1, 0, false, f}});
    X.sub = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", 1 + a), e2 = B.gen("e2", 2 + a);
    B.t_maps(0, e1, e2);
    B.rel("t^(q-1) phi e1 - e1", 0, {{1, static_cast<int>(q - 1), true, e1}, {-1, 0, false, e1}});
    X.quot = B.done();
  }
  X.sub_map = {2};
  X.quot_map = {0, 1, -1};
  X.notes.push_back("for F = Q_p the character of D_1 is the one of D_2 times the cyclotomic character");
  return X;
}

/// Example (c): rank-two constituents, 0 <= s <= q-1 (and q-2-s >= 0).
inline ExampleTriple example_c(long q, int a, int s) {
  if (s < 0 || s > q - 1) throw ParameterOutOfRange("example (c) needs 0 <= s <= q-1");
  if (q - 2 - s < 0) throw ParameterOutOfRange("example (c) needs q-2-s >= 0 for the exponent of phi f1");
  const int Q = static_cast<int>(q);
  ExampleTriple X;
  auto f_part = [&](detail::PresBuilder& B, int f1, int f2) {
    B.rel("t^(q-2-s) phi f1 - f2", 0, {{1, Q - 2 - s, true, f1}, {-1, 0, false, f2}});
    B.rel("t^(1+s) phi f2 - f1", 0, {{1, 1 + s, true, f2}, {-1, 0, false, f1}});
  };
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", a), e2 = B.gen("e2", a), et = B.gen("e~", a + 1), f1 = B.gen("f1", 1 + a), f2 = B.gen("f2", a - s);
    B.t_maps(0, e1, et);
    B.rel("t^(q-1) phi e1 - e2 - t^s phi f2", 0, {{1, Q - 1, true, e1}, {-1, 0, false, e2}, {-1, s, true, f2}});
    B.rel("phi e2 - e1", 0, {{1, 0, true, e2}, {-1, 0, false, e1}});
    f_part(B, f1, f2);
    X.total = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int f1 = B.gen("f1", 1 + a), f2 = B.gen("f2", a - s);
    f_part(B, f1, f2);
    X.sub = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", a), e2 = B.gen("e2", a), et = B.gen("e~", a + 1);
    B.t_maps(0, e1, et);
    B.rel("t^(q-1) phi e1 - e2", 0, {{1, Q - 1, true, e1}, {-1, 0, false, e2}});
    B.rel("phi e2 - e1", 0, {{1, 0, true, e2}, {-1, 0, false, e1}});
    X.quot = B.done();
  }
  X.sub_map = {3, 4};
  X.quot_map = {0, 1, 2, -1, -1};
  return X;
}

/// Example (d): trivial t-action on the generators, 0 <= s <= kappa <= q-1.
inline ExampleTriple example_d(long q, int kappa, int s) {
  if (s < 0 || s > kappa || kappa > q - 1) throw ParameterOutOfRange("example (d) needs 0 <= s <= kappa <= q-1");
  const int Q = static_cast<int>(q);
  ExampleTriple X;
  auto f_part = [&](detail::PresBuilder& B, int f1, int f2) {
    B.rel("t^(kappa-s) phi f1 - f2", 0, {{1, kappa - s, true, f1}, {-1, 0, false, f2}});
    B.rel("t^(q-1-kappa+s) phi f2 - f1", 0, {{1, Q - 1 - kappa + s, true, f2}, {-1, 0, false, f1}});
  };
  auto e_rel2 = [&](detail::PresBuilder& B, int e1, int e2) {
    B.rel("t^(q-1-kappa) phi e2 - e1", 0, {{1, Q - 1 - kappa, true, e2}, {-1, 0, false, e1}});
  };
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", 0), e2 = B.gen("e2", kappa), f1 = B.gen("f1", 0), f2 = B.gen("f2", kappa - s);
    B.rel("t^kappa phi e1 - e2 + t^s phi f2", 0, {{1, kappa, true, e1}, {-1, 0, false, e2}, {1, s, true, f2}});
    e_rel2(B, e1, e2);
    f_part(B, f1, f2);
    X.total = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int f1 = B.gen("f1", 0), f2 = B.gen("f2", kappa - s);
    f_part(B, f1, f2);
    X.sub = B.done();
  }
  {
    detail::PresBuilder B(q, {"t"});
    const int e1 = B.gen("e1", 0), e2 = B.gen("e2", kappa);
    B.rel("t^kappa phi e1 - e2", 0, {{1, kappa, true, e1}, {-1, 0, false, e2}});
    e_rel2(B, e1, e2);
    X.quot = B.done();
  }
  X.sub_map = {2, 3};
  X.quot_map = {0, 1, -1, -1};
  if (s == 0) X.notes.push_back("s = 0: D lies in the image of the functor from supersingular Hecke modules");
  else X.notes.push_back("s != 0: D is outside the image of the functor from supersingular Hecke modules");
  return X;
}

// ---------------------------------------------------------------------------
// Exact sequences of derived modules.

/// 0 -> D_1 -> D -> D_2 -> 0 obtained by dualizing 0 -> sub -> total -> quot -> 0:
/// D_1 comes from the quotient presentation and D_2 from the sub presentation.
struct DerivedTriple {
  DerivedModule d, d1, d2;
  LMatrix iota;  ///< D_1 -> D, columns are images of the basis of D_1
  LMatrix rho;   ///< D -> D_2
};

namespace detail {

inline bool lmatrix_equal(const Field& k, const LMatrix& a, const LMatrix& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j)
      if (!sub(k, a[i][j], b[i][j]).is_zero()) return false;
  return true;
}

/// Least precision among the entries (kExact when all are exact).
inline int lmatrix_precision(const LMatrix& a) {
  int p = kExact;
  for (const auto& row : a)
    for (const auto& x : row) p = std::min(p, x.prec);
  return p;
}

inline constexpr int kMinMapPrecision = 8;

inline int lmatrix_valuation(const LMatrix& a) {
  int v = kExact;
  for (const auto& row : a)
    for (const auto& x : row)
      if (!x.is_zero()) v = std::min(v, x.val());
  return v;
}

/// Replaces F (with A_out phi(F) = F A_in to precision) by its snapped version
/// when that satisfies the identity exactly and agrees with F beyond the
/// valuation bound that forces a phi-equivariant difference to vanish.
inline void certify_map(const Field& k, long q, LMatrix& F, const LMatrix& A_out, const LMatrix& A_in, const LMatrix& A_in_inv) {
  LMatrix S = F;
  for (auto& row : S)
    for (auto& x : row) x = snap(x);
  if (lmatrix_precision(S) < kExact || lmatrix_precision(A_out) < kExact || lmatrix_precision(A_in) < kExact ||
      lmatrix_precision(A_in_inv) < kExact)
    return;
  if (!lmatrix_equal(k, matmul(k, A_out, phi_matrix(S, q)), matmul(k, S, A_in))) return;
  const int c = lmatrix_valuation(A_out) + lmatrix_valuation(A_in_inv);
  const int bound = static_cast<int>((-c + (q - 2)) / (q - 1)) + 1;  // ceil(-c/(q-1)) + 1 > -c/(q-1)
  if (lmatrix_precision(F) < std::max(bound, 1)) return;
  F = std::move(S);
}

}  // namespace detail

/// Derives all three modules at a common expansion level, raising it until the
/// connecting maps are known to precision kMinMapPrecision.
inline DerivedTriple derive_triple(const ExampleTriple& X) {
  const Field& k = *X.total.k;
  const long q = X.total.q;
  DerivedTriple T{derive_module(X.total), derive_module(X.quot), derive_module(X.sub), {}, {}};
  const int top0 = std::max({T.d.tower->top(), T.d1.tower->top(), T.d2.tower->top()});
  for (int extra = 0;; ++extra) {
    if (extra > 0 || T.d.tower->top() != top0 || T.d1.tower->top() != top0 || T.d2.tower->top() != top0)
      T = DerivedTriple{derive_module(X.total, top0 + extra), derive_module(X.quot, top0 + extra), derive_module(X.sub, top0 + extra), {}, {}};
    T.iota = pullback_matrix(T.d, T.d1, X.quot_map);
    T.rho = pullback_matrix(T.d2, T.d, X.sub_map);
    if (std::min(detail::lmatrix_precision(T.iota), detail::lmatrix_precision(T.rho)) >= detail::kMinMapPrecision) {
      detail::certify_map(k, q, T.iota, T.d.A, T.d1.A, T.d1.H);
      detail::certify_map(k, q, T.rho, T.d2.A, T.d.A, T.d.H);
      break;
    }
    if (extra >= kPrecisionRetries) throw PrecisionExhausted("connecting maps stay below precision " + std::to_string(detail::kMinMapPrecision));
  }
  const int r1 = T.d1.rank(), r2 = T.d2.rank();
  if (T.d.rank() != r1 + r2) throw RankExtractionUnstable("ranks of the sequence do not add up");
  const LMatrix zero(r2, LVector(r1, Laurent::zero()));
  if (!detail::lmatrix_equal(k, matmul(k, T.rho, T.iota), zero)) throw CommutationFailure("rho o iota != 0");
  if (!detail::lmatrix_equal(k, matmul(k, T.d.A, phi_matrix(T.iota, q)), matmul(k, T.iota, T.d1.A)))
    throw CommutationFailure("iota does not commute with phi");
  if (!detail::lmatrix_equal(k, matmul(k, T.d2.A, phi_matrix(T.rho, q)), matmul(k, T.rho, T.d.A)))
    throw CommutationFailure("rho does not commute with phi");
  return T;
}

/// {x in D_1 : iota x in L}, through the Hermite basis of M^{-1} L for an
/// invertible completion M = [unit columns | iota].
inline Lattice lattice_preimage(const Field& k, const LMatrix& iota, const Lattice& L) {
  const int n = static_cast<int>(iota.size());
  const int r = iota.empty() ? 0 : static_cast<int>(iota[0].size());
  const int c = n - r;
  std::vector<int> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + c, 1);
  std::sort(pick.begin(), pick.end());
  std::optional<LMatrix> M;
  do {
    LMatrix m(n, LVector(n, Laurent::zero()));
    int col = 0;
    for (int i = 0; i < n; ++i)
      if (pick[i]) m[i][col++] = Laurent::monomial(0, k.one());
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < n; ++i) m[i][c + j] = iota[i][j];
    if (!determinant(k, m).is_zero()) {
      M = std::move(m);
      break;
    }
  } while (std::next_permutation(pick.begin(), pick.end()));
  if (!M) throw NotFullRank("iota is not injective");
  const int want = 4 * (L.hi() - L.lo() + 8);
  const LMatrix Minv = inverse_matrix(k, *M, want);
  std::vector<LVector> gens;
  for (const auto& b : L.basis()) gens.push_back(matvec(k, Minv, b));
  const auto hb = Lattice::from_generators(k, n, gens).basis();
  std::vector<LVector> pre;
  for (int j = c; j < n; ++j) pre.emplace_back(hb[j].begin() + c, hb[j].end());
  return Lattice::from_generators(k, r, pre);
}

enum class SequenceKind { natural, sharp };

struct ExactnessReport {
  SequenceKind which = SequenceKind::natural;
  bool left_exact = false;
  bool right_exact = false;
  bool middle_exact = false;
  int middle_homology_dim = 0;
  Lattice L, L1, L2, preimage;
};

inline ExactnessReport exactness_report(const DerivedTriple& T, SequenceKind which) {
  const Field& k = *T.d.module.ring->field;
  auto pick = [&](const DerivedModule& m) {
    const auto E = m.engine();
    const auto ds = dsharp(E);
    return which == SequenceKind::sharp ? ds.lattice : dnatural(E, ds.lattice).lattice;
  };
  ExactnessReport rep;
  rep.which = which;
  rep.L = pick(T.d);
  rep.L1 = pick(T.d1);
  rep.L2 = pick(T.d2);
  rep.preimage = lattice_preimage(k, T.iota, rep.L);
  rep.left_exact = rep.preimage.contains(rep.L1);
  std::vector<LVector> img;
  for (const auto& b : rep.L.basis()) img.push_back(matvec(k, T.rho, b));
  rep.right_exact = Lattice::from_generators(k, T.d2.rank(), img) == rep.L2;
  rep.middle_homology_dim = rep.left_exact ? rep.L1.quotient_dims(rep.preimage).dim : -1;
  rep.middle_exact = rep.middle_homology_dim == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Sections of D -> D_2.

struct SplittingReport {
  int bound = 0;
  bool found = false;
  bool exact_data = true;  ///< false: equations truncated, a found section is approximate
  LMatrix section;  ///< D_2 -> D when found
};

/// Searches s: D_2 -> D with rho s = 1, A phi(s) = s A_2 and commuting with the
/// Teichmuller sample, entries Laurent polynomials with exponents in [-B, B].
inline SplittingReport splitting_search(const DerivedTriple& T, int B) {
  if (B < 0) throw InvalidArgument("bound must be >= 0");
  const Field& k = *T.d.module.ring->field;
  const long q = T.d.module.ring->q();
  const int n = T.d.rank(), r2 = T.d2.rank();
  const int w = 2 * B + 1;
  const std::size_t nv = static_cast<std::size_t>(n) * r2 * w;
  auto var = [&](int i, int j, int e) { return (static_cast<std::size_t>(i) * r2 + j) * w + (e + B); };
  // Each equation family is linear in S; collect coefficients by evaluating on unit unknowns.
  using Key = std::tuple<int, int, int, int>;  // family, row, col, exponent
  std::map<Key, KVec> rows;
  // Equations at or beyond the certified precision of an entry are dropped.
  std::map<std::tuple<int, int, int>, int> cut;
  auto add = [&](int fam, const LMatrix& val, std::size_t v) {
    for (std::size_t a = 0; a < val.size(); ++a)
      for (std::size_t b = 0; b < val[a].size(); ++b) {
        const Laurent& x = val[a][b];
        const std::tuple<int, int, int> ck{fam, static_cast<int>(a), static_cast<int>(b)};
        cut[ck] = std::min(cut.count(ck) ? cut[ck] : kExact, x.prec);
        for (std::size_t s = 0; s < x.c.size(); ++s) {
          if (x.c[s].v == 0) continue;
          auto& row = rows[{fam, static_cast<int>(a), static_cast<int>(b), x.start + static_cast<int>(s)}];
          if (row.empty()) row.assign(nv, FieldElem{0});
          row[v] = k.add(row[v], x.c[s]);
        }
      }
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r2; ++j)
      for (int e = -B; e <= B; ++e) {
        LMatrix S(n, LVector(r2, Laurent::zero()));
        S[i][j] = Laurent::monomial(e, k.one());
        const std::size_t v = var(i, j, e);
        add(0, matmul(k, T.rho, S), v);
        add(1, sub_matrix(k, matmul(k, T.d.A, phi_matrix(S, q)), matmul(k, S, T.d2.A)), v);
        // Teichmuller: omega^e * diag_i = diag2_j on the coefficient of t^e in S_ij
        LMatrix G(n, LVector(r2, Laurent::zero()));
        G[i][j] = Laurent::monomial(0, k.sub(k.mul(k.pow(T.d.omega, e), T.d.teich_diag[i]), T.d2.teich_diag[j]));
        G[i][j].normalize();
        add(2, G, v);
      }
  // rho S = identity on the family-0 equations with exponent 0 on the diagonal.
  std::vector<KVec> eqs;
  KVec rhs;
  SplittingReport rep;
  rep.bound = B;
  for (auto& [key, row] : rows) {
    const auto& [fam, a, b, e] = key;
    const int c = cut[{fam, a, b}];
    if (c < kExact) rep.exact_data = false;
    if (e >= c) continue;
    eqs.push_back(row);
    rhs.push_back(fam == 0 && a == b && e == 0 ? k.one() : k.zero());
  }
  for (int a = 0; a < r2; ++a)
    if (!rows.count({0, a, a, 0})) {
      eqs.push_back(KVec(nv, FieldElem{0}));
      rhs.push_back(k.one());
    }
  const auto sol = solve_equations(k, eqs, rhs, nv);
  if (!sol) return rep;
  rep.found = true;
  rep.section.assign(n, LVector(r2, Laurent::zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < r2; ++j) {
      for (int e = -B; e <= B; ++e) rep.section[i][j].set(e, (*sol)[var(i, j, e)]);
      rep.section[i][j].normalize();
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Example (a) in several variables. B is a tensor product of one-variable
// pieces, so Delta_D* is computed from one-variable annihilators and checked
// against the multi-variable presentation on truncations.

struct FamilyEntry {
  UpSetFamily family;
  MonoLattice lattice;
  bool psi_stable = false;
  int delta_t_dim = 0;        ///< from the multi-variable presentation
  bool generators_match = false;  ///< dim Delta[t] = number of minimal generators
  bool phi_injective = false;
  bool dims_match = false;    ///< truncated dims agree with the tensor prediction
};

struct LatticeFamilyReport {
  long q = 0;
  std::vector<long> c;
  std::vector<int> m;
  std::vector<int> ann_valuation;  ///< Ann(K^(d)) = t_d^v Delta_empty^(d)*
  MonomialModule module{nullptr, 2, true, {}};
  std::vector<FamilyEntry> entries;
  std::vector<std::vector<bool>> equal;  ///< pairwise equality matrix
  int distinct = 0;
  bool order_reversed = true;
  MonoLattice sharp, natural;
  bool sharp_unique = false;
  bool empty_is_sharp = false, full_is_natural = false;
  bool klara_full = false, klara_empty = true;
  std::vector<int> tops;

  bool ok() const {
    bool e = true;
    for (const auto& x : entries) e = e && x.psi_stable && x.generators_match && x.phi_injective && x.dims_match;
    return e && distinct == static_cast<int>(entries.size()) && order_reversed && sharp_unique && empty_is_sharp && full_is_natural &&
           klara_full && !klara_empty;
  }
};

namespace detail {

/// dim of the kernel of B_empty -> B_D on a truncation, from the one-variable
/// dims y_d (all of Delta_empty) and x_d (the kernel K^(d)), by inclusion-exclusion
/// over the subspaces (x)_{d in C} K^(d) (x)_{d not in C} Delta^(d).
inline long predicted_kernel_dim(const UpSetFamily& F, const std::vector<long>& x, const std::vector<long>& y) {
  const int n = F.n;
  long total = 0;
  // Sum of subspaces indexed by members; the intersection of a set S of them
  // is indexed by the union of the members in S.
  const std::size_t M = F.members.size();
  for (unsigned long S = 1; S < (1ul << M); ++S) {
    unsigned U = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < M; ++i)
      if (S >> i & 1ul) {
        U |= F.members[i];
        ++cnt;
      }
    long term = 1;
    for (int d = 0; d < n; ++d) term *= (U >> d & 1u) ? x[d] : y[d];
    total += (cnt % 2 ? 1 : -1) * term;
  }
  return total;
}

inline MonoLattice family_lattice(const UpSetFamily& F, const std::vector<int>& v) {
  MonoLattice L = MonoLattice::standard(F.n, 0);
  for (unsigned C : F.members) {
    std::vector<Point> g;
    for (int d = 0; d < F.n; ++d)
      if (C >> d & 1u) {
        Point a(F.n, 0);
        a[d] = v[d];
        g.push_back(a);
      }
    L = L.intersect(MonoLattice(F.n, g));
  }
  return L;
}

}  // namespace detail

inline LatticeFamilyReport lattice_family_report(long q, const std::vector<long>& c, const std::vector<int>& m) {
  const int n = static_cast<int>(c.size());
  if (n < 1 || static_cast<int>(m.size()) != n) throw InvalidArgument("one c and one m per variable");
  LatticeFamilyReport rep;
  rep.q = q;
  rep.c = c;
  rep.m = m;
  std::vector<Laurent> A;
  FieldPtr k;
  bool is_Qp = true;
  for (int d = 0; d < n; ++d) {
    const DerivedModule E = derive_module(example_a(q, {c[d]}, {m[d]}, family_empty(1)));
    const DerivedModule N = derive_module(example_a(q, {c[d]}, {m[d]}, family_all_nonempty(1)));
    if (E.rank() != 1 || N.rank() != 1) throw RankExtractionUnstable("one-variable pieces of example (a) must have rank one");
    const LMatrix iota = pullback_matrix(E, N, {0, -1});
    const Laurent& x = iota[0][0];
    const int v = x.val();
    if (v >= x.prec) throw PrecisionExhausted("annihilator valuation is not certified");
    rep.ann_valuation.push_back(v);
    A.push_back(E.A[0][0]);
    k = E.module.ring->field;
    is_Qp = E.module.ring->is_Qp;
  }
  rep.module = MonomialModule::from_rank_one(k, q, is_Qp, A);
  const auto sh = rep.module.dsharp();
  rep.sharp = sh.lattice;
  rep.sharp_unique = rep.module.dsharp(1).lattice == rep.sharp && rep.module.psi_stable(rep.sharp);
  rep.natural = rep.module.dnatural(rep.sharp);

  const int top = default_top(q, n);
  rep.tops = {top, top + 1};
  // one-variable truncation dims per top
  std::vector<std::vector<std::vector<long>>> xs(2), ys(2);
  for (int ti = 0; ti < 2; ++ti)
    for (int d = 0; d < n; ++d) {
      const Tower E(example_a(q, {c[d]}, {m[d]}, family_empty(1)), rep.tops[ti]);
      const Tower N(example_a(q, {c[d]}, {m[d]}, family_all_nonempty(1)), rep.tops[ti]);
      std::vector<long> x, y;
      for (int L = 0; L <= E.valid_level(); ++L) {
        y.push_back(static_cast<long>(E.basis(L).size()));
        x.push_back(y.back() - static_cast<long>(N.basis(L).size()));
      }
      xs[ti].push_back(x);
      ys[ti].push_back(y);
    }

  for (const auto& F : enumerate_upsets(n)) {
    FamilyEntry e;
    e.family = F;
    e.lattice = detail::family_lattice(F, rep.ann_valuation);
    e.psi_stable = rep.module.psi_stable(e.lattice);
    const Presentation P = example_a(q, c, m, F);
    e.dims_match = true;
    for (int ti = 0; ti < 2; ++ti) {
      const Tower T(P, rep.tops[ti]);
      if (ti == 0) {
        const AdmissibilityReport ar = check_admissible(T, false);
        e.delta_t_dim = ar.delta_t_dim;
        e.phi_injective = ar.phi_injective;
      }
      for (int L = 0; L <= T.valid_level(); ++L) {
        std::vector<long> x(n), y(n);
        long all = 1;
        for (int d = 0; d < n; ++d) {
          x[d] = xs[ti][d][L];
          y[d] = ys[ti][d][L];
          all *= y[d];
        }
        e.dims_match = e.dims_match && static_cast<long>(T.basis(L).size()) == all - detail::predicted_kernel_dim(F, x, y);
      }
    }
    e.generators_match = e.delta_t_dim == static_cast<int>(e.lattice.gens().size());
    rep.entries.push_back(std::move(e));
  }
  const std::size_t N = rep.entries.size();
  rep.equal.assign(N, std::vector<bool>(N, false));
  std::set<std::vector<Point>> seen;
  for (std::size_t i = 0; i < N; ++i) {
    seen.insert(rep.entries[i].lattice.gens());
    for (std::size_t j = 0; j < N; ++j) {
      const auto& a = rep.entries[i];
      const auto& b = rep.entries[j];
      rep.equal[i][j] = a.lattice == b.lattice;
      if (a.family.subset_of(b.family) && !a.lattice.contains(b.lattice)) rep.order_reversed = false;
    }
  }
  rep.distinct = static_cast<int>(seen.size());
  for (const auto& e : rep.entries) {
    if (e.family.members.empty()) rep.empty_is_sharp = e.lattice == rep.sharp;
    if (e.family.members.size() + 1 == (1u << n)) rep.full_is_natural = e.lattice == rep.natural;
  }
  rep.klara_full = klara80_certify(example_a(q, c, m, family_all_nonempty(n)), top).certified;
  rep.klara_empty = klara80_certify(example_a(q, c, m, family_empty(n)), top).certified;
  return rep;
}

// ---------------------------------------------------------------------------
// Diagonal restriction of the multi-variable example (a) module.

struct DiagonalReport {
  PhiGammaModule module;       ///< over |D| variables, phi_d from the one-variable pieces
  PhiGammaModule restricted;   ///< one variable
  bool etale = false;
  bool order_independent = false;  ///< phi_D matrix agrees for both composition orders
  Lattice sharp, natural;
  int quotient_dim = -1;
};

inline Series laurent_in_var(const SeriesRingPtr& ring, int d, const Laurent& x) {
  Series s(ring);
  for (int e = x.start; e < x.end(); ++e) {
    if (x.at(e).v == 0) continue;
    Exponent a(ring->nvars(), 0);
    a[d] = e;
    s.set(a, x.at(e));
  }
  if (!x.exact()) s.truncate(d, x.prec);
  return s;
}

inline DiagonalReport diagonal_report(long q, const std::vector<long>& c, const std::vector<int>& m) {
  const int n = static_cast<int>(c.size());
  DiagonalReport rep;
  std::vector<std::string> vars;
  for (int d = 0; d < n; ++d) vars.push_back("t" + std::to_string(d + 1));
  for (int d = 0; d < n; ++d) {
    const DerivedModule E = derive_module(example_a(q, {c[d]}, {m[d]}, family_empty(1)));
    if (d == 0) {
      rep.module.ring = make_series_ring(E.module.ring->field, vars, E.module.ring->is_Qp);
      rep.module.local = E.module.local;
      rep.module.rank = 1;
      rep.module.labels = {"g"};
    }
    rep.module.phi.push_back({{laurent_in_var(rep.module.ring, d, E.A[0][0])}});
  }
  rep.order_independent = phi_D_matrix(rep.module)[0][0] == phi_D_matrix(rep.module, true)[0][0];
  rep.restricted = diagonal_restriction(rep.module);
  rep.etale = check_etale(rep.restricted).etale;
  const OneVarModule M = OneVarModule::from(rep.restricted);
  rep.sharp = dsharp(M).lattice;
  rep.natural = dnatural(M, rep.sharp).lattice;
  rep.quotient_dim = rep.natural.quotient_dims(rep.sharp).dim;
  return rep;
}

}  // namespace psilat
