#pragma once

// Lattices in (k((t)))^n and the one-variable D-sharp / D-natural engine.
//
// A lattice L with t^hi O^n in L in t^lo O^n is stored as the subspace
// L / t^hi O^n of the k-space with coordinates (component j, exponent e),
// lo <= e < hi, ordered component-major and exponent-ascending.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/laurent.hpp"
#include "psilat/linalg.hpp"
#include "psilat/phigamma.hpp"

namespace psilat {

/// Iteration cap for fixed-point loops; reaching it raises NonStabilizing.
inline constexpr int kIterationCap = 64;
/// Precision restarts allowed before PrecisionExhausted escapes an engine call.
inline constexpr int kPrecisionRetries = 3;

struct QuotientReport {
  std::vector<int> divisors;  ///< elementary divisor valuations, descending
  int dim = 0;                ///< sum of divisors
};

class Lattice {
public:
  Lattice() = default;

  /// t^shift O^n.
  static Lattice standard(const Field& k, int n, int shift) {
    Lattice L;
    L.k_ = &k;
    L.n_ = n;
    L.lo_ = L.hi_ = shift;
    L.space_ = KSpace(&k, 0);
    return L;
  }

  /// k[[t]]-span of `gens`. Generators may carry finite precision; the span is
  /// then determined only if some t^h O^n (h + 1 <= precision) is certified to lie in it.
  static Lattice from_generators(const Field& k, int n, const std::vector<LVector>& gens) {
    int lo = kExact, prec = kExact, top = -kExact;
    for (const auto& g : gens) {
      if (static_cast<int>(g.size()) != n) throw InvalidArgument("generator has wrong length");
      for (const auto& x : g) {
        prec = std::min(prec, x.prec);
        if (!x.is_zero()) {
          lo = std::min(lo, x.val());
          top = std::max(top, x.end());
        }
      }
    }
    if (lo >= kExact) {
      if (prec >= kExact) throw NotFullRank("generators are all zero");
      throw PrecisionExhausted("generators vanish at current precision");
    }
    // Exact generators: the determinant of a full-rank subfamily bounds hi.
    const long hcap = prec >= kExact ? static_cast<long>(n) * top - static_cast<long>(n - 1) * lo + 1 : static_cast<long>(prec) - 1;
    std::vector<long> candidates;
    for (long off = 0; lo + off < hcap; off = 2 * off + 1) candidates.push_back(lo + off);
    candidates.push_back(hcap);
    for (long h : candidates) {
      if (h < lo) continue;
      const int hh = static_cast<int>(h);
      Lattice L;
      L.k_ = &k;
      L.n_ = n;
      L.lo_ = lo;
      L.hi_ = hh + 1;
      L.space_ = KSpace(&k, static_cast<std::size_t>(n) * (L.hi_ - lo));
      for (const auto& g : gens) {
        int v = kExact;
        for (const auto& x : g)
          if (!x.is_zero()) v = std::min(v, x.val());
        if (v >= kExact) continue;
        for (int i = 0; v + i <= hh; ++i) {
          LVector s = g;
          for (auto& x : s) x = x.shifted(i);
          L.space_.insert(L.window_vec(s));
        }
      }
      bool ok = true;
      for (int j = 0; j < n && ok; ++j) ok = L.space_.contains(L.unit(j, hh));
      if (!ok) continue;
      L.canonicalize();
      return L;
    }
    if (prec >= kExact) throw NotFullRank("generators do not span a lattice");
    throw PrecisionExhausted("generator precision too small to certify the spanned lattice");
  }

  int rank() const { return n_; }
  int lo() const { return lo_; }
  int hi() const { return hi_; }
  const Field& field() const { return *k_; }
  const KSpace& space() const { return space_; }

  /// Coordinates of x modulo t^hi in the current window.
  KVec window_vec(const LVector& x) const { return window_vec(x, lo_, hi_); }

  bool contains(const LVector& x) const {
    for (const auto& c : x) {
      if (c.is_zero()) {
        if (c.prec < hi_) throw PrecisionExhausted("element not known modulo t^" + std::to_string(hi_));
        continue;
      }
      if (c.val() < lo_) return false;
      if (c.prec < hi_) throw PrecisionExhausted("element not known modulo t^" + std::to_string(hi_));
    }
    return space_.contains(window_vec(x));
  }

  bool contains(const Lattice& o) const {
    const auto [a, b] = common(*this, o);
    return a.space_.contains_space(b.space_);
  }
  friend bool operator==(const Lattice& a, const Lattice& b) {
    return a.n_ == b.n_ && a.lo_ == b.lo_ && a.hi_ == b.hi_ && a.space_ == b.space_;
  }
  friend bool operator!=(const Lattice& a, const Lattice& b) { return !(a == b); }

  Lattice sum(const Lattice& o) const {
    auto [a, b] = common(*this, o);
    for (const auto& r : b.space_.rows()) a.space_.insert(r);
    a.canonicalize();
    return a;
  }
  Lattice intersect(const Lattice& o) const {
    auto [a, b] = common(*this, o);
    a.space_ = a.space_.intersect(b.space_);
    a.canonicalize();
    return a;
  }
  Lattice scale_t(int s) const {
    Lattice r = *this;
    r.lo_ += s;
    r.hi_ += s;
    return r;
  }

  /// Elementary divisors of this inside `outer`.
  QuotientReport quotient_dims(const Lattice& outer) const {
    if (!outer.contains(*this)) throw NotComparable("quotient_dims needs containment");
    const auto [a, b] = common(*this, outer);
    QuotientReport rep;
    rep.dim = static_cast<int>(b.space_.rank() - a.space_.rank());
    int prev = 0;
    std::vector<int> at_least;  // at_least[k-1] = #{divisors >= k}
    for (int kk = 1; prev < rep.dim; ++kk) {
      const Lattice mid = sum(outer.scale_t(kk));
      const auto [m, o] = common(mid, outer);
      const int f = static_cast<int>(o.space_.rank() - m.space_.rank());
      at_least.push_back(f - prev);
      prev = f;
    }
    for (std::size_t kk = 0; kk < at_least.size(); ++kk) {
      const int next = kk + 1 < at_least.size() ? at_least[kk + 1] : 0;
      for (int c = 0; c < at_least[kk] - next; ++c) rep.divisors.push_back(static_cast<int>(kk) + 1);
    }
    std::sort(rep.divisors.rbegin(), rep.divisors.rend());
    return rep;
  }

  /// Lower-triangular Hermite basis: column j has component j equal to
  /// t^{v_j} exactly, zero components above j, and reduced entries below.
  std::vector<LVector> basis() const {
    std::vector<LVector> out;
    const int w = hi_ - lo_;
    for (int j = 0; j < n_; ++j) {
      std::optional<std::size_t> best;
      for (std::size_t r = 0; r < space_.rank(); ++r) {
        const std::size_t p = space_.pivots()[r];
        if (static_cast<int>(p) / w == j) {
          best = r;
          break;
        }
      }
      LVector col(n_);
      if (!best) {
        col[j] = Laurent::monomial(hi_, k_->one());
      } else {
        const KVec& row = space_.rows()[*best];
        for (int c = 0; c < n_; ++c)
          for (int e = 0; e < w; ++e)
            if (row[c * w + e].v != 0) col[c].set(lo_ + e, row[c * w + e]);
      }
      for (auto& x : col) x.normalize();
      out.push_back(std::move(col));
    }
    return out;
  }

  /// Valuations v_j of the pivot entries of basis().
  std::vector<int> pivot_valuations() const {
    std::vector<int> v;
    for (int j = 0; j < n_; ++j) v.push_back(basis()[j][j].val());
    return v;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << "[";
    const auto b = basis();
    for (std::size_t j = 0; j < b.size(); ++j) {
      os << (j ? ", " : "") << "(";
      for (std::size_t c = 0; c < b[j].size(); ++c) os << (c ? ", " : "") << laurent_to_string(*k_, b[j][c]);
      os << ")";
    }
    os << "]";
    return os.str();
  }

  static std::string laurent_to_string(const Field& k, const Laurent& x) {
    if (x.is_zero()) return "0";
    std::string s;
    for (std::size_t i = 0; i < x.c.size(); ++i) {
      if (x.c[i].v == 0) continue;
      if (!s.empty()) s += " + ";
      const int e = x.start + static_cast<int>(i);
      const std::string c = k.to_string(x.c[i]);
      s += (c == "1" && e != 0) ? "" : c;
      if (e != 0) s += (c == "1" ? "" : "*") + std::string("t^") + std::to_string(e);
    }
    return s;
  }

private:
  KVec window_vec(const LVector& x, int lo, int hi) const {
    const int w = hi - lo;
    KVec v(static_cast<std::size_t>(n_) * w, FieldElem{0});
    for (int j = 0; j < n_; ++j)
      for (std::size_t i = 0; i < x[j].c.size(); ++i) {
        const int e = x[j].start + static_cast<int>(i);
        if (e >= hi || x[j].c[i].v == 0) continue;
        if (e < lo) throw InvalidArgument("element leaves the lattice window");
        v[j * w + (e - lo)] = x[j].c[i];
      }
    return v;
  }
  KVec unit(int j, int e) const {
    KVec v(static_cast<std::size_t>(n_) * (hi_ - lo_), FieldElem{0});
    v[j * (hi_ - lo_) + (e - lo_)] = k_->one();
    return v;
  }

  /// Same lattice in the window [lo, hi) (lo <= lo_, hi >= hi_).
  Lattice reembed(int lo, int hi) const {
    Lattice r;
    r.k_ = k_;
    r.n_ = n_;
    r.lo_ = lo;
    r.hi_ = hi;
    const int w = hi_ - lo_, w2 = hi - lo;
    r.space_ = KSpace(k_, static_cast<std::size_t>(n_) * w2);
    for (const auto& row : space_.rows()) {
      KVec v(static_cast<std::size_t>(n_) * w2, FieldElem{0});
      for (int j = 0; j < n_; ++j)
        for (int e = 0; e < w; ++e) v[j * w2 + (e + lo_ - lo)] = row[j * w + e];
      r.space_.insert(std::move(v));
    }
    for (int j = 0; j < n_; ++j)
      for (int e = hi_; e < hi; ++e) r.space_.insert(r.unit(j, e));
    return r;
  }

  static std::pair<Lattice, Lattice> common(const Lattice& a, const Lattice& b) {
    if (a.n_ != b.n_) throw InvalidArgument("lattices of different rank");
    const int lo = std::min(a.lo_, b.lo_), hi = std::max(a.hi_, b.hi_);
    return {a.reembed(lo, hi), b.reembed(lo, hi)};
  }

  /// Minimal window: lo = valuation of L, hi = least h with t^h O^n in L.
  void canonicalize() {
    bool changed = true;
    while (changed) {
      changed = false;
      if (hi_ > lo_) {
        bool all = true;
        for (int j = 0; j < n_ && all; ++j) all = space_.contains(unit(j, hi_ - 1));
        if (all) {
          shrink(lo_, hi_ - 1);
          changed = true;
          continue;
        }
      }
      if (hi_ > lo_) {
        const int w = hi_ - lo_;
        bool zero = true;
        for (const auto& row : space_.rows())
          for (int j = 0; j < n_ && zero; ++j) zero = row[j * w].v == 0;
        if (zero) {
          shrink(lo_ + 1, hi_);
          changed = true;
        }
      }
    }
  }
  void shrink(int lo, int hi) {
    const int w = hi_ - lo_, w2 = hi - lo;
    KSpace s(k_, static_cast<std::size_t>(n_) * w2);
    for (const auto& row : space_.rows()) {
      KVec v(static_cast<std::size_t>(n_) * w2, FieldElem{0});
      for (int j = 0; j < n_; ++j)
        for (int e = lo; e < hi; ++e) v[j * w2 + (e - lo)] = row[j * w + (e - lo_)];
      s.insert(std::move(v));
    }
    lo_ = lo;
    hi_ = hi;
    space_ = std::move(s);
  }

  const Field* k_ = nullptr;
  int n_ = 0;
  int lo_ = 0, hi_ = 0;
  KSpace space_;
};

/// One-variable etale phi-module given by its phi-matrix over k((t)).
class OneVarModule {
public:
  OneVarModule(FieldPtr k, long q, bool is_Qp, LMatrix A, std::optional<LMatrix> exact_inverse = {})
      : k_(std::move(k)), q_(q), qpi_(is_Qp ? k_->one() : k_->zero()), A_(std::move(A)) {
    if (exact_inverse) {
      inv_ = std::move(exact_inverse);
      inv_prec_ = kExact;
    }
    if (A_.empty() || A_.size() != A_[0].size()) throw InvalidArgument("phi-matrix must be square");
    const Laurent det = determinant(*k_, A_);
    if (det.is_zero()) {
      if (det.exact()) throw NotEtale("phi-matrix is singular");
      throw PrecisionExhausted("determinant of phi-matrix vanishes at current precision");
    }
  }

  static OneVarModule from(const PhiGammaModule& D) {
    if (D.nvars() != 1) throw InvalidArgument("one-variable engine needs a single variable");
    LMatrix A(D.rank, LVector(D.rank));
    for (int i = 0; i < D.rank; ++i)
      for (int j = 0; j < D.rank; ++j) A[i][j] = to_laurent(D.phi[0][i][j]);
    return OneVarModule(D.ring->field, D.ring->q(), D.ring->is_Qp, std::move(A));
  }

  const Field& field() const { return *k_; }
  const FieldPtr& field_ptr() const { return k_; }
  long q() const { return q_; }
  FieldElem q_over_pi() const { return qpi_; }
  int rank() const { return static_cast<int>(A_.size()); }
  const LMatrix& A() const { return A_; }

  /// A^{-1} modulo t^want.
  const LMatrix& inverse(int want) const {
    if (!inv_ || inv_prec_ < want) {
      inv_ = inverse_matrix(*k_, A_, want);
      inv_prec_ = want;
    }
    return *inv_;
  }

  static int min_val(const LMatrix& m) {
    int v = kExact;
    for (const auto& row : m)
      for (const auto& x : row)
        if (!x.is_zero()) v = std::min(v, x.val());
    return v;
  }
  int val_A() const { return min_val(A_); }
  /// Exact minimal valuation of A^{-1} = adj(A) / det(A).
  int val_A_inverse() const {
    if (inv_ && inv_prec_ >= kExact) return min_val(*inv_);
    return min_val(adjugate(*k_, A_)) - determinant(*k_, A_).val();
  }

  LVector phi(const LVector& x) const {
    LVector y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = psilat::phi(x[i], q_);
    return matvec(*k_, A_, y);
  }

  /// psi(x) = psi_series(A^{-1} x), aiming at t-precision `target` in the result.
  LVector psi(const LVector& x, int target) const {
    int m = kExact;
    for (const auto& c : x)
      if (!c.is_zero()) m = std::min(m, c.val());
    if (m >= kExact) {
      int p = kExact;
      for (const auto& c : x) p = std::min(p, c.prec);
      return LVector(x.size(), Laurent::zero(p >= kExact ? kExact : static_cast<int>(floor_div(p, q_))));
    }
    const long cap = q_ * (static_cast<long>(target) + 1);
    const LMatrix& inv = inverse(static_cast<int>(cap - m));
    LVector y = matvec(*k_, inv, x, static_cast<int>(cap));
    for (auto& c : y) c = psilat::psi(*k_, c, q_, qpi_);
    return y;
  }

private:
  FieldPtr k_;
  long q_;
  FieldElem qpi_;
  LMatrix A_;
  mutable std::optional<LMatrix> inv_;
  mutable int inv_prec_ = 0;
};

inline std::vector<LVector> unit_vectors(int n, const Field& k, int shift = 0) {
  std::vector<LVector> out;
  for (int j = 0; j < n; ++j) {
    LVector v(n);
    v[j] = Laurent::monomial(shift, k.one());
    out.push_back(v);
  }
  return out;
}

inline LVector shifted(const LVector& x, int s) {
  LVector y = x;
  for (auto& c : y) c = c.shifted(s);
  return y;
}

/// k[[t]] phi(L): the span of phi of a basis (phi is semilinear).
inline Lattice phi_image(const OneVarModule& M, const Lattice& L) {
  std::vector<LVector> gens;
  for (const auto& b : L.basis()) gens.push_back(M.phi(b));
  return Lattice::from_generators(M.field(), M.rank(), gens);
}

/// psi(L), spanned by psi(t^i b) for 0 <= i < q and b in a basis of L.
inline Lattice psi_image(const OneVarModule& M, const Lattice& L, int retries = kPrecisionRetries) {
  int target = std::max(L.hi(), 1) + (L.hi() - L.lo()) + 8;
  const auto basis = L.basis();
  for (int attempt = 0;; ++attempt) {
    std::vector<LVector> gens;
    for (const auto& b : basis)
      for (long i = 0; i < M.q(); ++i) gens.push_back(M.psi(shifted(b, static_cast<int>(i)), target));
    try {
      return Lattice::from_generators(M.field(), M.rank(), gens);
    } catch (const PrecisionExhausted&) {
      if (attempt >= retries + 3) throw;
      target = 2 * target + 8;
    }
  }
}

struct StandardPair {
  int n = 1;
  Lattice E0, E1;
};

/// E_0 = t^n O^n, E_1 = t^{-n} O^n with n(q-1) + v >= 1 for v the least
/// valuation among the entries of A and A^{-1}.
inline StandardPair standard_pair(const OneVarModule& M) {
  const int v = std::min(M.val_A(), M.val_A_inverse());
  const long q1 = M.q() - 1;
  int n = 1;
  while (n * q1 + v < 1) ++n;
  StandardPair sp{n, Lattice::standard(M.field(), M.rank(), n), Lattice::standard(M.field(), M.rank(), -n)};
  if (!sp.E0.scale_t(1).contains(phi_image(M, sp.E0)))
    throw InvalidArgument("standard pair: phi(E0) not inside t E0");
  if (!phi_image(M, sp.E1).contains(sp.E1)) throw InvalidArgument("standard pair: E1 not inside k[[t]] phi(E1)");
  return sp;
}

struct DSharpResult {
  Lattice lattice;
  int n0 = 0;      ///< steps until psi^m(E_0) stabilized
  int m0 = 0;      ///< steps until psi^m(t^-1 F) stabilized
  int start = 1;   ///< E_0 = t^start O^n
  bool uniqueness_checked = false;
};

namespace detail {

/// Iterates L -> psi(L) until it repeats.
inline std::pair<Lattice, int> psi_fixed_point(const OneVarModule& M, Lattice L, const char* what) {
  for (int m = 0; m < kIterationCap; ++m) {
    Lattice next = psi_image(M, L);
    if (next == L) return {L, m};
    L = std::move(next);
  }
  throw NonStabilizing(std::string(what) + " did not stabilize within " + std::to_string(kIterationCap) + " steps");
}

inline DSharpResult dsharp_from(const OneVarModule& M, int start) {
  DSharpResult r;
  r.start = start;
  auto [F, n0] = psi_fixed_point(M, Lattice::standard(M.field(), M.rank(), start), "psi^m(E0)");
  auto [G, m0] = psi_fixed_point(M, F.scale_t(-1), "psi^m(t^-1 F)");
  r.lattice = G;
  r.n0 = n0;
  r.m0 = m0;
  return r;
}

}  // namespace detail

/// The largest psi-stable lattice D-sharp, with stabilization indices. The run
/// is repeated from t^{n+shift} O^n and both results must agree.
inline DSharpResult dsharp(const OneVarModule& M, int shift = 1) {
  const StandardPair sp = standard_pair(M);
  DSharpResult r = detail::dsharp_from(M, sp.n);
  if (psi_image(M, r.lattice) != r.lattice) throw NonStabilizing("D-sharp candidate is not psi-stable");
  const DSharpResult again = detail::dsharp_from(M, sp.n + std::max(shift, 1));
  if (again.lattice != r.lattice) throw NonStabilizing("D-sharp depends on the starting lattice");
  r.uniqueness_checked = true;
  return r;
}

struct DNaturalResult {
  Lattice lattice;
  int saturation_steps = 0;
};

/// psi-saturation of t D-sharp: L_{k+1} = L_k + psi(L_k).
inline DNaturalResult dnatural(const OneVarModule& M, const Lattice& dsharp_lattice) {
  Lattice L = dsharp_lattice.scale_t(1);
  for (int s = 0; s < kIterationCap; ++s) {
    Lattice next = L.sum(psi_image(M, L));
    if (next == L) {
      if (psi_image(M, L) != L) throw NonStabilizing("saturation is not psi-stable");
      if (!dsharp_lattice.contains(L)) throw NonStabilizing("saturation escaped D-sharp");
      return {L, s};
    }
    L = std::move(next);
  }
  throw NonStabilizing("psi-saturation did not stabilize");
}

inline DNaturalResult dnatural(const OneVarModule& M) { return dnatural(M, dsharp(M).lattice); }

/// Least n <= cap with psi^n(x) in E; nullopt when not reached.
inline std::optional<int> attractor_steps(const OneVarModule& M, const LVector& x, const Lattice& E, int cap) {
  for (int n = 0; n <= cap; ++n) {
    int target = E.hi();
    // Precision needed at step 0 to know psi^n(x) modulo t^{E.hi}.
    std::vector<int> need(n + 1);
    need[n] = target;
    for (int i = n - 1; i >= 0; --i) need[i] = static_cast<int>(M.q() * (need[i + 1] + 1));
    if (need[0] > 1 << 20) throw PrecisionExhausted("attractor iteration needs too much precision");
    LVector y = x;
    for (int i = 0; i < n; ++i) y = M.psi(y, need[i + 1]);
    if (E.contains(y)) return n;
  }
  return std::nullopt;
}

/// Components a_i with a = sum_{i<q} t^i phi(a_i).
inline std::vector<Laurent> decompose(const Laurent& a, long q) {
  std::vector<Laurent> out(static_cast<std::size_t>(q));
  if (!a.exact())
    for (auto& x : out) x = Laurent::zero(static_cast<int>(floor_div(a.prec + q - 1, q)));
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    const long e = a.start + static_cast<long>(i);
    const long m = floor_div(e, q);
    out[static_cast<std::size_t>(e - m * q)].set(static_cast<int>(m), a.c[i]);
  }
  for (auto& x : out) x.normalize();
  return out;
}

inline Laurent recompose(const Field& k, const std::vector<Laurent>& parts) {
  const long q = static_cast<long>(parts.size());
  Laurent r;
  for (long i = 0; i < q; ++i) r = add(k, r, phi(parts[static_cast<std::size_t>(i)], q).shifted(static_cast<int>(i)));
  return r;
}

/// Recovers the components from y_j = psi(t^j a), j < q, modulo t^prec:
/// y_0 = a_{q-1} + (q/pi) a_0 and y_j = a_{q-1-j} + (q/pi) t a_{q-j}.
inline std::vector<Laurent> components_from_psi(const Field& k, const std::vector<Laurent>& y, FieldElem q_over_pi, int prec) {
  const std::size_t q = y.size();
  std::vector<Laurent> a(q);
  if (q_over_pi.v == 0) {
    for (std::size_t j = 0; j < q; ++j) a[q - 1 - j] = y[j].truncated(prec);
    return a;
  }
  // Fixed point in a_{q-1}; each pass gains q-1 powers of t.
  Laurent top = Laurent::zero(prec);
  int lowest = 0;
  for (const auto& x : y)
    if (!x.is_zero()) lowest = std::min(lowest, x.val());
  const int passes = (prec - lowest) / std::max<int>(1, static_cast<int>(q) - 1) + 2;
  const Laurent t = Laurent::monomial(1, k.one());
  for (int pass = 0; pass <= passes; ++pass) {
    a[q - 1] = top;
    for (std::size_t j = 1; j < q; ++j)
      a[q - 1 - j] = sub(k, y[j], scale(k, mul(k, t, a[q - j], prec), q_over_pi)).truncated(prec);
    top = sub(k, y[0], scale(k, a[0], q_over_pi)).truncated(prec);
  }
  a[q - 1] = top;
  return a;
}

}  // namespace psilat
