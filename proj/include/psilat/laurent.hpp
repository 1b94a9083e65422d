#pragma once

// Dense one-variable truncated Laurent series, the working representation of
// the one-variable lattice engine.

#include <algorithm>
#include <vector>

#include "psilat/series.hpp"

namespace psilat {

/// sum_i c[i] t^{start + i} modulo t^prec (prec == kExact: exact Laurent polynomial).
struct Laurent {
  int start = 0;
  std::vector<FieldElem> c;
  int prec = kExact;

  static Laurent zero(int prec = kExact) { return {0, {}, prec}; }
  static Laurent monomial(int e, FieldElem v) {
    if (v.v == 0) return zero();
    return {e, {v}, kExact};
  }

  bool is_zero() const {
    return std::all_of(c.begin(), c.end(), [](FieldElem x) { return x.v == 0; });
  }
  bool exact() const { return prec >= kExact; }
  /// Valuation of the stored part; prec when it vanishes.
  int val() const {
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c[i].v != 0) return start + static_cast<int>(i);
    return prec;
  }
  int end() const { return start + static_cast<int>(c.size()); }
  FieldElem at(int e) const {
    const int i = e - start;
    if (i < 0 || i >= static_cast<int>(c.size())) return {0};
    return c[i];
  }
  void normalize() {
    while (!c.empty() && c.back().v == 0) c.pop_back();
    std::size_t lead = 0;
    while (lead < c.size() && c[lead].v == 0) ++lead;
    if (lead == c.size()) {
      c.clear();
      start = 0;
      return;
    }
    c.erase(c.begin(), c.begin() + static_cast<long>(lead));
    start += static_cast<int>(lead);
  }
  Laurent& truncate(int p) {
    if (p < prec) prec = p;
    if (end() > prec) c.resize(std::max(0, prec - start));
    normalize();
    return *this;
  }
  Laurent truncated(int p) const {
    Laurent r = *this;
    r.truncate(p);
    return r;
  }
  void set(int e, FieldElem v) {
    if (e >= prec) return;
    if (c.empty()) {
      if (v.v == 0) return;
      start = e;
      c = {v};
      return;
    }
    if (e < start) {
      c.insert(c.begin(), static_cast<std::size_t>(start - e), FieldElem{0});
      start = e;
    }
    if (e >= end()) c.resize(static_cast<std::size_t>(e - start + 1), FieldElem{0});
    c[e - start] = v;
  }
  Laurent shifted(int by) const {
    Laurent r = *this;
    r.start += by;
    if (!exact()) r.prec += by;
    return r;
  }
};

inline bool operator==(const Laurent& a, const Laurent& b) {
  return a.prec == b.prec && a.start == b.start && a.c == b.c;
}

inline Laurent add(const Field& k, const Laurent& a, const Laurent& b) {
  Laurent r;
  r.prec = std::min(a.prec, b.prec);
  if (a.c.empty() && b.c.empty()) return r;
  const int lo = a.c.empty() ? b.start : (b.c.empty() ? a.start : std::min(a.start, b.start));
  const int hi = std::min(std::max(a.end(), b.end()), r.prec);
  if (hi <= lo) return r;
  r.start = lo;
  r.c.assign(static_cast<std::size_t>(hi - lo), FieldElem{0});
  for (int e = lo; e < hi; ++e) r.c[e - lo] = k.add(a.at(e), b.at(e));
  r.normalize();
  return r;
}

inline Laurent scale(const Field& k, const Laurent& a, FieldElem s) {
  Laurent r = a;
  for (auto& x : r.c) x = k.mul(x, s);
  r.normalize();
  return r;
}

inline Laurent sub(const Field& k, const Laurent& a, const Laurent& b) { return add(k, a, scale(k, b, k.neg(k.one()))); }

/// Product; precision min(pa + val(b), pb + val(a)); result further capped at `cap`.
inline Laurent mul(const Field& k, const Laurent& a, const Laurent& b, int cap = kExact) {
  Laurent r;
  const long va = a.is_zero() ? a.prec : a.val();
  const long vb = b.is_zero() ? b.prec : b.val();
  long p = kExact;
  if (!a.exact()) p = std::min(p, a.prec + vb);
  if (!b.exact()) p = std::min(p, b.prec + va);
  p = std::min<long>(p, cap);
  r.prec = static_cast<int>(std::clamp<long>(p, -kExact, kExact));
  if (a.c.empty() || b.c.empty()) return r;
  const int lo = a.start + b.start;
  const int hi = std::min<long>(static_cast<long>(a.end()) + b.end() - 1, r.prec);
  if (hi <= lo) return r;
  r.start = lo;
  r.c.assign(static_cast<std::size_t>(hi - lo), FieldElem{0});
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i].v == 0) continue;
    const int ei = a.start + static_cast<int>(i);
    for (std::size_t j = 0; j < b.c.size(); ++j) {
      const int e = ei + b.start + static_cast<int>(j);
      if (e >= hi) break;
      if (b.c[j].v != 0) r.c[e - lo] = k.add(r.c[e - lo], k.mul(a.c[i], b.c[j]));
    }
  }
  r.normalize();
  return r;
}

/// Inverse modulo t^want (absolute), limited by what the input certifies.
inline Laurent inverse(const Field& k, const Laurent& a, int want) {
  if (a.is_zero()) throw NotInvertible("zero series at current precision");
  const int v = a.val();
  if (a.exact() && std::count_if(a.c.begin(), a.c.end(), [](FieldElem x) { return x.v != 0; }) == 1)
    return Laurent::monomial(-v, k.inv(a.at(v)));
  const long cap = a.exact() ? kExact : static_cast<long>(a.prec) - 2L * v;
  const int target = static_cast<int>(std::min<long>(cap, want));
  if (target <= -v) throw PrecisionExhausted("inverse has no certified coefficient");
  const int n = target + v;  // relative length
  Laurent u = a.shifted(-v);
  const FieldElem ci = k.inv(u.at(0));
  std::vector<FieldElem> inv(static_cast<std::size_t>(n), FieldElem{0});
  inv[0] = ci;
  for (int i = 1; i < n; ++i) {
    FieldElem s{0};
    for (int j = 1; j <= i; ++j) {
      const FieldElem uj = u.at(j);
      if (uj.v != 0 && inv[i - j].v != 0) s = k.add(s, k.mul(uj, inv[i - j]));
    }
    inv[i] = k.neg(k.mul(s, ci));
  }
  Laurent r{-v, std::move(inv), target};
  r.normalize();
  return r;
}

/// t -> t^q
inline Laurent phi(const Laurent& a, long q) {
  Laurent r;
  r.prec = a.exact() ? kExact : static_cast<int>(q * a.prec);
  if (a.c.empty()) return r;
  r.start = static_cast<int>(q * a.start);
  r.c.assign((a.c.size() - 1) * static_cast<std::size_t>(q) + 1, FieldElem{0});
  for (std::size_t i = 0; i < a.c.size(); ++i) r.c[i * static_cast<std::size_t>(q)] = a.c[i];
  return r;
}

/// The psi operator on k((t)), monomial-wise.
inline Laurent psi(const Field& k, const Laurent& a, long q, FieldElem q_over_pi) {
  Laurent r;
  r.prec = a.exact() ? kExact : static_cast<int>(floor_div(a.prec, q));
  for (std::size_t i = 0; i < a.c.size(); ++i) {
    if (a.c[i].v == 0) continue;
    const long e = a.start + static_cast<long>(i);
    const long m = floor_div(e, q);
    const long rem = e - m * q;
    FieldElem val{0};
    if (rem == q - 1)
      val = a.c[i];
    else if (rem == 0)
      val = k.mul(q_over_pi, a.c[i]);
    if (val.v == 0 || m >= r.prec) continue;
    r.set(static_cast<int>(m), k.add(r.at(static_cast<int>(m)), val));
  }
  r.normalize();
  return r;
}

inline Laurent to_laurent(const Series& s) {
  if (s.nvars() != 1) throw InvalidArgument("expected a one-variable series");
  Laurent r;
  r.prec = s.prec(0);
  for (const auto& [e, c] : s.terms()) r.set(e[0], c);
  r.normalize();
  return r;
}

inline Series to_series(const SeriesRingPtr& ring, const Laurent& l) {
  Series s(ring);
  if (!l.exact()) s.truncate(0, l.prec);
  for (std::size_t i = 0; i < l.c.size(); ++i) s.set({l.start + static_cast<int>(i)}, l.c[i]);
  return s;
}

// ---------------------------------------------------------------------------
// Matrices over k((t)).

using LMatrix = std::vector<std::vector<Laurent>>;  // [row][col]
using LVector = std::vector<Laurent>;

inline LMatrix identity_matrix(int n, const Field& k) {
  LMatrix m(n, std::vector<Laurent>(n, Laurent::zero()));
  for (int i = 0; i < n; ++i) m[i][i] = Laurent::monomial(0, k.one());
  return m;
}

inline LMatrix matmul(const Field& k, const LMatrix& a, const LMatrix& b, int cap = kExact) {
  const std::size_t n = a.size(), m = b.empty() ? 0 : b[0].size(), inner = b.size();
  LMatrix r(n, std::vector<Laurent>(m, Laurent::zero()));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      Laurent acc = Laurent::zero(cap);
      for (std::size_t l = 0; l < inner; ++l) acc = add(k, acc, mul(k, a[i][l], b[l][j], cap));
      r[i][j] = acc;
    }
  return r;
}

inline LVector matvec(const Field& k, const LMatrix& a, const LVector& x, int cap = kExact) {
  LVector r(a.size(), Laurent::zero(cap));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j)
      if (!x[j].c.empty() || !x[j].exact()) r[i] = add(k, r[i], mul(k, a[i][j], x[j], cap));
  return r;
}

inline LMatrix sub_matrix(const Field& k, const LMatrix& a, const LMatrix& b) {
  LMatrix r = a;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) r[i][j] = sub(k, a[i][j], b[i][j]);
  return r;
}

inline LMatrix phi_matrix(const LMatrix& a, long q) {
  LMatrix r = a;
  for (auto& row : r)
    for (auto& x : row) x = phi(x, q);
  return r;
}

/// Determinant by cofactor expansion along the first row (ranks here are <= 6).
inline Laurent determinant(const Field& k, const LMatrix& a) {
  const std::size_t n = a.size();
  if (n == 0) return Laurent::monomial(0, k.one());
  if (n == 1) return a[0][0];
  Laurent acc = Laurent::zero();
  for (std::size_t j = 0; j < n; ++j) {
    if (a[0][j].is_zero() && a[0][j].exact()) continue;
    LMatrix minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Laurent> row;
      for (std::size_t l = 0; l < n; ++l)
        if (l != j) row.push_back(a[i][l]);
      minor.push_back(row);
    }
    Laurent term = mul(k, a[0][j], determinant(k, minor));
    acc = (j % 2 == 0) ? add(k, acc, term) : sub(k, acc, term);
  }
  return acc;
}

inline LMatrix adjugate(const Field& k, const LMatrix& a) {
  const std::size_t n = a.size();
  LMatrix adj(n, std::vector<Laurent>(n, Laurent::zero()));
  if (n == 1) {
    adj[0][0] = Laurent::monomial(0, k.one());
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      LMatrix minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Laurent> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != j) row.push_back(a[r][c]);
        minor.push_back(row);
      }
      Laurent d = determinant(k, minor);
      adj[j][i] = ((i + j) % 2 == 0) ? d : scale(k, d, k.neg(k.one()));
    }
  return adj;
}

/// Inverse matrix modulo t^want (absolute, entrywise) via adjugate / determinant.
inline LMatrix inverse_matrix(const Field& k, const LMatrix& a, int want) {
  const Laurent det = determinant(k, a);
  if (det.is_zero()) throw NotInvertible("determinant vanishes at current precision");
  const LMatrix adj = adjugate(k, a);
  int minadj = kExact;
  for (const auto& row : adj)
    for (const auto& x : row)
      if (!x.is_zero()) minadj = std::min(minadj, x.val());
  if (minadj >= kExact) minadj = 0;
  const Laurent dinv = inverse(k, det, want - minadj);
  LMatrix r = adj;
  for (auto& row : r)
    for (auto& x : row) x = mul(k, x, dinv, dinv.exact() ? kExact : want);
  return r;
}

}  // namespace psilat
