#pragma once

// Finitely presented torsion modules Delta = (k[[t_.]][phi_.] (x) M) / <R> in
// the monic-in-phi shape, and their truncated expansion ("tower").
//
// M has a monomial nilpotent t_d-action (t_d m is a basis vector or 0). The
// free module has k-basis t^i phi^n (x) m with 0 <= i_d < q^{n_d}, and
// t_d^{q^{n_d}} phi^n (x) m = phi^n (x) t_d m.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/field.hpp"
#include "psilat/local_ring.hpp"
#include "psilat/linalg.hpp"

namespace psilat {

inline constexpr int kMaxVars = 4;

/// coeff * t^texp phi_{phi_dir} (x) gen; phi_dir = -1 means no phi.
struct RelTerm {
  FieldElem coeff;
  std::vector<int> texp;
  int phi_dir = -1;
  int gen = 0;
};

struct Relation {
  std::string label;
  std::vector<RelTerm> terms;
};

struct Presentation {
  FieldPtr k;
  long q = 0;
  bool is_Qp = true;
  LocalRingParams local;
  std::vector<std::string> vars;
  std::vector<std::string> gens;
  /// t_action[d][g]: index of t_d g or -1 for zero.
  std::vector<std::vector<int>> t_action;
  /// weights[d][g]: gamma_d g = gamma_bar^w g.
  std::vector<std::vector<int>> weights;
  std::vector<Relation> relations;

  int nvars() const { return static_cast<int>(vars.size()); }
  int ngens() const { return static_cast<int>(gens.size()); }
  int gen_index(const std::string& name) const {
    for (int i = 0; i < ngens(); ++i)
      if (gens[i] == name) return i;
    throw ParseError("unknown generator '" + name + "'");
  }
  /// Least c with t_d^c M = 0.
  int nilpotency(int d) const {
    int best = 0;
    for (int g = 0; g < ngens(); ++g) {
      int c = 0, x = g;
      while (x >= 0) {
        x = t_action[d][x];
        ++c;
        if (c > ngens() + 1) throw NotAdmissible("t-torsion: t_" + vars[d] + " is not nilpotent on the generators");
      }
      best = std::max(best, c);
    }
    return best;
  }
  /// Structural checks of the supported shape.
  void validate() const {
    if (nvars() < 1 || nvars() > kMaxVars) throw InvalidArgument("presentation needs 1.." + std::to_string(kMaxVars) + " variables");
    if (static_cast<int>(t_action.size()) != nvars() || static_cast<int>(weights.size()) != nvars())
      throw InvalidArgument("t-action and weights must be given per variable");
    for (int d = 0; d < nvars(); ++d) {
      if (static_cast<int>(t_action[d].size()) != ngens() || static_cast<int>(weights[d].size()) != ngens())
        throw InvalidArgument("t-action and weights must cover every generator");
      nilpotency(d);
    }
    for (int d = 0; d < nvars(); ++d)
      for (int d2 = 0; d2 < nvars(); ++d2)
        for (int g = 0; g < ngens(); ++g) {
          const int a = t_action[d][g] < 0 ? -1 : t_action[d2][t_action[d][g]];
          const int b = t_action[d2][g] < 0 ? -1 : t_action[d][t_action[d2][g]];
          if (a != b) throw InvalidArgument("t-actions on the generators do not commute");
        }
    for (const auto& r : relations) {
      if (r.terms.empty()) throw InvalidArgument("empty relation " + r.label);
      for (const auto& term : r.terms) {
        if (static_cast<int>(term.texp.size()) != nvars()) throw InvalidArgument("relation term has wrong arity in " + r.label);
        if (term.gen < 0 || term.gen >= ngens()) throw InvalidArgument("relation term names no generator in " + r.label);
        if (term.phi_dir >= nvars()) throw InvalidArgument("bad phi direction in " + r.label);
        for (int e : term.texp)
          if (e < 0) throw NonTerminatingRewrite("negative t-exponent in relation " + r.label);
      }
    }
  }
};

using Sparse = std::map<int, FieldElem>;

/// The free tower up to phi-level `top` modulo all relation instances that live
/// there, with normal forms w.r.t. an order in which higher levels are larger.
class Tower {
public:
  struct Mono {
    std::array<int, kMaxVars> i{};
    std::array<int, kMaxVars> n{};
    int gen = 0;
    int level = 0;
  };

  Tower(const Presentation& P, int top) : P_(P), top_(top) {
    P.validate();
    if (top < 1) throw InvalidArgument("expansion level must be >= 1");
    const int D = P.nvars();
    // Blocks of phi-exponent vectors ordered by (max, lexicographic).
    std::vector<std::array<int, kMaxVars>> ns;
    std::array<int, kMaxVars> cur{};
    std::function<void(int)> rec = [&](int d) {
      if (d == D) {
        ns.push_back(cur);
        return;
      }
      for (int v = 0; v <= top; ++v) {
        cur[d] = v;
        rec(d + 1);
      }
    };
    rec(0);
    auto lvl = [&](const std::array<int, kMaxVars>& n) { return *std::max_element(n.begin(), n.begin() + D); };
    std::stable_sort(ns.begin(), ns.end(), [&](const auto& a, const auto& b) { return lvl(a) < lvl(b); });
    for (const auto& n : ns) {
      long size = P.ngens();
      for (int d = 0; d < D; ++d) size *= ipow(P.q, n[d]);
      block_start_[key(n)] = static_cast<int>(monos_.size());
      // i vectors in lexicographic order, then generator.
      std::array<int, kMaxVars> i{};
      for (long c = 0; c < size; ++c) {
        long rest = c;
        Mono m;
        m.n = n;
        m.gen = static_cast<int>(rest % P.ngens());
        rest /= P.ngens();
        for (int d = D - 1; d >= 0; --d) {
          const long b = ipow(P.q, n[d]);
          i[d] = static_cast<int>(rest % b);
          rest /= b;
        }
        m.i = i;
        m.level = lvl(n);
        monos_.push_back(m);
      }
      if (monos_.size() > 4000000) throw InvalidArgument("expansion too large; lower the level");
    }
    pivot_.assign(monos_.size(), -1);
    eliminate();
    for (int L = 0; L <= top_; ++L) {
      std::vector<int> b;
      for (int idx = 0; idx < static_cast<int>(monos_.size()); ++idx)
        if (monos_[idx].level <= L && pivot_[idx] < 0) b.push_back(idx);
      basis_.push_back(std::move(b));
    }
  }

  const Presentation& presentation() const { return P_; }
  const Field& field() const { return *P_.k; }
  int top() const { return top_; }
  /// Levels <= top - 2 are taken as faithful truncations.
  int valid_level() const { return top_ - 2; }
  const Mono& mono(int idx) const { return monos_[idx]; }
  int size() const { return static_cast<int>(monos_.size()); }
  /// Normal-form monomials of level <= L, in increasing order.
  const std::vector<int>& basis(int L) const { return basis_.at(L); }
  bool is_normal(int idx) const { return pivot_[idx] < 0; }

  /// Index of t^i phi^n (x) gen after carrying overflowing t-powers into M;
  /// -1 for zero, -2 beyond the top level.
  int index(std::array<int, kMaxVars> i, const std::array<int, kMaxVars>& n, int gen) const {
    const int D = P_.nvars();
    for (int d = 0; d < D; ++d) {
      const long b = ipow(P_.q, n[d]);
      long u = i[d] / b;
      i[d] = static_cast<int>(i[d] % b);
      while (u-- > 0) {
        gen = P_.t_action[d][gen];
        if (gen < 0) return -1;
      }
    }
    for (int d = 0; d < D; ++d)
      if (n[d] > top_) return -2;
    auto it = block_start_.find(key(n));
    if (it == block_start_.end()) return -2;
    long off = 0;
    for (int d = 0; d < D; ++d) off = off * ipow(P_.q, n[d]) + i[d];
    return it->second + static_cast<int>(off * P_.ngens() + gen);
  }

  Sparse nf(Sparse v) const {
    const Field& k = field();
    auto it = v.end();
    while (it != v.begin()) {
      --it;
      const int key = it->first;
      const int piv = pivot_[key];
      if (piv < 0) continue;
      const FieldElem c = it->second;
      for (const auto& [j, x] : rows_[piv]) {
        if (j == key) continue;
        const FieldElem nv = k.sub(v.count(j) ? v[j] : FieldElem{0}, k.mul(c, x));
        if (nv.v == 0)
          v.erase(j);
        else
          v[j] = nv;
      }
      v.erase(key);
      it = v.lower_bound(key);
    }
    return v;
  }

  Sparse t(int d, const Sparse& v) const {
    Sparse r;
    for (const auto& [idx, c] : v) {
      const Mono& m = monos_[idx];
      auto i = m.i;
      i[d] += 1;
      add_to(r, index(i, m.n, m.gen), c, "t");
    }
    return nf(r);
  }
  Sparse t_pow(int d, Sparse v, int e) const {
    for (int s = 0; s < e && !v.empty(); ++s) v = t(d, v);
    return v;
  }
  Sparse phi(int d, const Sparse& v) const {
    Sparse r;
    for (const auto& [idx, c] : v) {
      const Mono& m = monos_[idx];
      auto i = m.i;
      auto n = m.n;
      i[d] = static_cast<int>(i[d] * P_.q);
      n[d] += 1;
      add_to(r, index(i, n, m.gen), c, "phi");
    }
    return nf(r);
  }

  /// Free-module element of one relation term shifted by t^j phi^n.
  int term_index(const RelTerm& term, const std::array<int, kMaxVars>& j, const std::array<int, kMaxVars>& n) const {
    std::array<int, kMaxVars> i{}, nn = n;
    for (int d = 0; d < P_.nvars(); ++d) i[d] = j[d] + static_cast<int>(term.texp[d] * ipow(P_.q, n[d]));
    if (term.phi_dir >= 0) nn[term.phi_dir] += 1;
    return index(i, nn, term.gen);
  }

  /// Torus weight w.r.t. a Teichmuller element in direction d: i_d + w_d(gen).
  int weight(int d, int idx) const { return monos_[idx].i[d] + P_.weights[d][monos_[idx].gen]; }

  std::string mono_string(int idx) const {
    const Mono& m = monos_[idx];
    std::string s;
    for (int d = 0; d < P_.nvars(); ++d)
      if (m.i[d]) s += P_.vars[d] + "^" + std::to_string(m.i[d]) + " ";
    for (int d = 0; d < P_.nvars(); ++d)
      if (m.n[d]) s += "phi_" + P_.vars[d] + "^" + std::to_string(m.n[d]) + " ";
    return s + P_.gens[m.gen];
  }

  /// Coordinates of an element of level <= L in basis(L).
  KVec coords(const Sparse& v, int L) const {
    const auto& b = basis(L);
    KVec out(b.size(), FieldElem{0});
    for (const auto& [idx, c] : v) {
      auto it = std::lower_bound(b.begin(), b.end(), idx);
      if (it == b.end() || *it != idx) throw InvalidArgument("element above truncation level " + std::to_string(L));
      out[it - b.begin()] = c;
    }
    return out;
  }
  Sparse from_coords(const KVec& x, int L) const {
    Sparse v;
    const auto& b = basis(L);
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i].v != 0) v[b[i]] = x[i];
    return v;
  }
  static Sparse unit(int idx) { return Sparse{{idx, FieldElem{1}}}; }

private:
  static long key(const std::array<int, kMaxVars>& n) {
    long k = 0;
    for (int d = 0; d < kMaxVars; ++d) k = k * 4096 + n[d];
    return k;
  }
  void add_to(Sparse& r, int idx, FieldElem c, const char* op) const {
    if (idx == -1) return;
    if (idx == -2) throw InvalidArgument(std::string("operator ") + op + " leaves the expansion");
    const FieldElem nv = field().add(r.count(idx) ? r[idx] : FieldElem{0}, c);
    if (nv.v == 0)
      r.erase(idx);
    else
      r[idx] = nv;
  }

  void eliminate() {
    const int D = P_.nvars();
    std::vector<int> nil(D);
    for (int d = 0; d < D; ++d) nil[d] = P_.nilpotency(d);
    std::vector<std::array<int, kMaxVars>> ns;
    for (const auto& [kk, start] : block_start_) {
      (void)start;
      std::array<int, kMaxVars> n{};
      long rest = kk;
      for (int d = kMaxVars - 1; d >= 0; --d) {
        n[d] = static_cast<int>(rest % 4096);
        rest /= 4096;
      }
      ns.push_back(n);
    }
    std::sort(ns.begin(), ns.end());
    const Field& k = field();
    for (const auto& rel : P_.relations) {
      std::array<int, kMaxVars> bump{};
      for (const auto& term : rel.terms)
        if (term.phi_dir >= 0) bump[term.phi_dir] = 1;
      for (const auto& n : ns) {
        bool fits = true;
        for (int d = 0; d < D; ++d) fits = fits && n[d] + bump[d] <= top_;
        if (!fits) continue;
        // t^j with j_d < q^{n_d + bump_d} * nil_d covers every nonzero instance.
        std::vector<long> ext(D);
        long count = 1;
        for (int d = 0; d < D; ++d) {
          ext[d] = ipow(P_.q, n[d] + bump[d]) * nil[d];
          count *= ext[d];
        }
        for (long c = 0; c < count; ++c) {
          std::array<int, kMaxVars> j{};
          long rest = c;
          for (int d = D - 1; d >= 0; --d) {
            j[d] = static_cast<int>(rest % ext[d]);
            rest /= ext[d];
          }
          Sparse row;
          for (const auto& term : rel.terms) {
            const int idx = term_index(term, j, n);
            if (idx == -1) continue;
            if (idx == -2) throw InvalidArgument("relation instance leaves the expansion");
            const FieldElem nv = k.add(row.count(idx) ? row[idx] : FieldElem{0}, term.coeff);
            if (nv.v == 0)
              row.erase(idx);
            else
              row[idx] = nv;
          }
          insert_row(std::move(row));
        }
      }
    }
  }

  void insert_row(Sparse row) {
    row = nf(std::move(row));
    if (row.empty()) return;
    const Field& k = field();
    const int lead = row.rbegin()->first;
    const FieldElem inv = k.inv(row.rbegin()->second);
    std::vector<std::pair<int, FieldElem>> r;
    r.reserve(row.size());
    for (const auto& [j, x] : row) r.emplace_back(j, k.mul(x, inv));
    pivot_[lead] = static_cast<int>(rows_.size());
    rows_.push_back(std::move(r));
  }

  static long ipow(long b, int e) {
    long r = 1;
    while (e-- > 0) r *= b;
    return r;
  }

  Presentation P_;
  int top_;
  std::vector<Mono> monos_;
  std::map<long, int> block_start_;
  std::vector<int> pivot_;
  std::vector<std::vector<std::pair<int, FieldElem>>> rows_;
  std::vector<std::vector<int>> basis_;
};

}  // namespace psilat
