#pragma once
// Lattices spanned by monomials in a rank-one module over k((t_1, ..., t_n))
// whose phi_d act diagonally: phi_d(g) = c_d t_d^{alpha_d} g.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/lattice.hpp"

namespace psilat {

using Point = std::vector<int>;

/// The k[[t_.]]-span of {t^a g : a in U} for an up-set U of Z^n, stored by its
/// minimal elements.
class MonoLattice {
public:
  MonoLattice() = default;
  MonoLattice(int n, std::vector<Point> gens) : n_(n), gens_(std::move(gens)) {
    for (const auto& g : gens_)
      if (static_cast<int>(g.size()) != n_) throw InvalidArgument("exponent of wrong length");
    minimize();
  }

  /// t_D^shift k[[t_.]] g
  static MonoLattice standard(int n, int shift) { return MonoLattice(n, {Point(n, shift)}); }

  int nvars() const { return n_; }
  const std::vector<Point>& gens() const { return gens_; }

  static bool leq(const Point& a, const Point& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] > b[i]) return false;
    return true;
  }
  bool contains(const Point& a) const {
    return std::any_of(gens_.begin(), gens_.end(), [&](const Point& g) { return leq(g, a); });
  }
  bool contains(const MonoLattice& o) const {
    return std::all_of(o.gens_.begin(), o.gens_.end(), [&](const Point& g) { return contains(g); });
  }
  friend bool operator==(const MonoLattice& a, const MonoLattice& b) { return a.n_ == b.n_ && a.gens_ == b.gens_; }
  friend bool operator!=(const MonoLattice& a, const MonoLattice& b) { return !(a == b); }

  MonoLattice sum(const MonoLattice& o) const {
    std::vector<Point> g = gens_;
    g.insert(g.end(), o.gens_.begin(), o.gens_.end());
    return MonoLattice(n_, std::move(g));
  }
  MonoLattice intersect(const MonoLattice& o) const {
    std::vector<Point> g;
    for (const auto& a : gens_)
      for (const auto& b : o.gens_) {
        Point m(n_);
        for (int i = 0; i < n_; ++i) m[i] = std::max(a[i], b[i]);
        g.push_back(std::move(m));
      }
    return MonoLattice(n_, std::move(g));
  }
  /// Multiplication by t^s.
  MonoLattice shifted(const Point& s) const {
    std::vector<Point> g = gens_;
    for (auto& a : g)
      for (int i = 0; i < n_; ++i) a[i] += s[i];
    return MonoLattice(n_, std::move(g));
  }
  MonoLattice scale_t(int s) const { return shifted(Point(n_, s)); }

  /// Ideal-style notation: "(t1^2, t1 t2) g".
  std::string to_string() const {
    std::ostringstream os;
    os << "(";
    for (std::size_t j = 0; j < gens_.size(); ++j) {
      if (j) os << ", ";
      bool any = false;
      for (int i = 0; i < n_; ++i) {
        if (gens_[j][i] == 0) continue;
        if (any) os << " ";
        os << "t" << i + 1;
        if (gens_[j][i] != 1) os << "^" << gens_[j][i];
        any = true;
      }
      if (!any) os << "1";
    }
    os << ") g";
    return os.str();
  }

private:
  void minimize() {
    std::sort(gens_.begin(), gens_.end());
    gens_.erase(std::unique(gens_.begin(), gens_.end()), gens_.end());
    std::vector<Point> keep;
    for (std::size_t i = 0; i < gens_.size(); ++i) {
      bool dominated = false;
      for (std::size_t j = 0; j < gens_.size() && !dominated; ++j)
        dominated = j != i && leq(gens_[j], gens_[i]);
      if (!dominated) keep.push_back(gens_[i]);
    }
    gens_ = std::move(keep);
  }

  int n_ = 0;
  std::vector<Point> gens_;
};

struct MonoDirection {
  FieldElem c{1};
  int alpha = 0;
};

class MonomialModule {
public:
  MonomialModule(FieldPtr k, long q, bool is_Qp, std::vector<MonoDirection> dirs)
      : k_(std::move(k)), q_(q), qpi_(is_Qp ? k_->one() : k_->zero()), dirs_(std::move(dirs)) {
    for (const auto& d : dirs_)
      if (d.c.v == 0) throw NotEtale("phi_d scalar must be a unit");
  }

  /// From one-variable rank-one phi-matrices A_d = c_d t^{alpha_d} u_d, u_d a
  /// principal unit. The basis change by prod_i phi^i(u_d) makes phi_d
  /// monomial and fixes every monomial lattice.
  static MonomialModule from_rank_one(FieldPtr k, long q, bool is_Qp, const std::vector<Laurent>& A) {
    std::vector<MonoDirection> dirs;
    for (const auto& a : A) {
      const int v = a.val();
      if (v >= a.prec) throw PrecisionExhausted("leading term of a rank-one phi-matrix is not certified");
      dirs.push_back({a.at(v), v});
    }
    return MonomialModule(std::move(k), q, is_Qp, std::move(dirs));
  }

  int nvars() const { return static_cast<int>(dirs_.size()); }
  long q() const { return q_; }
  const std::vector<MonoDirection>& directions() const { return dirs_; }

  /// Exponent of psi_d(t^a g) in direction d, or false when it vanishes.
  bool psi_exponent(int d, int a, int& out) const {
    const Laurent r = psi(*k_, Laurent::monomial(a - dirs_[d].alpha, k_->one()), q_, qpi_);
    if (r.is_zero()) return false;
    out = r.val();
    return true;
  }

  MonoLattice psi_image(const MonoLattice& L, int d) const {
    std::vector<Point> g;
    for (const auto& a : L.gens())
      for (long j = 0; j < q_; ++j) {
        int e = 0;
        if (!psi_exponent(d, a[d] + static_cast<int>(j), e)) continue;
        Point b = a;
        b[d] = e;
        g.push_back(std::move(b));
      }
    if (g.empty()) throw InvalidArgument("psi_d killed a lattice");
    return MonoLattice(nvars(), std::move(g));
  }
  /// psi_D = psi_1 ... psi_n, psi_n applied first.
  MonoLattice psi_D_image(const MonoLattice& L) const {
    MonoLattice r = L;
    for (int d = nvars() - 1; d >= 0; --d) r = psi_image(r, d);
    return r;
  }
  MonoLattice phi_image(const MonoLattice& L, int d) const {
    std::vector<Point> g = L.gens();
    for (auto& a : g) a[d] = static_cast<int>(q_ * a[d]) + dirs_[d].alpha;
    return MonoLattice(nvars(), std::move(g));
  }

  /// Least n with n(q-1) >= 1 + |alpha_d| for all d: then phi_D(t_D^n O) is
  /// inside t_D^{n+1} O and t_D^{-n} O inside k[[t_.]] phi_D(t_D^{-n} O).
  int standard_n() const {
    int n = 1;
    for (const auto& d : dirs_)
      while (n * (q_ - 1) < 1 + std::abs(d.alpha)) ++n;
    return n;
  }

  bool psi_stable(const MonoLattice& L) const {
    for (int d = 0; d < nvars(); ++d)
      if (psi_image(L, d) != L) return false;
    return true;
  }

  struct SharpResult {
    MonoLattice lattice;
    int n0 = 0, m0 = 0;
  };

  SharpResult dsharp(int start_shift = 0) const {
    auto fix = [&](MonoLattice L, const char* what, int& steps) {
      for (steps = 0; steps < kIterationCap; ++steps) {
        MonoLattice next = psi_D_image(L);
        if (next == L) return L;
        L = std::move(next);
      }
      throw NonStabilizing(std::string(what) + " did not stabilize");
    };
    SharpResult r;
    const MonoLattice F = fix(MonoLattice::standard(nvars(), standard_n() + start_shift), "psi_D^m(E0)", r.n0);
    r.lattice = fix(F.scale_t(-1), "psi_D^m(t_D^-1 F)", r.m0);
    return r;
  }

  /// Saturation of t_D D-sharp under every psi_d.
  MonoLattice dnatural(const MonoLattice& sharp) const {
    MonoLattice L = sharp.scale_t(1);
    for (int s = 0; s < kIterationCap; ++s) {
      MonoLattice next = L;
      for (int d = 0; d < nvars(); ++d) next = next.sum(psi_image(L, d));
      if (next == L) {
        if (!sharp.contains(L)) throw NonStabilizing("saturation escaped D-sharp");
        return L;
      }
      L = std::move(next);
    }
    throw NonStabilizing("psi-saturation did not stabilize");
  }

private:
  FieldPtr k_;
  long q_;
  FieldElem qpi_;
  std::vector<MonoDirection> dirs_;
};

}  // namespace psilat
