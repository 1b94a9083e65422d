#pragma once

// Truncated multivariable Laurent series over k with a per-variable precision
// ledger, and the operators phi_d, gamma_d, psi_d acting on them.

#include <algorithm>
#include <climits>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/field.hpp"
#include "psilat/lubin_tate.hpp"

namespace psilat {

/// Precision value of a coefficient ledger entry that is known exactly.
inline constexpr int kExact = INT_MAX / 4;

/// phi_d acts k-linearly: it fixes coefficients and substitutes t_d -> t_d^q.
inline constexpr bool kPhiFixesCoefficients = true;

struct SeriesRing {
  FieldPtr field;
  std::vector<std::string> vars;
  /// True iff F = Q_p (e = f = 1), which decides the value of q/pi in k.
  bool is_Qp = true;

  long q() const { return field->q(); }
  int nvars() const { return static_cast<int>(vars.size()); }
  int var_index(const std::string& name) const {
    for (int i = 0; i < nvars(); ++i)
      if (vars[i] == name) return i;
    throw InvalidArgument("unknown variable '" + name + "'");
  }
  /// q/pi as an element of k.
  FieldElem q_over_pi() const { return is_Qp ? field->one() : field->zero(); }
};

using SeriesRingPtr = std::shared_ptr<const SeriesRing>;

inline SeriesRingPtr make_series_ring(FieldPtr field, std::vector<std::string> vars, bool is_Qp) {
  if (vars.empty()) throw InvalidArgument("a series ring needs at least one variable");
  return std::make_shared<const SeriesRing>(SeriesRing{std::move(field), std::move(vars), is_Qp});
}

using Exponent = std::vector<int>;

inline long floor_div(long a, long b) {
  long d = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --d;
  return d;
}

/// Image of F_q (residue field of a LocalRing) inside k: F_q = F_p[x]/(g)
/// maps x to the smallest root of g in k.
class ResidueEmbedding {
public:
  ResidueEmbedding(const FieldPtr& residue, const FieldPtr& k) : residue_(residue), k_(k) {
    if (residue->characteristic() != k->characteristic() || k->degree() % residue->degree() != 0)
      throw InvalidArgument("residue field does not embed into k");
    const auto& g = residue->params().modulus;
    if (residue->degree() == 1) {
      root_ = k->zero();
      return;
    }
    for (std::uint32_t v = 0; v < k->order(); ++v) {
      FieldElem acc = k->zero();
      for (int i = static_cast<int>(g.size()) - 1; i >= 0; --i) acc = k->add(k->mul(acc, {v}), k->from_int(g[i]));
      if (acc.v == 0) {
        root_ = {v};
        if (k->params().modulus == g) root_ = k->generator();
        return;
      }
    }
    throw InvalidArgument("residue modulus has no root in k");
  }
  FieldElem operator()(FieldElem a) const {
    auto c = residue_->coords(a);
    FieldElem acc = k_->zero();
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = k_->add(k_->mul(acc, root_), k_->from_int(c[i]));
    return acc;
  }

private:
  FieldPtr residue_, k_;
  FieldElem root_;
};

class Series {
public:
  Series() = default;
  explicit Series(SeriesRingPtr ring) : ring_(std::move(ring)), prec_(ring_->nvars(), kExact) {}

  static Series zero(const SeriesRingPtr& ring) { return Series(ring); }
  static Series constant(const SeriesRingPtr& ring, FieldElem c) {
    Series s(ring);
    s.set(Exponent(ring->nvars(), 0), c);
    return s;
  }
  static Series monomial(const SeriesRingPtr& ring, const Exponent& e, FieldElem c) {
    Series s(ring);
    s.set(e, c);
    return s;
  }
  /// t_d^n
  static Series var_power(const SeriesRingPtr& ring, int d, int n) {
    Exponent e(ring->nvars(), 0);
    e[d] = n;
    return monomial(ring, e, ring->field->one());
  }

  const SeriesRingPtr& ring() const { return ring_; }
  const Field& field() const { return *ring_->field; }
  int nvars() const { return ring_->nvars(); }
  const std::map<Exponent, FieldElem>& terms() const { return terms_; }
  const std::vector<int>& prec() const { return prec_; }
  int prec(int d) const { return prec_[d]; }
  bool is_exact() const {
    return std::all_of(prec_.begin(), prec_.end(), [](int p) { return p >= kExact; });
  }

  /// Lower support bound per variable (the exponent's min over stored terms);
  /// for a zero series, the precision.
  int low(int d) const {
    if (terms_.empty()) return prec_[d];
    int m = INT_MAX;
    for (const auto& [e, c] : terms_) m = std::min(m, e[d]);
    return m;
  }
  Exponent low() const {
    Exponent l(nvars());
    for (int d = 0; d < nvars(); ++d) l[d] = low(d);
    return l;
  }

  FieldElem coeff(const Exponent& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? field().zero() : it->second;
  }
  bool is_zero() const { return terms_.empty(); }

  void set(const Exponent& e, FieldElem c) {
    if (static_cast<int>(e.size()) != nvars()) throw InvalidArgument("exponent arity mismatch");
    if (!certified(e)) return;
    if (c.v == 0)
      terms_.erase(e);
    else
      terms_[e] = c;
  }
  void add_to(const Exponent& e, FieldElem c) { set(e, field().add(coeff(e), c)); }

  bool certified(const Exponent& e) const {
    for (int d = 0; d < nvars(); ++d)
      if (e[d] >= prec_[d]) return false;
    return true;
  }

  /// Lower the ledger in direction d and drop terms that lose their certificate.
  Series& truncate(int d, int p) {
    if (p >= prec_[d]) return *this;
    prec_[d] = p;
    for (auto it = terms_.begin(); it != terms_.end();) {
      if (it->first[d] >= p)
        it = terms_.erase(it);
      else
        ++it;
    }
    return *this;
  }
  Series& truncate(const std::vector<int>& p) {
    for (int d = 0; d < nvars(); ++d) truncate(d, p[d]);
    return *this;
  }

  friend Series operator+(const Series& a, const Series& b) {
    check_same(a, b);
    Series r(a.ring_);
    for (int d = 0; d < a.nvars(); ++d) r.prec_[d] = std::min(a.prec_[d], b.prec_[d]);
    for (const auto& [e, c] : a.terms_) r.add_to(e, c);
    for (const auto& [e, c] : b.terms_) r.add_to(e, c);
    return r;
  }
  Series operator-() const {
    Series r = *this;
    for (auto& [e, c] : r.terms_) c = field().neg(c);
    return r;
  }
  friend Series operator-(const Series& a, const Series& b) { return a + (-b); }

  friend Series operator*(const Series& a, const Series& b) {
    check_same(a, b);
    Series r(a.ring_);
    for (int d = 0; d < a.nvars(); ++d) {
      const long pa = a.prec_[d] >= kExact ? kExact : static_cast<long>(a.prec_[d]) + (b.terms_.empty() ? b.prec_[d] : b.low(d));
      const long pb = b.prec_[d] >= kExact ? kExact : static_cast<long>(b.prec_[d]) + (a.terms_.empty() ? a.prec_[d] : a.low(d));
      r.prec_[d] = static_cast<int>(std::clamp<long>(std::min(pa, pb), -kExact, kExact));
    }
    const Field& k = a.field();
    Exponent e(a.nvars());
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (int d = 0; d < a.nvars(); ++d) e[d] = ea[d] + eb[d];
        if (r.certified(e)) r.add_to(e, k.mul(ca, cb));
      }
    return r;
  }
  Series scaled(FieldElem c) const {
    Series r(ring_);
    r.prec_ = prec_;
    for (const auto& [e, x] : terms_) r.set(e, field().mul(c, x));
    return r;
  }
  Series shifted(const Exponent& by) const {
    Series r(ring_);
    for (int d = 0; d < nvars(); ++d) r.prec_[d] = prec_[d] >= kExact ? kExact : prec_[d] + by[d];
    for (const auto& [e, c] : terms_) {
      Exponent f = e;
      for (int d = 0; d < nvars(); ++d) f[d] += by[d];
      r.set(f, c);
    }
    return r;
  }

  /// Equality of all coefficients certified in both operands.
  bool equal_at_prec(const Series& b) const {
    Series d = *this - b;
    return d.terms_.empty();
  }
  /// Exact structural equality (terms and ledger).
  friend bool operator==(const Series& a, const Series& b) {
    return a.prec_ == b.prec_ && a.terms_ == b.terms_;
  }

  /// Multiplicative inverse in k((t_.)). The element must be a monomial times a
  /// unit of k[[t_.]]; `want` bounds the absolute precision of the output for
  /// exact inputs (per variable).
  Series inverse(const std::vector<int>& want) const {
    if (terms_.empty()) throw NotInvertible("zero (at current precision) is not invertible");
    const Exponent v = low();
    const FieldElem c0 = coeff(v);
    if (c0.v == 0)
      throw NotInvertible("no monomial-times-unit decomposition: coefficient at the componentwise minimum exponent vanishes");
    const Field& k = field();
    // u = t^{-v} a = c0 (1 - w)
    std::vector<int> target(nvars());
    for (int d = 0; d < nvars(); ++d) {
      const long rel = prec_[d] >= kExact ? kExact : static_cast<long>(prec_[d]) - v[d];
      const long abs_cap = rel >= kExact ? kExact : rel - v[d];
      target[d] = static_cast<int>(std::min<long>(abs_cap, want[d]));
      if (target[d] <= -v[d]) throw PrecisionExhausted("inverse has no certified coefficient");
    }
    // relative target for u^{-1}
    std::vector<int> rel(nvars());
    for (int d = 0; d < nvars(); ++d) rel[d] = target[d] + v[d];
    Exponent neg_v(nvars());
    for (int d = 0; d < nvars(); ++d) neg_v[d] = -v[d];
    Series u = shifted(neg_v);
    u.truncate(rel);
    for (int d = 0; d < nvars(); ++d) u.prec_[d] = rel[d];
    const FieldElem ci = k.inv(c0);
    Series w = Series::constant(ring_, k.one()) - u.scaled(ci);
    w.truncate(rel);
    Series acc = Series::constant(ring_, k.one());
    acc.truncate(rel);
    for (int d = 0; d < nvars(); ++d) acc.prec_[d] = rel[d];
    Series power = acc;
    long bound = 0;
    for (int d = 0; d < nvars(); ++d) bound += std::max(rel[d], 0);
    for (long n = 1; n <= bound && !w.is_zero(); ++n) {
      power = power * w;
      power.truncate(rel);
      if (power.is_zero()) break;
      acc = acc + power;
    }
    for (int d = 0; d < nvars(); ++d) acc.prec_[d] = rel[d];
    acc = acc.scaled(ci).shifted(neg_v);
    return acc;
  }
  Series inverse(int want) const { return inverse(std::vector<int>(nvars(), want)); }

  /// phi_d: t_d -> t_d^q.
  Series phi(int d) const {
    const long q = ring_->q();
    Series r(ring_);
    r.prec_ = prec_;
    if (prec_[d] < kExact) r.prec_[d] = static_cast<int>(std::min<long>(q * prec_[d], kExact - 1));
    for (const auto& [e, c] : terms_) {
      Exponent f = e;
      f[d] = static_cast<int>(q * e[d]);
      r.set(f, c);
    }
    return r;
  }

  /// psi_d, monomial-wise: t_d^{mq+i} -> (q/pi) t_d^m (i = 0), 0 (1 <= i <= q-2),
  /// t_d^m (i = q-1).
  Series psi(int d) const {
    const long q = ring_->q();
    Series r(ring_);
    r.prec_ = prec_;
    if (prec_[d] < kExact) r.prec_[d] = static_cast<int>(floor_div(prec_[d], q));
    const FieldElem qpi = ring_->q_over_pi();
    for (const auto& [e, c] : terms_) {
      const long m = floor_div(e[d], q);
      const long i = e[d] - m * q;
      Exponent f = e;
      f[d] = static_cast<int>(m);
      if (i == q - 1) {
        r.add_to(f, c);
      } else if (i == 0) {
        r.add_to(f, field().mul(qpi, c));
      }
    }
    return r;
  }

  /// gamma_d: t_d -> g(t_d) with g = [gamma](t) mod pi embedded into k.
  Series gamma(int d, const std::vector<FieldElem>& g_coeffs_in_k, int g_tprec) const {
    if (g_tprec < 2 || g_coeffs_in_k.size() < 2 || g_coeffs_in_k[0].v != 0 || g_coeffs_in_k[1].v == 0)
      throw InvalidArgument("action series must be gamma-bar t + O(t^2)");
    if (terms_.empty() && prec_[d] >= kExact) return *this;
    const int lo = terms_.empty() ? prec_[d] : low(d);
    const int out_prec = prec_[d] >= kExact ? lo + g_tprec - 1 : std::min(prec_[d], lo + g_tprec - 1);
    Series g(ring_);
    for (int i = 1; i < g_tprec; ++i) g.set(unit_exp(d, i), g_coeffs_in_k[i]);
    std::vector<int> gp(nvars(), kExact);
    gp[d] = g_tprec;
    g.prec_ = gp;
    Series r(ring_);
    r.prec_ = prec_;
    r.prec_[d] = out_prec;
    if (terms_.empty()) return r;
    int hi = lo;
    for (const auto& [e, c] : terms_) hi = std::max(hi, e[d]);
    // Powers g^n for lo <= n <= hi, truncated at out_prec.
    std::map<int, Series> pw;
    auto power = [&](int n) -> const Series& {
      auto it = pw.find(n);
      if (it != pw.end()) return it->second;
      Series s(ring_);
      if (n == 0) {
        s = Series::constant(ring_, field().one());
      } else if (n > 0) {
        s = g;
        for (int i = 1; i < n; ++i) s = s * g;
      } else {
        Series gi = g.inverse(std::vector<int>(nvars(), kExact));  // full relative precision
        s = gi;
        for (int i = 1; i < -n; ++i) s = s * gi;
      }
      s.truncate(d, out_prec);
      return pw.emplace(n, std::move(s)).first->second;
    };
    for (const auto& [e, c] : terms_) {
      if (e[d] >= out_prec) continue;
      Exponent rest = e;
      rest[d] = 0;
      Series term = power(e[d]).shifted(rest).scaled(c);
      for (const auto& [f, x] : term.terms_)
        if (r.certified(f)) r.add_to(f, x);
    }
    return r;
  }

  /// Image under t_d -> t for every d, as a one-variable series over `target`.
  Series diagonal(const SeriesRingPtr& target) const {
    if (target->nvars() != 1) throw InvalidArgument("diagonal target must have one variable");
    Series r(target);
    long p = kExact;
    // A term t^e is certified in the image iff every preimage with that total
    // degree is certified; use the pessimistic bound min_d(prec_d + sum_{d'!=d} low_d').
    for (int d = 0; d < nvars(); ++d) {
      if (prec_[d] >= kExact) continue;
      long s = prec_[d];
      for (int d2 = 0; d2 < nvars(); ++d2)
        if (d2 != d) s += terms_.empty() ? prec_[d2] : low(d2);
      p = std::min(p, s);
    }
    r.prec_[0] = static_cast<int>(p);
    for (const auto& [e, c] : terms_) {
      int s = 0;
      for (int x : e) s += x;
      if (s < p) r.add_to({s}, c);
    }
    return r;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [e, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << field().to_string(c) << "*" << monomial_key(e);
    }
    return os.str();
  }
  std::string monomial_key(const Exponent& e) const {
    std::string s;
    for (int d = 0; d < nvars(); ++d) {
      if (e[d] == 0) continue;
      if (!s.empty()) s += ' ';
      s += ring_->vars[d] + "^" + std::to_string(e[d]);
    }
    return s.empty() ? "1" : s;
  }

private:
  Exponent unit_exp(int d, int n) const {
    Exponent e(nvars(), 0);
    e[d] = n;
    return e;
  }
  static void check_same(const Series& a, const Series& b) {
    if (a.ring_ != b.ring_ && (a.ring_->vars != b.ring_->vars || a.ring_->field->params().modulus != b.ring_->field->params().modulus))
      throw InvalidArgument("series from different rings");
  }

  SeriesRingPtr ring_;
  std::map<Exponent, FieldElem> terms_;
  std::vector<int> prec_;
};

/// [gamma](t) mod pi, embedded into k.
inline std::vector<FieldElem> embed_action_series(const ReducedSeries& g, const FieldPtr& residue, const FieldPtr& k) {
  ResidueEmbedding emb(residue, k);
  std::vector<FieldElem> out(g.coeffs.size());
  for (std::size_t i = 0; i < g.coeffs.size(); ++i) out[i] = emb(g.coeffs[i]);
  return out;
}

}  // namespace psilat
