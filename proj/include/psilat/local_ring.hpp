#pragma once

// Truncated rings of integers O_F / pi^M, realised as an Eisenstein extension
// of the truncated unramified ring W = (Z/p^N)[x]/(lifted residue modulus).

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/field.hpp"

namespace psilat {

struct LocalRingParams {
  int p = 2;
  int f = 1;  ///< residue degree
  int e = 1;  ///< ramification index
  /// Coefficients c_0..c_{e-1} of the monic Eisenstein polynomial, each an
  /// element of W given by f integer coordinates. Empty: X^e - p.
  std::vector<std::vector<long>> eisenstein;
  int M = 8;  ///< pi-adic precision
  /// Residue-field modulus (degree f). Empty: the default one.
  std::vector<int> residue_modulus;
};

struct LocalRingElem {
  /// coords[j * f + i]: coefficient of x^i pi^j, an integer mod p^N.
  std::vector<std::int64_t> coords;
  /// The value is certified modulo pi^known_prec.
  int known_prec = 0;
};

class LocalRing {
public:
  explicit LocalRing(LocalRingParams params) : params_(std::move(params)) {
    const int p = params_.p, f = params_.f, e = params_.e;
    if (!detail::is_prime(p)) throw InvalidArgument("p must be prime");
    if (f < 1 || e < 1 || params_.M < 1) throw InvalidArgument("f, e, M must be >= 1");
    residue_ = make_field(p, f, f, params_.residue_modulus);
    params_.residue_modulus = residue_->params().modulus;
    N_ = (params_.M + e - 1) / e + 1;
    long double bound = 1;
    for (int i = 0; i < N_; ++i) bound *= p;
    if (bound > static_cast<long double>(std::numeric_limits<std::int64_t>::max() / 4))
      throw InvalidArgument("precision too large for 64-bit coordinates");
    pN_ = 1;
    for (int i = 0; i < N_; ++i) pN_ *= p;
    if (params_.eisenstein.empty()) {
      params_.eisenstein.assign(e, std::vector<long>(f, 0));
      params_.eisenstein[0][0] = -p;
    }
    if (static_cast<int>(params_.eisenstein.size()) != e)
      throw InvalidArgument("Eisenstein polynomial must have e coefficients");
    eis_.clear();
    for (auto& c : params_.eisenstein) {
      if (static_cast<int>(c.size()) != f) throw InvalidArgument("Eisenstein coefficient needs f coordinates");
      std::vector<std::int64_t> w(f);
      for (int i = 0; i < f; ++i) {
        if (((c[i] % p) + p) % p != 0) throw InvalidArgument("Eisenstein coefficients must be divisible by p");
        w[i] = mod(c[i]);
      }
      eis_.push_back(w);
    }
    // c_0 = p * w0 with w0 a unit.
    std::vector<std::int64_t> w0(f);
    for (int i = 0; i < f; ++i) w0[i] = mod(static_cast<std::int64_t>(params_.eisenstein[0][i] / p));
    bool unit = false;
    for (int i = 0; i < f; ++i) unit = unit || (w0[i] % p) != 0;
    if (!unit) throw InvalidArgument("Eisenstein constant term must have valuation exactly e");
    // p/pi = -w0^{-1} (pi^{e-1} + sum_{j>=1} c_j pi^{j-1}).
    LocalRingElem w0e = zero();
    for (int i = 0; i < f; ++i) w0e.coords[i] = w0[i];
    w0e.known_prec = params_.M;
    LocalRingElem s = zero();
    s.known_prec = params_.M;
    s.coords[(e - 1) * f] = mod(s.coords[(e - 1) * f] + 1);
    for (int j = 1; j < e; ++j)
      for (int i = 0; i < f; ++i) s.coords[(j - 1) * f + i] = mod(s.coords[(j - 1) * f + i] + eis_[j][i]);
    p_over_pi_ = neg(mul(inv(w0e), s));
  }

  const LocalRingParams& params() const { return params_; }
  int M() const { return params_.M; }
  int p() const { return params_.p; }
  int e() const { return params_.e; }
  int f() const { return params_.f; }
  long q() const { return residue_->q(); }
  bool is_Qp() const { return params_.e == 1 && params_.f == 1; }
  const FieldPtr& residue_field() const { return residue_; }

  LocalRingElem zero() const { return {std::vector<std::int64_t>(params_.e * params_.f, 0), params_.M}; }
  LocalRingElem one() const { return from_int(1); }
  LocalRingElem from_int(long n) const {
    auto r = zero();
    r.coords[0] = mod(n);
    return r;
  }
  LocalRingElem uniformizer() const {
    auto r = zero();
    if (params_.e == 1) {
      r.coords[0] = mod(params_.p);
    } else {
      r.coords[params_.f] = 1;
    }
    return r;
  }
  /// Lift of a residue-field element with zero higher digits (not Teichmuller).
  LocalRingElem lift(FieldElem a) const {
    auto r = zero();
    auto c = residue_->coords(a);
    for (int i = 0; i < params_.f; ++i) r.coords[i] = c[i];
    return r;
  }

  LocalRingElem add(const LocalRingElem& a, const LocalRingElem& b) const {
    LocalRingElem r = a;
    for (std::size_t i = 0; i < r.coords.size(); ++i) r.coords[i] = mod(a.coords[i] + b.coords[i]);
    r.known_prec = std::min(a.known_prec, b.known_prec);
    return r;
  }
  LocalRingElem neg(const LocalRingElem& a) const {
    LocalRingElem r = a;
    for (auto& c : r.coords) c = mod(-c);
    return r;
  }
  LocalRingElem sub(const LocalRingElem& a, const LocalRingElem& b) const { return add(a, neg(b)); }

  LocalRingElem mul(const LocalRingElem& a, const LocalRingElem& b) const {
    const int e = params_.e, f = params_.f;
    std::vector<std::vector<std::int64_t>> prod(2 * e - 1, std::vector<std::int64_t>(f, 0));
    for (int i = 0; i < e; ++i)
      for (int j = 0; j < e; ++j) {
        auto w = wmul(slice(a, i), slice(b, j));
        for (int s = 0; s < f; ++s) prod[i + j][s] = mod(prod[i + j][s] + w[s]);
      }
    // pi^e = -sum c_j pi^j
    for (int k = 2 * e - 2; k >= e; --k) {
      for (int j = 0; j < e; ++j) {
        auto w = wmul(prod[k], eis_[j]);
        for (int s = 0; s < f; ++s) prod[k - e + j][s] = mod(prod[k - e + j][s] - w[s]);
      }
      std::fill(prod[k].begin(), prod[k].end(), 0);
    }
    LocalRingElem r = zero();
    for (int j = 0; j < e; ++j)
      for (int s = 0; s < f; ++s) r.coords[j * f + s] = prod[j][s];
    r.known_prec = std::min(a.known_prec, b.known_prec);
    return r;
  }

  LocalRingElem pow(LocalRingElem a, long n) const {
    LocalRingElem r = one();
    r.known_prec = a.known_prec;
    if (n < 0) return pow(inv(a), -n);
    while (n > 0) {
      if (n & 1) r = mul(r, a);
      a = mul(a, a);
      n >>= 1;
    }
    return r;
  }

  /// Residue class in F_q.
  FieldElem reduce(const LocalRingElem& a) const {
    std::vector<int> c(params_.f);
    for (int i = 0; i < params_.f; ++i) c[i] = static_cast<int>(a.coords[i] % params_.p);
    return residue_->from_coords(c);
  }

  bool is_unit(const LocalRingElem& a) const { return a.known_prec >= 1 && reduce(a).v != 0; }

  /// True iff a vanishes modulo pi^prec.
  bool is_zero_mod(const LocalRingElem& a, int prec) const {
    for (int j = 0; j < params_.e; ++j) {
      const int need = (prec - j + params_.e - 1) / params_.e;
      if (need <= 0) continue;
      std::int64_t pk = 1;
      for (int i = 0; i < need; ++i) pk *= params_.p;
      for (int s = 0; s < params_.f; ++s)
        if (a.coords[j * params_.f + s] % pk != 0) return false;
    }
    return true;
  }

  bool equal_at(const LocalRingElem& a, const LocalRingElem& b, int prec) const {
    return is_zero_mod(sub(a, b), prec);
  }

  /// pi-adic valuation; requires the value to be distinguishable from zero.
  int val(const LocalRingElem& a) const {
    int best = std::numeric_limits<int>::max();
    for (int j = 0; j < params_.e; ++j)
      for (int s = 0; s < params_.f; ++s) {
        std::int64_t c = a.coords[j * params_.f + s];
        if (c == 0) continue;
        int v = 0;
        while (c % params_.p == 0) {
          c /= params_.p;
          ++v;
        }
        best = std::min(best, params_.e * v + j);
      }
    if (best >= a.known_prec) throw PrecisionExhausted("valuation of an element indistinguishable from 0");
    return best;
  }

  LocalRingElem inv(const LocalRingElem& a) const {
    if (!is_unit(a)) throw NotAUnit("inverse of a non-unit in O_F/pi^M");
    LocalRingElem x = lift(residue_->inv(reduce(a)));
    const LocalRingElem two = from_int(2);
    for (int prec = 1; prec < params_.M; prec *= 2) x = mul(x, sub(two, mul(a, x)));
    x = mul(x, sub(two, mul(a, x)));
    x.known_prec = a.known_prec;
    return x;
  }

  /// Exact division by pi of an element divisible by pi; costs one digit.
  LocalRingElem div_pi(const LocalRingElem& a) const {
    const int e = params_.e, f = params_.f;
    for (int s = 0; s < f; ++s)
      if (a.coords[s] % params_.p != 0) throw NotAUnit("division by pi of a unit");
    LocalRingElem shifted = zero();
    for (int j = 1; j < e; ++j)
      for (int s = 0; s < f; ++s) shifted.coords[(j - 1) * f + s] = a.coords[j * f + s];
    LocalRingElem a0 = zero();
    for (int s = 0; s < f; ++s) a0.coords[s] = a.coords[s] / params_.p;
    LocalRingElem r = add(shifted, mul(a0, p_over_pi_));
    r.known_prec = std::max(0, a.known_prec - 1);
    return r;
  }

  /// Teichmuller lift of a residue: the unique (q-1)-st root of unity (or 0) above it.
  LocalRingElem teichmuller(FieldElem a) const {
    LocalRingElem x = lift(a);
    for (int i = 0; i <= params_.M; ++i) x = pow(x, q());
    x.known_prec = params_.M;
    return x;
  }

  /// A generator of F_q^x (smallest packed code) lifted to a Teichmuller unit.
  LocalRingElem teichmuller_generator() const { return teichmuller(primitive_residue()); }

  FieldElem primitive_residue() const {
    const long n = q() - 1;
    for (std::uint32_t v = 1; v < residue_->order(); ++v) {
      bool ok = true;
      for (long d = 1; d < n && ok; ++d)
        if (n % d == 0 && residue_->pow({v}, d) == residue_->one()) ok = false;
      if (ok) return {v};
    }
    return residue_->one();
  }

  bool equal_exact(const LocalRingElem& a, const LocalRingElem& b) const {
    return is_zero_mod(sub(a, b), params_.M);
  }

private:
  std::int64_t mod(std::int64_t x) const {
    x %= pN_;
    return x < 0 ? x + pN_ : x;
  }
  std::int64_t mulmod(std::int64_t a, std::int64_t b) const {
    return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % pN_);
  }
  std::vector<std::int64_t> slice(const LocalRingElem& a, int j) const {
    return {a.coords.begin() + j * params_.f, a.coords.begin() + (j + 1) * params_.f};
  }
  // Product in W: polynomial product reduced by the lifted residue modulus.
  std::vector<std::int64_t> wmul(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) const {
    const int f = params_.f;
    std::vector<std::int64_t> prod(2 * f - 1, 0);
    for (int i = 0; i < f; ++i) {
      if (a[i] == 0) continue;
      for (int j = 0; j < f; ++j) prod[i + j] = mod(prod[i + j] + mulmod(a[i], b[j]));
    }
    const auto& md = params_.residue_modulus;
    for (int k = 2 * f - 2; k >= f; --k) {
      const std::int64_t c = prod[k];
      if (c == 0) continue;
      for (int j = 0; j < f; ++j) prod[k - f + j] = mod(prod[k - f + j] - mulmod(c, md[j]));
      prod[k] = 0;
    }
    prod.resize(f);
    return prod;
  }

  LocalRingParams params_;
  FieldPtr residue_;
  int N_ = 1;
  std::int64_t pN_ = 1;
  std::vector<std::vector<std::int64_t>> eis_;
  LocalRingElem p_over_pi_;
};

}  // namespace psilat
