#pragma once

// Lubin-Tate series for Phi(t) = pi t + t^q and the endomorphisms [gamma](t).

#include <algorithm>
#include <limits>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/local_ring.hpp"

namespace psilat {

/// Truncated power series over O_F/pi^M; coefficient n is known modulo
/// pi^{coeffs[n].known_prec}, and everything is modulo t^tprec.
struct LTSeries {
  std::vector<LocalRingElem> coeffs;
  int tprec = 0;

  /// Smallest per-coefficient certified precision.
  int certified_prec() const {
    int m = std::numeric_limits<int>::max();
    for (const auto& c : coeffs) m = std::min(m, c.known_prec);
    return m;
  }
};

/// Reduction modulo pi of an LTSeries; coefficients live in F_q.
struct ReducedSeries {
  std::vector<FieldElem> coeffs;  ///< index = exponent, size = tprec
  int tprec = 0;
};

namespace lt {

inline LTSeries zero_series(const LocalRing& R, int tprec) {
  return {std::vector<LocalRingElem>(tprec, R.zero()), tprec};
}

inline LTSeries mul(const LocalRing& R, const LTSeries& a, const LTSeries& b) {
  const int n = std::min(a.tprec, b.tprec);
  LTSeries r = zero_series(R, n);
  std::vector<bool> nonzero_a(n), nonzero_b(n);
  for (int i = 0; i < n; ++i) {
    nonzero_a[i] = !R.is_zero_mod(a.coeffs[i], R.M());
    nonzero_b[i] = !R.is_zero_mod(b.coeffs[i], R.M());
  }
  for (int i = 0; i < n; ++i) {
    int prec = std::numeric_limits<int>::max();
    LocalRingElem acc = R.zero();
    for (int j = 0; j <= i; ++j) {
      prec = std::min({prec, a.coeffs[j].known_prec, b.coeffs[i - j].known_prec});
      if (nonzero_a[j] && nonzero_b[i - j]) acc = R.add(acc, R.mul(a.coeffs[j], b.coeffs[i - j]));
    }
    acc.known_prec = std::min(prec, R.M());
    r.coeffs[i] = acc;
  }
  return r;
}

/// a(b(t)), b without constant term.
inline LTSeries compose(const LocalRing& R, const LTSeries& a, const LTSeries& b) {
  const int n = std::min(a.tprec, b.tprec);
  LTSeries r = zero_series(R, n);
  LTSeries power = zero_series(R, n);
  power.coeffs[0] = R.one();
  for (int k = 0; k < n; ++k) {
    if (k > 0) power = mul(R, power, b);
    for (int i = 0; i < n; ++i) {
      auto term = R.mul(a.coeffs[k], power.coeffs[i]);
      r.coeffs[i] = R.add(r.coeffs[i], term);
    }
  }
  return r;
}

}  // namespace lt

/// Phi(t) = pi t + t^q truncated at t^tprec.
inline LTSeries phi_series(const LocalRing& R, int tprec) {
  if (tprec < 2) throw InvalidArgument("phi_series needs tprec >= 2");
  LTSeries s = lt::zero_series(R, tprec);
  s.coeffs[1] = R.uniformizer();
  if (R.q() < tprec) s.coeffs[R.q()] = R.add(s.coeffs[R.q()], R.one());
  return s;
}

inline ReducedSeries reduce_series(const LocalRing& R, const LTSeries& s) {
  ReducedSeries r{std::vector<FieldElem>(s.tprec), s.tprec};
  for (int i = 0; i < s.tprec; ++i) {
    if (s.coeffs[i].known_prec < 1) throw PrecisionExhausted("coefficient " + std::to_string(i) + " has no certified digit");
    r.coeffs[i] = R.reduce(s.coeffs[i]);
  }
  return r;
}

/// Residual [gamma](Phi(t)) - Phi([gamma](t)) modulo t^tprec.
inline LTSeries functional_equation_residual(const LocalRing& R, const LTSeries& g) {
  const LTSeries phi = phi_series(R, g.tprec);
  return [&] {
    LTSeries lhs = lt::compose(R, g, phi);
    LTSeries rhs = lt::compose(R, phi, g);
    LTSeries d = lt::zero_series(R, g.tprec);
    for (int i = 0; i < g.tprec; ++i) d.coeffs[i] = R.sub(lhs.coeffs[i], rhs.coeffs[i]);
    return d;
  }();
}

/// True iff every coefficient of s vanishes at its own certified precision.
inline bool vanishes_at_certified_prec(const LocalRing& R, const LTSeries& s) {
  for (const auto& c : s.coeffs)
    if (!R.is_zero_mod(c, c.known_prec)) return false;
  return true;
}

/// [gamma]_Phi(t) modulo t^tprec. The Teichmuller factor of gamma is split off
/// exactly; the principal-unit factor is solved coefficient by coefficient from
/// [u](Phi(t)) = Phi([u](t)), each step dividing by pi(pi^{n-1} - 1).
inline LTSeries gamma_series(const LocalRing& R, const LocalRingElem& gamma, int tprec) {
  if (tprec < 2) throw InvalidArgument("gamma_series needs tprec >= 2");
  if (!R.is_unit(gamma)) throw NotAUnit("gamma must be a unit of O_F");
  const long q = R.q();
  const LocalRingElem omega = R.teichmuller(R.reduce(gamma));
  LocalRingElem u = R.mul(gamma, R.inv(omega));
  u.known_prec = gamma.known_prec;

  LTSeries g = lt::zero_series(R, tprec);
  g.coeffs[1] = u;
  if (!R.equal_exact(u, R.one()) || u.known_prec < R.M()) {
    const LTSeries phi = phi_series(R, tprec);
    // powers[k] = Phi(t)^k
    std::vector<LTSeries> powers(tprec);
    powers[1] = phi;
    for (int k = 2; k < tprec; ++k) powers[k] = lt::mul(R, powers[k - 1], phi);
    const LocalRingElem pi = R.uniformizer();
    for (int n = 2; n < tprec; ++n) {
      // g^q with the coefficients found so far; its t^n coefficient only
      // involves g_1..g_{n-q+1}.
      LTSeries gq = g;
      for (long i = 1; i < q; ++i) gq = lt::mul(R, gq, g);
      LocalRingElem rhs = gq.coeffs[n];
      LocalRingElem lhs = R.zero();
      int prec = rhs.known_prec;
      for (int k = 1; k < n; ++k) {
        lhs = R.add(lhs, R.mul(g.coeffs[k], powers[k].coeffs[n]));
        prec = std::min(prec, g.coeffs[k].known_prec);
      }
      LocalRingElem num = R.sub(rhs, lhs);
      num.known_prec = std::min(prec, rhs.known_prec);
      // g_n (pi^n - pi) = num
      LocalRingElem unit = R.sub(R.pow(pi, n - 1), R.one());
      unit.known_prec = R.M();
      LocalRingElem gn = R.mul(R.div_pi(num), R.inv(unit));
      gn.known_prec = std::max(0, num.known_prec - 1);
      g.coeffs[n] = gn;
    }
  }
  // [omega](t) = omega t, exactly.
  for (auto& c : g.coeffs) {
    const int kp = c.known_prec;
    c = R.mul(c, omega);
    c.known_prec = kp;
  }
  if (g.certified_prec() < 1)
    throw PrecisionExhausted("Lubin-Tate recursion consumed the pi-adic precision before t^" + std::to_string(tprec));
  if (!vanishes_at_certified_prec(R, [&] {
        LTSeries res = functional_equation_residual(R, g);
        const int cp = g.certified_prec();
        for (auto& c : res.coeffs) c.known_prec = std::min(c.known_prec, cp);
        return res;
      }()))
    throw PrecisionExhausted("functional equation check failed at certified precision");
  return g;
}

inline ReducedSeries gamma_series_mod_p(const LocalRing& R, const LocalRingElem& gamma, int tprec) {
  return reduce_series(R, gamma_series(R, gamma, tprec));
}

}  // namespace psilat
