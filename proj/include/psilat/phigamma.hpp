#pragma once

// Etale (phi, Gamma)-modules over k((t_.)) given by a basis, per-direction
// phi-matrices and optional sampled Gamma-matrices.

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psilat/errors.hpp"
#include "psilat/lubin_tate.hpp"
#include "psilat/series.hpp"

namespace psilat {

using SMatrix = std::vector<std::vector<Series>>;  // [row][col]
using ModuleElem = std::vector<Series>;

/// Default t-precision of action series used when applying gamma to exact data.
inline constexpr int kDefaultActionPrec = 24;

inline SMatrix smatmul(const SMatrix& a, const SMatrix& b) {
  const std::size_t n = a.size(), m = b[0].size(), inner = b.size();
  const auto& ring = a[0][0].ring();
  SMatrix r(n, std::vector<Series>(m, Series(ring)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      for (std::size_t l = 0; l < inner; ++l) r[i][j] = r[i][j] + a[i][l] * b[l][j];
  return r;
}

inline ModuleElem smatvec(const SMatrix& a, const ModuleElem& x) {
  ModuleElem r(a.size(), Series(x[0].ring()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) r[i] = r[i] + a[i][j] * x[j];
  return r;
}

inline Series sdet(const SMatrix& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  Series acc(a[0][0].ring());
  for (std::size_t j = 0; j < n; ++j) {
    if (a[0][j].is_zero() && a[0][j].is_exact()) continue;
    SMatrix minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Series> row;
      for (std::size_t l = 0; l < n; ++l)
        if (l != j) row.push_back(a[i][l]);
      minor.push_back(row);
    }
    Series term = a[0][j] * sdet(minor);
    acc = (j % 2 == 0) ? acc + term : acc - term;
  }
  return acc;
}

inline SMatrix sadjugate(const SMatrix& a) {
  const std::size_t n = a.size();
  const auto& ring = a[0][0].ring();
  SMatrix adj(n, std::vector<Series>(n, Series(ring)));
  if (n == 1) {
    adj[0][0] = Series::constant(ring, ring->field->one());
    return adj;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      SMatrix minor;
      for (std::size_t r = 0; r < n; ++r) {
        if (r == i) continue;
        std::vector<Series> row;
        for (std::size_t c = 0; c < n; ++c)
          if (c != j) row.push_back(a[r][c]);
        minor.push_back(row);
      }
      Series d = sdet(minor);
      adj[j][i] = ((i + j) % 2 == 0) ? d : -d;
    }
  return adj;
}

/// Inverse through the monomial-times-unit split of the determinant.
inline SMatrix sinverse(const SMatrix& a, const std::vector<int>& want) {
  const Series det = sdet(a);
  const Series dinv = det.inverse(want);
  SMatrix adj = sadjugate(a);
  for (auto& row : adj)
    for (auto& x : row) x = x * dinv;
  return adj;
}

inline SMatrix phi_entries(const SMatrix& a, int d) {
  SMatrix r = a;
  for (auto& row : r)
    for (auto& x : row) x = x.phi(d);
  return r;
}

struct PhiGammaModule {
  SeriesRingPtr ring;
  /// Residue degree and ramification of F; the gamma samples live in O_F.
  LocalRingParams local;
  int rank = 0;
  std::vector<SMatrix> phi;  ///< phi[d]: columns are the coordinates of phi_d(e_j)
  /// gamma[{d, label}]: the matrix of gamma_d for the sampled element `label`.
  std::map<std::pair<int, std::string>, SMatrix> gamma;
  std::vector<std::string> labels;

  int nvars() const { return ring->nvars(); }
  const Field& field() const { return *ring->field; }
};

/// Sampled group element from its label: "teich", "1+pi", "(1+pi)^2", "(1+pi)^n",
/// or an integer unit.
inline LocalRingElem gamma_from_label(const LocalRing& R, const std::string& label) {
  if (label == "teich") return R.teichmuller_generator();
  const LocalRingElem one_plus_pi = R.add(R.one(), R.uniformizer());
  if (label == "1+pi") return one_plus_pi;
  if (label.rfind("(1+pi)^", 0) == 0) return R.pow(one_plus_pi, std::stol(label.substr(7)));
  try {
    std::size_t used = 0;
    const long n = std::stol(label, &used);
    if (used == label.size()) {
      auto g = R.from_int(n);
      if (!R.is_unit(g)) throw NotAUnit("gamma label '" + label + "' is not a unit");
      return g;
    }
  } catch (const std::logic_error&) {
  }
  throw ParseError("unknown gamma label '" + label + "'");
}

inline LocalRing make_local_ring(const LocalRingParams& base, int M) {
  LocalRingParams p = base;
  p.M = M;
  return LocalRing(p);
}

/// [gamma](t) mod pi with coefficients embedded into k, modulo t^tprec.
inline std::vector<FieldElem> action_series(const PhiGammaModule& D, const std::string& label, int tprec) {
  LocalRing R = make_local_ring(D.local, tprec + 2);
  auto g = gamma_series_mod_p(R, gamma_from_label(R, label), tprec);
  return embed_action_series(g, R.residue_field(), D.ring->field);
}

inline SMatrix gamma_entries(const SMatrix& a, int d, const std::vector<FieldElem>& g, int tprec) {
  SMatrix r = a;
  for (auto& row : r)
    for (auto& x : row) x = x.gamma(d, g, tprec);
  return r;
}

struct EtaleReport {
  bool etale = true;
  std::vector<Exponent> det_valuation;  ///< per direction: monomial part of det(A_d)
  std::string to_string() const {
    std::ostringstream os;
    os << "etale";
    for (std::size_t d = 0; d < det_valuation.size(); ++d) {
      os << " v" << d << "=(";
      for (std::size_t i = 0; i < det_valuation[d].size(); ++i) os << (i ? "," : "") << det_valuation[d][i];
      os << ")";
    }
    return os.str();
  }
};

inline EtaleReport check_etale(const PhiGammaModule& D) {
  EtaleReport rep;
  for (int d = 0; d < D.nvars(); ++d) {
    const Series det = sdet(D.phi[d]);
    if (det.is_zero()) {
      if (det.is_exact()) throw NotEtale("det of phi-matrix vanishes in direction " + D.ring->vars[d]);
      throw PrecisionExhausted("det of phi-matrix in direction " + D.ring->vars[d] + " is zero at current precision");
    }
    const Exponent v = det.low();
    if (det.coeff(v).v == 0)
      throw NotEtale("det of phi-matrix in direction " + D.ring->vars[d] + " is not a monomial times a unit");
    rep.det_valuation.push_back(v);
  }
  return rep;
}

struct CommutationReport {
  std::vector<std::string> checked;  ///< one line per identity verified
};

namespace detail {

inline void expect_equal(const SMatrix& lhs, const SMatrix& rhs, const std::string& what, CommutationReport& rep) {
  for (std::size_t i = 0; i < lhs.size(); ++i)
    for (std::size_t j = 0; j < lhs[i].size(); ++j) {
      Series diff = lhs[i][j] - rhs[i][j];
      if (!diff.is_zero()) {
        const auto& [e, c] = *diff.terms().begin();
        throw CommutationFailure(what + ": entry (" + std::to_string(i) + "," + std::to_string(j) +
                                 ") differs at " + diff.monomial_key(e) + " by " + diff.field().to_string(c));
      }
    }
  rep.checked.push_back(what);
}

}  // namespace detail

/// Residuals of the semilinear commutation identities at certified precision.
inline CommutationReport check_commutations(const PhiGammaModule& D, int action_prec = kDefaultActionPrec) {
  CommutationReport rep;
  const int nv = D.nvars();
  for (int d = 0; d < nv; ++d)
    for (int d2 = d + 1; d2 < nv; ++d2) {
      auto lhs = smatmul(D.phi[d], phi_entries(D.phi[d2], d));
      auto rhs = smatmul(D.phi[d2], phi_entries(D.phi[d], d2));
      detail::expect_equal(lhs, rhs, "phi_" + D.ring->vars[d] + " phi_" + D.ring->vars[d2] + " = phi_" + D.ring->vars[d2] + " phi_" + D.ring->vars[d], rep);
    }
  std::map<std::string, std::vector<FieldElem>> series;
  std::vector<std::string> glabels;
  for (const auto& [key, G] : D.gamma)
    if (!series.count(key.second)) {
      series[key.second] = action_series(D, key.second, action_prec);
      glabels.push_back(key.second);
    }
  for (const auto& [key, G] : D.gamma) {
    const auto& [d, lab] = key;
    const auto& g = series.at(lab);
    for (int d2 = 0; d2 < nv; ++d2) {
      auto lhs = smatmul(G, gamma_entries(D.phi[d2], d, g, action_prec));
      auto rhs = smatmul(D.phi[d2], phi_entries(G, d2));
      detail::expect_equal(lhs, rhs, "gamma_" + D.ring->vars[d] + "[" + lab + "] phi_" + D.ring->vars[d2] + " = phi_" + D.ring->vars[d2] + " gamma", rep);
    }
    for (const auto& [key2, G2] : D.gamma) {
      if (key2.first == d) continue;
      if (key2.first < d) continue;
      auto lhs = smatmul(G, gamma_entries(G2, d, g, action_prec));
      auto rhs = smatmul(G2, gamma_entries(G, key2.first, series.at(key2.second), action_prec));
      detail::expect_equal(lhs, rhs, "gamma_" + D.ring->vars[d] + "[" + lab + "] gamma_" + D.ring->vars[key2.first] + "[" + key2.second + "] commute", rep);
    }
  }
  // Cocycle relation on sampled products.
  if (!glabels.empty()) {
    LocalRing R = make_local_ring(D.local, action_prec + 2);
    for (int d = 0; d < nv; ++d)
      for (const auto& a : glabels)
        for (const auto& b : glabels) {
          if (!D.gamma.count({d, a}) || !D.gamma.count({d, b})) continue;
          const auto ab = R.mul(gamma_from_label(R, a), gamma_from_label(R, b));
          for (const auto& c : glabels) {
            if (!D.gamma.count({d, c}) || !R.equal_exact(ab, gamma_from_label(R, c))) continue;
            auto lhs = D.gamma.at({d, c});
            auto rhs = smatmul(D.gamma.at({d, a}), gamma_entries(D.gamma.at({d, b}), d, series.at(a), action_prec));
            detail::expect_equal(lhs, rhs, "cocycle G[" + c + "] = G[" + a + "] gamma(G[" + b + "]) in " + D.ring->vars[d], rep);
          }
        }
  }
  return rep;
}

/// Precision requested from inversions of exact determinants.
inline std::vector<int> inversion_target(const ModuleElem& x, int margin) {
  const int nv = x[0].nvars();
  std::vector<int> want(nv, margin);
  for (int d = 0; d < nv; ++d) {
    int hi = 0;
    for (const auto& s : x) {
      if (s.prec(d) < kExact) hi = std::max(hi, s.prec(d));
      for (const auto& [e, c] : s.terms()) hi = std::max(hi, e[d] + 1);
    }
    want[d] = std::max(margin, hi + margin);
  }
  return want;
}

/// phi_d on D: x -> A_d phi_d(x).
inline ModuleElem phi_module(const PhiGammaModule& D, const ModuleElem& x, int d) {
  ModuleElem y = x;
  for (auto& s : y) s = s.phi(d);
  return smatvec(D.phi[d], y);
}

/// psi_d on D: coordinates psi_d((A_d^{-1} x)_j). The inverse is computed to
/// `want` (per-variable absolute precision, capped by what can be certified).
inline ModuleElem psi_module(const PhiGammaModule& D, const ModuleElem& x, int d, std::optional<std::vector<int>> want = {}) {
  std::vector<int> w = want ? *want : inversion_target(x, 2 * static_cast<int>(D.ring->q()) + 8);
  for (int dd = 0; dd < D.nvars(); ++dd)
    if (dd == d) w[dd] = static_cast<int>(w[dd] * D.ring->q());
  const SMatrix inv = sinverse(D.phi[d], w);
  ModuleElem y = smatvec(inv, x);
  for (auto& s : y) s = s.psi(d);
  return y;
}

/// psi_D = psi_{d_1} ... psi_{d_m} in variable order (psi_{d_m} applied first).
inline ModuleElem psi_D(const PhiGammaModule& D, const ModuleElem& x) {
  ModuleElem y = x;
  for (int d = D.nvars() - 1; d >= 0; --d) y = psi_module(D, y, d);
  return y;
}

inline ModuleElem phi_D(const PhiGammaModule& D, const ModuleElem& x) {
  ModuleElem y = x;
  for (int d = D.nvars() - 1; d >= 0; --d) y = phi_module(D, y, d);
  return y;
}

/// Matrix of phi_D = phi_{d_1} ... phi_{d_m}: A_{d_1} phi_{d_1}(A_{d_2} phi_{d_2}(...)).
inline SMatrix phi_D_matrix(const PhiGammaModule& D, bool reverse_order = false) {
  const int nv = D.nvars();
  std::vector<int> order(nv);
  for (int i = 0; i < nv; ++i) order[i] = reverse_order ? nv - 1 - i : i;
  SMatrix m = D.phi[order[nv - 1]];
  for (int i = nv - 2; i >= 0; --i) m = smatmul(D.phi[order[i]], phi_entries(m, order[i]));
  return m;
}

/// k((t)) (x)_{k((t_.))} D with t_d acting as t, phi induced by phi_D.
inline PhiGammaModule diagonal_restriction(const PhiGammaModule& D, const std::string& var = "t") {
  if (D.nvars() == 1) return D;
  auto ring1 = make_series_ring(D.ring->field, {var}, D.ring->is_Qp);
  PhiGammaModule R;
  R.ring = ring1;
  R.local = D.local;
  R.rank = D.rank;
  const SMatrix m = phi_D_matrix(D);
  SMatrix r(D.rank, std::vector<Series>(D.rank, Series(ring1)));
  for (int i = 0; i < D.rank; ++i)
    for (int j = 0; j < D.rank; ++j) r[i][j] = m[i][j].diagonal(ring1);
  R.phi = {r};
  return R;
}

}  // namespace psilat
