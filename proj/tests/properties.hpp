#pragma once
// Randomized checks of the lattice results on etale phi-modules over k((t)).
// Shared by test_properties and the acceptance binary.

#include <cstdint>
#include <cstdlib>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"

namespace props {

using namespace psilat;

inline std::uint64_t seed_from_env(std::uint64_t fallback = 20261014) {
  const char* s = std::getenv("PSI_LATTICE_SEED");
  if (!s || !*s) return fallback;
  return std::strtoull(s, nullptr, 10);
}

struct Case {
  long q = 2;
  bool is_Qp = true;
  FieldPtr k;
  LMatrix A;
  std::string describe() const {
    std::string s = "q=" + std::to_string(q) + (is_Qp ? " Qp" : " qpi=0") + " A=[";
    for (const auto& row : A) {
      s += "[";
      for (const auto& x : row) s += Lattice::laurent_to_string(*k, x) + ";";
      s += "]";
    }
    return s + "]";
  }
};

/// Random etale module of rank <= 3 with entries in t^-3 k[t] of degree <= 3.
inline Case random_case(std::mt19937_64& rng) {
  Case c;
  c.q = (rng() & 1) ? 3 : 2;
  c.is_Qp = rng() % 4 != 0;
  c.k = make_field(static_cast<int>(c.q));
  const int r = 1 + static_cast<int>(rng() % 3);
  while (true) {
    c.A.assign(r, LVector(r));
    for (auto& row : c.A)
      for (auto& x : row) x = oracle::random_laurent(*c.k, rng, -3, 3, r == 1 ? 0.6 : 0.35);
    if (!determinant(*c.k, c.A).is_zero()) return c;
  }
}

inline LVector random_vector(const Field& k, std::mt19937_64& rng, int rank, int lo, int hi) {
  LVector v(rank);
  for (auto& x : v) x = oracle::random_laurent(k, rng, lo, hi, 0.5);
  return v;
}

/// t^a O^n plus the span of a few random vectors.
inline Lattice random_lattice(const Field& k, std::mt19937_64& rng, int rank, int a, int lo, int hi) {
  std::vector<LVector> g = Lattice::standard(k, rank, a).basis();
  const int extra = 1 + static_cast<int>(rng() % 2);
  for (int i = 0; i < extra; ++i) g.push_back(random_vector(k, rng, rank, lo, hi));
  return Lattice::from_generators(k, rank, g);
}

struct Outcome {
  int cases = 0;
  std::map<std::string, int> checked;  ///< clause -> number of instances verified
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

namespace detail {

inline LVector add(const Field& k, LVector a, const LVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = psilat::add(k, a[i], b[i]);
  return a;
}

inline LVector scale(const Field& k, const Laurent& c, LVector a) {
  for (auto& x : a) x = mul(k, c, x);
  return a;
}

/// An element of L: random k[t]-combination of the basis.
inline LVector element_of(const Field& k, std::mt19937_64& rng, const Lattice& L) {
  LVector x(L.rank(), Laurent::zero());
  for (const auto& b : L.basis()) x = add(k, x, scale(k, oracle::random_laurent(k, rng, 0, 3, 0.5), b));
  return x;
}

inline bool vec_agree(const Field& k, const LVector& a, const LVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!psilat::detail::agree(k, a[i], b[i])) return false;
  return true;
}

}  // namespace detail

/// Runs one case; failures are appended with the case description.
inline void check_case(const Case& c, std::mt19937_64& rng, Outcome& out) {
  const Field& k = *c.k;
  const OneVarModule M(c.k, c.q, c.is_Qp, c.A);
  const int n = M.rank();
  auto fail = [&](const std::string& what) { out.failures.push_back(what + " :: " + c.describe()); };
  auto ok = [&](const char* clause, bool cond, const std::string& what) {
    ++out.checked[clause];
    if (!cond) fail(what);
  };

  // psi is additive and psi(phi(a) x) = a psi(x); psi(E) contains psi of elements of E.
  const Lattice R = random_lattice(k, rng, n, 1 + static_cast<int>(rng() % 2), -3, 3);
  const Lattice psiR = psi_image(M, R);
  for (int it = 0; it < 3; ++it) {
    const LVector x = detail::element_of(k, rng, R), y = detail::element_of(k, rng, R);
    const Laurent a = oracle::random_laurent(k, rng, 0, 2, 0.6);
    const LVector lhs = M.psi(detail::add(k, x, detail::scale(k, phi(a, c.q), y)), 16);
    const LVector rhs = detail::add(k, M.psi(x, 16), detail::scale(k, a, M.psi(y, 16)));
    ok("psi module structure", detail::vec_agree(k, lhs, rhs), "psi(x + phi(a) y) != psi(x) + a psi(y)");
    ok("psi module structure", psiR.contains(M.psi(x, psiR.hi() + 1)), "psi(x) outside psi(E)");
  }

  // Standard pair: phi(E0) in t E0 in E0 in E1 in k[[t]] phi(E1).
  const StandardPair sp = standard_pair(M);
  ok("standard pair", sp.E0.scale_t(1).contains(phi_image(M, sp.E0)), "phi(E0) not in t E0");
  ok("standard pair", sp.E0.contains(sp.E0.scale_t(1)) && sp.E1.contains(sp.E0), "E0 not in E1");
  ok("standard pair", phi_image(M, sp.E1).contains(sp.E1), "E1 not in k[[t]] phi(E1)");

  // phi(E) in E gives E in psi(E); E in k[[t]]phi(E) gives psi(E) in E. Checked on the standard pair and on R when the hypotheses hold.
  ok("phi-stable in psi image", psi_image(M, sp.E0).contains(sp.E0), "phi(E) in E but E not in psi(E)");
  ok("psi image shrinks", sp.E1.contains(psi_image(M, sp.E1)), "E in k[[t]]phi(E) but psi(E) not in E");
  if (R.contains(phi_image(M, R))) ok("phi-stable in psi image", psiR.contains(R), "phi(R) in R but R not in psi(R)");
  if (phi_image(M, R).contains(R)) ok("psi image shrinks", R.contains(psiR), "R in k[[t]]phi(R) but psi(R) not in R");

  // Uniqueness of D-sharp from two starting lattices.
  const DSharpResult s1 = psilat::detail::dsharp_from(M, sp.n);
  const int shift = 1 + static_cast<int>(rng() % 3);
  const DSharpResult s2 = psilat::detail::dsharp_from(M, sp.n + shift);
  ok("D-sharp uniqueness", s1.lattice == s2.lattice, "D-sharp differs between starts n and n+" + std::to_string(shift));
  const Lattice& S = s1.lattice;
  ok("D-sharp uniqueness", psi_image(M, S) == S, "psi(D-sharp) != D-sharp");

  // psi(E) in E gives psi(t^-1 E) in t^-1 E, on D-sharp and on E1.
  ok("psi-stable after t^-1", S.scale_t(-1).contains(psi_image(M, S.scale_t(-1))), "psi(t^-1 D-sharp) not in t^-1 D-sharp");
  ok("psi-stable after t^-1", sp.E1.scale_t(-1).contains(psi_image(M, sp.E1.scale_t(-1))), "psi(t^-1 E1) not in t^-1 E1");

  // psi-fixed lattices reached from random starts sit between t D-sharp and D-sharp.
  const Lattice tS = S.scale_t(1);
  for (int it = 0; it < 2; ++it) {
    const Lattice start = random_lattice(k, rng, n, static_cast<int>(rng() % 3), -3, 3);
    Lattice F = start;
    bool fixed = false;
    for (int m = 0; m < kIterationCap && !fixed; ++m) {
      Lattice next = psi_image(M, F);
      fixed = next == F;
      F = std::move(next);
    }
    if (!fixed) continue;  // cycles are allowed; only fixed points are constrained
    ok("D-sharp sandwich", F.contains(tS) && S.contains(F), "psi-fixed lattice " + F.to_string() + " outside [t D#, D#]");
  }

  // psi-stable lattices inside D-sharp: saturations of t D-sharp plus random elements.
  const Lattice N = dnatural(M, S).lattice;
  for (int it = 0; it < 2; ++it) {
    Lattice L = tS.sum(Lattice::from_generators(k, n, [&] {
      std::vector<LVector> g = tS.basis();
      g.push_back(detail::element_of(k, rng, S));
      return g;
    }()));
    for (int m = 0; m < kIterationCap; ++m) {
      Lattice next = L.sum(psi_image(M, L));
      if (next == L) break;
      L = std::move(next);
    }
    ok("psi-stable is psi-fixed", psi_image(M, L) == L, "psi-stable lattice with psi(E) != E: " + L.to_string());
    ok("psi-stable is psi-fixed", L.contains(N) && S.contains(L), "D-natural not in sampled psi-stable lattice");
  }
  ok("psi-stable is psi-fixed", psi_image(M, N) == N && N.contains(tS), "psi(D-natural) != D-natural");
}

inline Outcome run_suite(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  Outcome out;
  for (int i = 0; i < cases; ++i) {
    const Case c = random_case(rng);
    try {
      check_case(c, rng, out);
    } catch (const std::exception& e) {
      out.failures.push_back(std::string("exception ") + e.what() + " :: " + c.describe());
    }
    ++out.cases;
  }
  return out;
}

}  // namespace props
