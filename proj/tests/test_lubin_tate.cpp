#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace psilat;

namespace {

LocalRingParams qp(int p, int M) { return LocalRingParams{p, 1, 1, {}, M, {}}; }

bool series_equal(const LocalRing& R, const LTSeries& a, const LTSeries& b) {
  const int n = std::min(a.tprec, b.tprec);
  for (int i = 0; i < n; ++i) {
    const int prec = std::min(a.coeffs[i].known_prec, b.coeffs[i].known_prec);
    if (!R.equal_at(a.coeffs[i], b.coeffs[i], prec)) return false;
  }
  return true;
}

}  // namespace

TEST(LubinTate, TeichmullerActsLinearly) {
  LocalRing R(qp(3, 10));
  const auto omega = R.teichmuller_generator();
  const LTSeries g = gamma_series(R, omega, 20);
  EXPECT_TRUE(R.equal_exact(g.coeffs[1], omega));
  for (int i = 0; i < 20; ++i)
    if (i != 1) EXPECT_TRUE(R.is_zero_mod(g.coeffs[i], g.coeffs[i].known_prec)) << i;
}

TEST(LubinTate, PhiSeriesForThree) {
  LocalRing R(qp(3, 6));
  const LTSeries s = phi_series(R, 6);
  EXPECT_TRUE(R.equal_exact(s.coeffs[1], R.from_int(3)));
  EXPECT_TRUE(R.equal_exact(s.coeffs[3], R.one()));
  EXPECT_TRUE(R.equal_exact(s.coeffs[2], R.zero()));
}

TEST(LubinTate, MultiplicativeGroupOracle) {
  // p = 2: Phi(t) = (1+t)^2 - 1.
  const int M = 24, tprec = 24;
  LocalRing R(qp(2, M));
  for (long g : {3L, 5L, 7L, 9L, -1L, -3L}) {
    const LTSeries s = gamma_series(R, R.from_int(g), tprec);
    const auto ref = oracle::multiplicative_endomorphism(g, tprec, M);
    for (int n = 0; n < tprec; ++n) {
      const int prec = s.coeffs[n].known_prec;
      ASSERT_GE(prec, 1);
      EXPECT_TRUE(R.equal_at(s.coeffs[n], R.from_int(ref[n]), prec)) << "g=" << g << " n=" << n;
    }
  }
}

class LubinTateSuite : public ::testing::TestWithParam<int> {};

TEST_P(LubinTateSuite, FunctionalEquationLinearTermComposition) {
  const int p = GetParam();
  LocalRing R(qp(p, 34));
  const int tprec = 32;
  const long q = R.q();
  const auto u = R.from_int(1 + p);
  const std::vector<LocalRingElem> gammas{R.teichmuller_generator(), u, R.mul(u, u)};
  std::vector<LTSeries> gs;
  for (const auto& g : gammas) {
    const LTSeries s = gamma_series(R, g, tprec);
    EXPECT_TRUE(vanishes_at_certified_prec(R, [&] {
      LTSeries r = functional_equation_residual(R, s);
      for (auto& c : r.coeffs) c.known_prec = std::min(c.known_prec, s.certified_prec());
      return r;
    }()));
    const ReducedSeries red = reduce_series(R, s);
    EXPECT_EQ(red.coeffs[1], R.reduce(g));
    for (long i = 2; i < q; ++i) EXPECT_EQ(red.coeffs[i].v, 0u);
    EXPECT_EQ(red.coeffs[0].v, 0u);
    gs.push_back(s);
  }
  for (std::size_t a = 0; a < gammas.size(); ++a)
    for (std::size_t b = 0; b < gammas.size(); ++b) {
      const LTSeries prod = gamma_series(R, R.mul(gammas[a], gammas[b]), tprec);
      EXPECT_TRUE(series_equal(R, lt::compose(R, gs[a], gs[b]), prod)) << a << "," << b;
    }
}

INSTANTIATE_TEST_SUITE_P(Primes, LubinTateSuite, ::testing::Values(2, 3));

TEST(LubinTate, ReducedSeriesCommutesWithFrobenius) {
  // Modulo pi, [g](Phi(t)) = Phi([g](t)) reads g(t^q) = g(t)^q.
  LocalRing R(LocalRingParams{2, 2, 1, {}, 26, {}});
  const auto g = R.mul(R.teichmuller_generator(), R.from_int(3));
  const ReducedSeries s = reduce_series(R, gamma_series(R, g, 24));
  const Field& k = *R.residue_field();
  std::vector<FieldElem> pw(24, k.zero());  // g(t)^4 in characteristic 2
  for (int i = 0; 4 * i < 24; ++i) pw[4 * i] = k.frobenius_q(s.coeffs[i]);
  for (int i = 0; 4 * i < 24; ++i) EXPECT_EQ(pw[4 * i], s.coeffs[i]);
}

TEST(LubinTate, ErrorsOnBadInput) {
  LocalRing R(qp(3, 6));
  EXPECT_THROW(gamma_series(R, R.from_int(3), 8), NotAUnit);
  EXPECT_THROW(gamma_series(R, R.one(), 1), InvalidArgument);
}

TEST(LubinTate, PrecisionExhaustedWhenTooFewDigits) {
  LocalRing R(qp(3, 2));
  EXPECT_THROW(gamma_series(R, R.from_int(4), 40), PrecisionExhausted);
}
