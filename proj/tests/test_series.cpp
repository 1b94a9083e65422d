#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace psilat;

namespace {

SeriesRingPtr ring1(FieldPtr k, bool is_Qp = true) { return make_series_ring(std::move(k), {"t"}, is_Qp); }

Series poly(const SeriesRingPtr& R, const std::vector<std::pair<int, long>>& terms) {
  Series s(R);
  for (auto [e, c] : terms) s.set({e}, R->field->from_int(c));
  return s;
}

Series from_laurent2(const SeriesRingPtr& R, const Laurent& a, const Laurent& b) {
  // a(t1) * b(t2)
  Series s(R);
  for (std::size_t i = 0; i < a.c.size(); ++i)
    for (std::size_t j = 0; j < b.c.size(); ++j)
      s.set({a.start + static_cast<int>(i), b.start + static_cast<int>(j)}, R->field->mul(a.c[i], b.c[j]));
  return s;
}

}  // namespace

TEST(Series, ProductOfBinomials) {
  auto R = ring1(make_field(3));
  EXPECT_EQ(poly(R, {{0, 1}, {1, 1}}) * poly(R, {{0, 1}, {1, -1}}), poly(R, {{0, 1}, {2, -1}}));
}

TEST(Series, InverseOfMonomialTimesUnit) {
  auto R = ring1(make_field(3));
  const Series a = poly(R, {{2, 1}, {3, 1}});
  const Series inv = a.inverse(8);
  for (int n = -2; n < 8; ++n) EXPECT_EQ(inv.coeff({n}), R->field->from_int((n % 2 == 0) ? 1 : -1)) << n;
  EXPECT_EQ(inv.prec(0), 8);
  Series one = a * inv;
  one.truncate(0, 6);
  EXPECT_EQ(one, [&] {
    Series s = poly(R, {{0, 1}});
    s.truncate(0, 6);
    return s;
  }());
}

TEST(Series, SumOfVariablesIsNotInvertible) {
  auto R = make_series_ring(make_field(3), {"t1", "t2"}, true);
  const Series s = Series::var_power(R, 0, 1) + Series::var_power(R, 1, 1);
  EXPECT_THROW(s.inverse(6), NotInvertible);
  EXPECT_THROW(Series::zero(R).inverse(6), NotInvertible);
}

TEST(Series, PhiSubstitutesPower) {
  auto R = ring1(make_field(3));
  EXPECT_EQ(poly(R, {{0, 1}, {1, 1}}).phi(0), poly(R, {{0, 1}, {3, 1}}));
  EXPECT_EQ(poly(R, {{-1, 2}}).phi(0), poly(R, {{-3, 2}}));
  Series t = poly(R, {{1, 1}});
  t.truncate(0, 5);
  EXPECT_EQ(t.phi(0).prec(0), 15);
}

TEST(Series, PsiExamples) {
  auto Q3 = ring1(make_field(3), true);
  auto ram = ring1(make_field(3), false);
  EXPECT_EQ(poly(Q3, {{2, 1}}).psi(0), poly(Q3, {{0, 1}}));
  EXPECT_EQ(poly(Q3, {{0, 1}}).psi(0), poly(Q3, {{0, 1}}));
  EXPECT_EQ(poly(ram, {{0, 1}}).psi(0), Series::zero(ram));
  EXPECT_EQ(poly(Q3, {{-1, 1}}).psi(0), poly(Q3, {{-1, 1}}));
  EXPECT_EQ(poly(Q3, {{1, 1}}).psi(0), Series::zero(Q3));
}

TEST(Series, PsiPrecisionLaw) {
  auto R = ring1(make_field(3));
  Series s = poly(R, {{1, 1}});
  s.truncate(0, 10);
  EXPECT_EQ(s.psi(0).prec(0), 3);
  s.truncate(0, -4);
  EXPECT_EQ(s.psi(0).prec(0), -2);
}

TEST(Series, PsiMatchesDigitOracleOnMonomials) {
  for (const auto& pc : oracle::psi_cases()) {
    auto R = ring1(pc.k, pc.is_Qp);
    const long q = pc.k->q();
    const FieldElem qpi = pc.is_Qp ? pc.k->one() : pc.k->zero();
    for (int n = -50; n <= 50; ++n) {
      int m = 0;
      const FieldElem c = oracle::psi_monomial(*pc.k, pc.is_Qp, n, m);
      const Series want = Series::monomial(R, {m}, c);
      EXPECT_EQ(Series::var_power(R, 0, n).psi(0), want) << pc.name << " n=" << n;
      EXPECT_EQ(psi(*pc.k, Laurent::monomial(n, pc.k->one()), q, qpi), Laurent::monomial(m, c)) << pc.name << " n=" << n;
    }
  }
}

TEST(Series, SurjectivityWitness) {
  for (const auto& pc : oracle::psi_cases()) {
    auto R = ring1(pc.k, pc.is_Qp);
    const int q = static_cast<int>(pc.k->q());
    for (int m = -10; m <= 10; ++m) EXPECT_EQ(Series::var_power(R, 0, m * q + q - 1).psi(0), Series::var_power(R, 0, m));
  }
}

TEST(Series, ProjectionFormula) {
  std::mt19937_64 rng(5);
  for (const auto& pc : oracle::psi_cases()) {
    const Field& k = *pc.k;
    const long q = k.q();
    const FieldElem qpi = pc.is_Qp ? k.one() : k.zero();
    for (int it = 0; it < 40; ++it) {
      const Laurent a = oracle::random_laurent(k, rng, -4, 4);
      const Laurent x = oracle::random_laurent(k, rng, -12, 12);
      const Laurent lhs = psi(k, mul(k, phi(a, q), x), q, qpi);
      const Laurent rhs = mul(k, a, oracle::psi_poly(k, pc.is_Qp, x));
      EXPECT_EQ(lhs, rhs) << pc.name;
      // psi(phi(x)) = psi(1) x
      EXPECT_EQ(psi(k, phi(x, q), q, qpi), pc.is_Qp ? x : Laurent{}) << pc.name;
    }
  }
}

TEST(Series, PhiThenPsiDIsIdentityForQp) {
  std::mt19937_64 rng(9);
  for (int p : {2, 3}) {
    auto k = make_field(p);
    for (int it = 0; it < 30; ++it) {
      const Laurent x = oracle::random_laurent(*k, rng, -8, 8);
      EXPECT_EQ(psi(*k, phi(x, p), p, k->one()), x);
    }
  }
}

TEST(Series, ComponentDecompositionRoundTrip) {
  // a = sum_i t^i phi(a_i); in the non-Q_p case a_i = psi(t^{q-1-i} a).
  std::mt19937_64 rng(17);
  for (const auto& pc : oracle::psi_cases()) {
    if (pc.is_Qp) continue;
    const Field& k = *pc.k;
    const long q = k.q();
    for (int it = 0; it < 20; ++it) {
      const Laurent a = oracle::random_laurent(k, rng, -10, 10);
      Laurent sum;
      for (long i = 0; i < q; ++i) {
        const Laurent ai = psi(k, a.shifted(static_cast<int>(q - 1 - i)), q, k.zero());
        sum = add(k, sum, phi(ai, q).shifted(static_cast<int>(i)));
      }
      EXPECT_EQ(sum, a) << pc.name;
    }
  }
}

TEST(Series, TwoVariableCommutations) {
  std::mt19937_64 rng(23);
  for (int p : {2, 3}) {
    auto k = make_field(p);
    auto R = make_series_ring(k, {"t1", "t2"}, true);
    for (int it = 0; it < 25; ++it) {
      Series x = from_laurent2(R, oracle::random_laurent(*k, rng, -5, 6), oracle::random_laurent(*k, rng, -5, 6)) +
                 from_laurent2(R, oracle::random_laurent(*k, rng, -3, 3), oracle::random_laurent(*k, rng, 0, 7));
      EXPECT_EQ(x.phi(1).psi(0), x.psi(0).phi(1));
      EXPECT_EQ(x.phi(0).psi(1), x.psi(1).phi(0));
      EXPECT_EQ(x.psi(1).psi(0), x.psi(0).psi(1));
      EXPECT_EQ(x.phi(0).phi(1), x.phi(1).phi(0));
      // psi_d fixes the other variable
      EXPECT_EQ(Series::var_power(R, 1, 4).psi(0), Series::var_power(R, 1, 4));
    }
  }
}

TEST(Series, GammaActionTrivialAndOtherVariable) {
  auto k = make_field(3);
  auto R = make_series_ring(k, {"t1", "t2"}, true);
  const std::vector<FieldElem> id{k->zero(), k->one(), k->zero(), k->zero()};
  const Series x = Series::var_power(R, 0, -2) + Series::var_power(R, 1, 3);
  Series y = x.gamma(0, id, 4);
  EXPECT_EQ(y.coeff({-2, 0}), k->one());
  EXPECT_EQ(y.coeff({0, 3}), k->one());
  const Series z = Series::var_power(R, 1, 1).gamma(0, {k->zero(), k->from_int(2), k->one()}, 3);
  ASSERT_EQ(z.terms().size(), 1u);
  EXPECT_EQ(z.coeff({0, 1}), k->one());
}

TEST(Series, GammaLinearTerm) {
  LocalRing L(LocalRingParams{3, 1, 1, {}, 12, {}});
  auto k = make_field(3);
  auto R = ring1(k);
  const LocalRingElem g = L.from_int(2 * 4);
  const auto coeffs = embed_action_series(reduce_series(L, gamma_series(L, g, 10)), L.residue_field(), k);
  Series t = Series::var_power(R, 0, 1);
  t.truncate(0, 2);
  Series img = t.gamma(0, coeffs, 10);
  EXPECT_EQ(img.coeff({1}), k->from_int(2));
  EXPECT_LE(img.prec(0), 2);
}

TEST(Series, GammaCommutesWithPsi) {
  for (int p : {2, 3}) {
    LocalRing L(LocalRingParams{p, 1, 1, {}, 30, {}});
    auto k = make_field(p);
    auto R = ring1(k);
    const int tp = 24;
    std::mt19937_64 rng(31 + p);
    for (const LocalRingElem& g : {L.teichmuller_generator(), L.from_int(1 + p), L.from_int((1 + p) * (1 + p))}) {
      const auto coeffs = embed_action_series(reduce_series(L, gamma_series(L, g, tp)), L.residue_field(), k);
      for (int it = 0; it < 10; ++it) {
        const Series x = to_series(R, oracle::random_laurent(*k, rng, -6, 20));
        Series lhs = x.gamma(0, coeffs, tp).psi(0);
        Series rhs = x.psi(0).gamma(0, coeffs, tp);
        const int cp = std::min(lhs.prec(0), rhs.prec(0));
        lhs.truncate(0, cp);
        rhs.truncate(0, cp);
        EXPECT_EQ(lhs, rhs) << "p=" << p;
      }
    }
  }
}

TEST(Series, DiagonalSumsExponents) {
  auto k = make_field(3);
  auto R2 = make_series_ring(k, {"t1", "t2"}, true);
  auto R1 = ring1(k);
  Series x = Series::monomial(R2, {2, -1}, k->one()) + Series::monomial(R2, {0, 1}, k->from_int(2));
  EXPECT_EQ(x.diagonal(R1), poly(R1, {{1, 1 + 2}}));
  EXPECT_EQ(Series::monomial(R2, {1, 2}, k->one()).diagonal(R1), poly(R1, {{3, 1}}));
}
