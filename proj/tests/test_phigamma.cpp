#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace psilat;

namespace {

PhiGammaModule module_of(const SeriesRingPtr& R, std::vector<SMatrix> phi) {
  PhiGammaModule D;
  D.ring = R;
  D.local = LocalRingParams{R->field->characteristic(), 1, 1, {}, 8, {}};
  D.rank = static_cast<int>(phi[0].size());
  D.phi = std::move(phi);
  for (int j = 0; j < D.rank; ++j) D.labels.push_back("e" + std::to_string(j + 1));
  return D;
}

Series mono(const SeriesRingPtr& R, const Exponent& e, long c = 1) { return Series::monomial(R, e, R->field->from_int(c)); }

// Agreement wherever both sides are certified.
bool agree(const ModuleElem& a, const ModuleElem& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    Series x = a[i], y = b[i];
    for (int d = 0; d < x.nvars(); ++d) {
      const int p = std::min(x.prec(d), y.prec(d));
      x.truncate(d, p);
      y.truncate(d, p);
    }
    if (!(x - y).is_zero()) return false;
  }
  return true;
}

}  // namespace

TEST(PhiGamma, TrivialModuleIsEtaleAndCommutes) {
  auto R = make_series_ring(make_field(3), {"t1", "t2"}, true);
  auto D = module_of(R, {{{mono(R, {0, 0})}}, {{mono(R, {0, 0})}}});
  D.gamma[{0, "teich"}] = {{mono(R, {0, 0})}};
  D.gamma[{1, "1+pi"}] = {{mono(R, {0, 0})}};
  EXPECT_TRUE(check_etale(D).etale);
  EXPECT_NO_THROW(check_commutations(D));
}

TEST(PhiGamma, BrokenCommutationDetected) {
  auto R = make_series_ring(make_field(3), {"t1", "t2"}, true);
  auto D = module_of(R, {{{mono(R, {0, 0}) + mono(R, {0, 1})}}, {{mono(R, {0, 0})}}});
  EXPECT_THROW(check_commutations(D), CommutationFailure);
}

TEST(PhiGamma, NonEtaleDetected) {
  auto R = make_series_ring(make_field(3), {"t"}, true);
  auto D = module_of(R, {{{mono(R, {1}), Series(R)}, {Series(R), Series(R)}}});
  EXPECT_THROW(check_etale(D), NotEtale);
  auto E = module_of(R, {{{mono(R, {1}) + mono(R, {0})}}});   // det 1 + t: fine
  EXPECT_TRUE(check_etale(E).etale);
}

TEST(PhiGamma, PsiAfterPhiIsIdentityOverQp) {
  std::mt19937_64 rng(3);
  for (int p : {2, 3}) {
    auto k = make_field(p);
    auto R = make_series_ring(k, {"t"}, true);
    for (int it = 0; it < 15; ++it) {
      // Upper triangular with monomial diagonal: always etale.
      const int a = static_cast<int>(rng() % 7) - 3, b = static_cast<int>(rng() % 7) - 3;
      SMatrix A{{mono(R, {a}), to_series(R, oracle::random_laurent(*k, rng, -3, 3))}, {Series(R), mono(R, {b}, p - 1)}};
      auto D = module_of(R, {A});
      ModuleElem x{to_series(R, oracle::random_laurent(*k, rng, -6, 6)), to_series(R, oracle::random_laurent(*k, rng, -6, 6))};
      EXPECT_TRUE(agree(psi_module(D, phi_module(D, x, 0), 0), x));
      // Projection formula on D: psi(phi(a) x) = a psi(x)
      const Series c = to_series(R, oracle::random_laurent(*k, rng, -2, 2));
      ModuleElem cx = phi_module(D, x, 0);
      for (auto& s : cx) s = s * c.phi(0);
      ModuleElem rhs = x;
      for (auto& s : rhs) s = s * c;
      EXPECT_TRUE(agree(psi_module(D, cx, 0), rhs));
    }
  }
}

TEST(PhiGamma, PsiDirectionsCommute) {
  std::mt19937_64 rng(8);
  for (int p : {2, 3}) {
    auto k = make_field(p);
    auto R = make_series_ring(k, {"t1", "t2"}, true);
    auto D = module_of(R, {{{mono(R, {1, 0}), Series(R)}, {Series(R), mono(R, {-1, 0}, p - 1)}},
                           {{mono(R, {0, -1}), Series(R)}, {Series(R), mono(R, {0, 2})}}});
    for (int it = 0; it < 20; ++it) {
      ModuleElem x(2, Series(R));
      for (auto& s : x)
        for (int n = 0; n < 6; ++n)
          s.set({static_cast<int>(rng() % 13) - 6, static_cast<int>(rng() % 13) - 6}, k->from_int(static_cast<long>(rng() % p)));
      EXPECT_TRUE(agree(psi_module(D, psi_module(D, x, 1), 0), psi_module(D, psi_module(D, x, 0), 1)));
      EXPECT_TRUE(agree(psi_D(D, phi_D(D, x)), x));
    }
  }
}

TEST(PhiGamma, DiagonalRestrictionConvention) {
  auto k = make_field(3);
  auto R = make_series_ring(k, {"t1", "t2"}, true);
  // A_1 = t1 (1 + t2), A_2 = 2 t2: phi_D = A_1 phi_1(A_2) = 2 t1 t2 (1 + t2)
  auto D = module_of(R, {{{mono(R, {1, 0}) + mono(R, {1, 1})}}, {{mono(R, {0, 1}, 2)}}});
  const SMatrix m = phi_D_matrix(D);
  EXPECT_EQ(m[0][0], mono(R, {1, 1}, 2) + mono(R, {1, 2}, 2));
  const PhiGammaModule r = diagonal_restriction(D);
  ASSERT_EQ(r.nvars(), 1);
  const Laurent want{2, {k->from_int(2), k->from_int(2)}, kExact};
  EXPECT_EQ(to_laurent(r.phi[0][0][0]), want);
}

TEST(PhiGamma, GammaLabels) {
  LocalRing L(LocalRingParams{3, 1, 1, {}, 6, {}});
  EXPECT_TRUE(L.equal_exact(gamma_from_label(L, "1+pi"), L.from_int(4)));
  EXPECT_TRUE(L.equal_exact(gamma_from_label(L, "(1+pi)^2"), L.from_int(16)));
  EXPECT_TRUE(L.equal_exact(gamma_from_label(L, "5"), L.from_int(5)));
  EXPECT_THROW(gamma_from_label(L, "3"), NotAUnit);
  EXPECT_THROW(gamma_from_label(L, "bogus"), ParseError);
}
