#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace psilat;

TEST(MonoLattice, MinimalGeneratorsAndOps) {
  const MonoLattice a(2, {{1, 0}, {0, 1}, {1, 1}, {2, 0}});
  EXPECT_EQ(a.gens(), (std::vector<Point>{{0, 1}, {1, 0}}));
  EXPECT_EQ(a.to_string(), "(t2, t1) g");
  EXPECT_TRUE(a.contains(Point{1, 1}));
  EXPECT_FALSE(a.contains(Point{0, 0}));
  const MonoLattice b = MonoLattice::standard(2, 1);
  EXPECT_TRUE(a.contains(b));
  EXPECT_FALSE(b.contains(a));
  EXPECT_EQ(a.intersect(MonoLattice(2, {{1, 0}})), MonoLattice(2, {{1, 0}}));
  EXPECT_EQ(a.sum(MonoLattice::standard(2, 0)), MonoLattice::standard(2, 0));
  EXPECT_EQ(b.scale_t(-1), MonoLattice::standard(2, 0));
  EXPECT_EQ(MonoLattice::standard(2, 0).to_string(), "(1) g");
  EXPECT_THROW(MonoLattice(2, {{1}}), InvalidArgument);
}

TEST(MonomialModule, OneVariableMatchesMonomialOracle) {
  for (const auto& pc : oracle::psi_cases())
    for (int alpha = -4; alpha <= 4; ++alpha) {
      const MonomialModule M(pc.k, pc.k->q(), pc.is_Qp, {{pc.k->one(), alpha}});
      const auto s = M.dsharp();
      const auto want = oracle::rank_one_lattices(*pc.k, pc.is_Qp, alpha);
      EXPECT_EQ(s.lattice, MonoLattice(1, {{want.sharp}})) << pc.name << " alpha=" << alpha;
      EXPECT_EQ(M.dnatural(s.lattice), MonoLattice(1, {{want.natural}})) << pc.name << " alpha=" << alpha;
    }
}

TEST(MonomialModule, PsiImageAgreesWithPointwiseOracle) {
  std::mt19937_64 rng(7);
  for (const auto& pc : oracle::psi_cases()) {
    const int q = static_cast<int>(pc.k->q());
    for (int it = 0; it < 20; ++it) {
      const int a1 = static_cast<int>(rng() % 5) - 2, a2 = static_cast<int>(rng() % 5) - 2;
      const MonomialModule M(pc.k, q, pc.is_Qp, {{pc.k->one(), a1}, {pc.k->one(), a2}});
      std::vector<Point> gens;
      for (int g = 0; g < 3; ++g) gens.push_back({static_cast<int>(rng() % 7) - 3, static_cast<int>(rng() % 7) - 3});
      const MonoLattice L(2, gens);
      for (int d = 0; d < 2; ++d) {
        const MonoLattice img = M.psi_image(L, d);
        const int alpha = d == 0 ? a1 : a2;
        // Images of all monomials of L in a box large enough for the test window.
        for (int b1 = -3; b1 <= 3; ++b1)
          for (int b2 = -3; b2 <= 3; ++b2) {
            bool hit = false;
            for (int x = -30; x <= 30 && !hit; ++x) {
              Point a{b1, b2};
              a[d] = x;
              if (!L.contains(a)) continue;
              int m = 0;
              if (oracle::psi_monomial(*pc.k, pc.is_Qp, x - alpha, m).v != 0 && m == (d == 0 ? b1 : b2)) hit = true;
            }
            EXPECT_EQ(img.contains(Point{b1, b2}), hit) << pc.name << " d=" << d << " b=(" << b1 << "," << b2 << ")";
          }
      }
    }
  }
}

TEST(MonomialModule, TwoVariableProductStructure) {
  for (const auto& pc : oracle::psi_cases())
    for (int a1 = -2; a1 <= 2; ++a1)
      for (int a2 = -2; a2 <= 2; ++a2) {
        const MonomialModule M(pc.k, pc.k->q(), pc.is_Qp, {{pc.k->one(), a1}, {pc.k->one(), a2}});
        const auto s = M.dsharp();
        const auto w1 = oracle::rank_one_lattices(*pc.k, pc.is_Qp, a1), w2 = oracle::rank_one_lattices(*pc.k, pc.is_Qp, a2);
        EXPECT_EQ(s.lattice, MonoLattice(2, {{w1.sharp, w2.sharp}})) << pc.name;
        EXPECT_EQ(M.psi_D_image(s.lattice), s.lattice);
        const MonoLattice n = M.dnatural(s.lattice);
        EXPECT_TRUE(M.psi_stable(n));
        EXPECT_TRUE(s.lattice.contains(n));
        EXPECT_TRUE(n.contains(s.lattice.scale_t(1)));
        // A restart from a deeper lattice gives the same answer.
        EXPECT_EQ(M.dsharp(3).lattice, s.lattice);
      }
}

TEST(MonomialModule, TrivialTwoVariableQp) {
  for (int p : {2, 3}) {
    auto k = make_field(p);
    const MonomialModule M(k, p, true, {{k->one(), 0}, {k->one(), 0}});
    const auto s = M.dsharp();
    EXPECT_EQ(s.lattice, MonoLattice::standard(2, -1));
    EXPECT_EQ(M.dnatural(s.lattice), MonoLattice::standard(2, 0));
    EXPECT_GE(M.standard_n() * (p - 1), 1);
  }
}

TEST(MonomialModule, FromRankOneReadsLeadingTerm) {
  auto k = make_field(3);
  const Laurent A{-1, {k->from_int(2), k->one()}, kExact};
  const MonomialModule M = MonomialModule::from_rank_one(k, 3, true, {A, Laurent::monomial(0, k->one())});
  EXPECT_EQ(M.directions()[0].alpha, -1);
  EXPECT_EQ(M.directions()[0].c, k->from_int(2));
  EXPECT_EQ(M.directions()[1].alpha, 0);
  EXPECT_THROW(MonomialModule(k, 3, true, {{k->zero(), 0}}), NotEtale);
}
