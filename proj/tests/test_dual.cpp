#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace psilat;

namespace {

int quotient_dim(const DerivedModule& m) {
  const OneVarModule E = m.engine();
  const Lattice s = dsharp(E).lattice;
  return dnatural(E, s).lattice.quotient_dims(s).dim;
}

}  // namespace

TEST(Dual, ExampleAOneVariableAllParameters) {
  for (long q : {2L, 3L})
    for (long c = 1; c < q; ++c)
      for (int m = 0; m < q - 1; ++m)
        for (const auto& fam : {family_empty(1), family_all_nonempty(1)}) {
          const Presentation P = example_a(q, {c}, {m}, fam);
          const DerivedModule d = derive_module(P);
          ASSERT_EQ(d.rank(), 1);
          EXPECT_TRUE(d.exact);
          EXPECT_EQ(d.admissibility.delta_t_dim, 1);
          EXPECT_TRUE(check_etale(d.module).etale);
          EXPECT_EQ(quotient_dim(d), 1) << "q=" << q << " c=" << c << " m=" << m << " " << fam.name();
        }
}

TEST(Dual, ExampleAModuleIndependentOfFamily) {
  // Both families give lattices in the same etale module: the phi-matrices
  // differ by a phi-twisted change of basis t^v.
  for (long q : {2L, 3L}) {
    const DerivedModule a = derive_module(example_a(q, {1}, {0}, family_empty(1)));
    const DerivedModule b = derive_module(example_a(q, {1}, {0}, family_all_nonempty(1)));
    const Field& k = *a.module.ring->field;
    const int va = a.A[0][0].val(), vb = b.A[0][0].val();
    // A_b = t^{-v} A_a phi(t^v) = t^{(q-1)v} A_a
    EXPECT_EQ((vb - va) % (q - 1), 0);
    const int v = static_cast<int>((vb - va) / (q - 1));
    EXPECT_EQ(b.A[0][0], a.A[0][0].shifted(static_cast<int>((q - 1) * v)));
    (void)k;
  }
}

TEST(Dual, Klara80OnExampleA) {
  for (long q : {2L, 3L}) {
    const int top = default_top(q, 1);
    EXPECT_TRUE(klara80_certify(example_a(q, {1}, {0}, family_all_nonempty(1)), top).certified);
    EXPECT_FALSE(klara80_certify(example_a(q, {1}, {0}, family_empty(1)), top).certified);
  }
}

TEST(Dual, Klara80ImpliesDeltaStarIsDNatural) {
  const DerivedModule d = derive_module(example_a(3, {2}, {1}, family_all_nonempty(1)));
  const OneVarModule E = d.engine();
  EXPECT_EQ(dnatural(E).lattice, Lattice::standard(E.field(), 1, 0));
}

TEST(Dual, AdmissibilityClauses) {
  const Presentation P = example_a(3, {1}, {0}, family_all_nonempty(1));
  const Tower T(P, default_top(3, 1));
  const AdmissibilityReport r = check_admissible(T);
  EXPECT_EQ(r.delta_t_dim, 1);
  EXPECT_TRUE(r.phi_injective);
  EXPECT_GE(r.clauses.size(), 4u);
}

TEST(Dual, NonNilpotentTIsRejected) {
  Presentation P = example_a(3, {1}, {0}, family_empty(1));
  ASSERT_EQ(P.ngens(), 2);
  P.t_action[0] = {1, 0};
  EXPECT_THROW(P.validate(), NotAdmissible);
}

TEST(Dual, QuotientOfCHasPhiKernel) {
  const ExampleTriple X = example_c(3, 0, 0);
  const Tower T(X.quot, default_top(3, 1));
  EXPECT_THROW(check_admissible(T, true), NotAdmissible);
  EXPECT_FALSE(check_admissible(T, false).phi_injective);
}

TEST(Dual, PullbackIsContravariantAndPhiLinear) {
  const ExampleTriple X = example_b(3, 1, 0);
  const DerivedTriple T = derive_triple(X);
  EXPECT_EQ(T.d.rank(), T.d1.rank() + T.d2.rank());
  const Field& k = *T.d.module.ring->field;
  // iota: D_1 -> D has |D| rows and |D_1| columns.
  ASSERT_EQ(static_cast<int>(T.iota.size()), T.d.rank());
  ASSERT_EQ(static_cast<int>(T.iota[0].size()), T.d1.rank());
  EXPECT_TRUE(detail::lmatrix_equal(k, matmul(k, T.d.A, phi_matrix(T.iota, 3)), matmul(k, T.iota, T.d1.A)));
  const LMatrix zero(T.d2.rank(), LVector(T.d1.rank(), Laurent::zero()));
  EXPECT_TRUE(detail::lmatrix_equal(k, matmul(k, T.rho, T.iota), zero));
}

TEST(Dual, DerivedPsiMatchesTower) {
  // psi on the derived module reproduces the psi-coordinates read off the tower.
  const DerivedModule d = derive_module(example_b(3, 2, 0).total);
  const OneVarModule E = d.engine();
  const Field& k = E.field();
  for (int j = 0; j < d.rank(); ++j) {
    LVector x(d.rank(), Laurent::zero());
    x[j] = Laurent::monomial(0, k.one());
    const LVector y = E.phi(E.psi(E.phi(x), 20));
    for (int i = 0; i < d.rank(); ++i) EXPECT_TRUE(detail::agree(k, y[i], E.phi(x)[i]));
  }
}
