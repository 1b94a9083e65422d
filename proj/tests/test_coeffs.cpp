#include <gtest/gtest.h>

#include <random>

#include "psilat/local_ring.hpp"

using namespace psilat;

namespace {

// Brute-force inverse over all field elements.
FieldElem brute_inverse(const Field& k, FieldElem a) {
  for (std::uint32_t v = 1; v < k.order(); ++v)
    if (k.mul(a, {v}) == k.one()) return {v};
  return {0};
}

}  // namespace

TEST(Field, F4UTimesUPlusOne) {
  auto k = make_field(2, 2, 1, {1, 1, 1});
  const FieldElem u = k->generator();
  EXPECT_EQ(k->mul(u, k->add(u, k->one())), k->one());
}

TEST(Field, FrobeniusFixesF9) {
  auto k = make_field(3, 2, 2);
  ASSERT_EQ(k->q(), 9);
  for (std::uint32_t v = 0; v < 9; ++v) EXPECT_EQ(k->frobenius_q({v}), FieldElem{v});
}

TEST(Field, FrobeniusFixesExactlySubfield) {
  auto k = make_field(2, 4, 2);  // F_16 over F_4
  int fixed = 0;
  for (std::uint32_t v = 0; v < k->order(); ++v) fixed += k->frobenius_q({v}) == FieldElem{v};
  EXPECT_EQ(fixed, 4);
}

TEST(Field, InverseOfUInF9) {
  auto k = make_field(3, 2, 1, {1, 0, 1});
  const FieldElem u = k->generator();
  const FieldElem two_u = k->mul(k->from_int(2), u);
  EXPECT_EQ(brute_inverse(*k, u), two_u);
  EXPECT_EQ(k->inv(u), two_u);
}

TEST(Field, InverseOfZeroThrows) {
  auto k = make_field(5);
  EXPECT_THROW(k->inv(k->zero()), DivisionByZero);
}

TEST(Field, AxiomsExhaustive) {
  for (auto [p, m] : std::vector<std::pair<int, int>>{{2, 1}, {3, 1}, {2, 2}, {3, 2}, {2, 3}, {5, 1}, {3, 4}}) {
    auto k = make_field(p, m);
    const std::uint32_t n = k->order();
    const std::uint32_t step = n > 27 ? 7 : 1;  // |k| = 81: sample triples
    for (std::uint32_t a = 0; a < n; ++a) {
      if (a) EXPECT_EQ(k->mul({a}, k->inv({a})), k->one());
      for (std::uint32_t b = 0; b < n; b += step)
        for (std::uint32_t c = 0; c < n; c += step) {
          EXPECT_EQ(k->mul({a}, k->add({b}, {c})), k->add(k->mul({a}, {b}), k->mul({a}, {c})));
          EXPECT_EQ(k->mul(k->mul({a}, {b}), {c}), k->mul({a}, k->mul({b}, {c})));
          EXPECT_EQ(k->add(k->add({a}, {b}), {c}), k->add({a}, k->add({b}, {c})));
        }
    }
  }
}

TEST(Field, RejectsReducibleModulus) {
  EXPECT_THROW(make_field(3, 2, 1, {2, 0, 1}), InvalidArgument);  // x^2 - 1
  EXPECT_THROW(make_field(4), InvalidArgument);
  EXPECT_THROW(make_field(2, 3, 2), InvalidArgument);
}

TEST(Field, ParseAndPrint) {
  auto k = make_field(3, 2);
  for (std::uint32_t v = 0; v < 9; ++v) EXPECT_EQ(k->parse(k->to_string({v})), FieldElem{v});
  EXPECT_EQ(make_field(5)->parse("-1"), make_field(5)->from_int(4));
  EXPECT_THROW(k->parse("x"), ParseError);
}

TEST(LocalRing, InverseOfTwoModNine) {
  LocalRing R(LocalRingParams{3, 1, 1, {}, 2, {}});
  const auto x = R.inv(R.from_int(2));
  EXPECT_TRUE(R.equal_exact(x, R.from_int(5)));
}

TEST(LocalRing, RamifiedValuationOfP) {
  LocalRing R(LocalRingParams{3, 1, 2, {}, 6, {}});
  EXPECT_EQ(R.val(R.from_int(3)), 2);
  EXPECT_EQ(R.val(R.uniformizer()), 1);
  EXPECT_EQ(R.val(R.from_int(9)), 4);
}

TEST(LocalRing, TeichmullerLiftByHensel) {
  LocalRing R(LocalRingParams{2, 2, 1, {}, 2, {}});
  const FieldElem u = R.residue_field()->generator();
  LocalRingElem x = R.lift(u);
  for (int i = 0; i < 8; ++i) x = R.pow(x, 4);  // x <- x^q converges to the lift
  EXPECT_EQ(R.reduce(x), u);
  EXPECT_TRUE(R.equal_exact(x, R.teichmuller(u)));
  EXPECT_TRUE(R.equal_exact(R.pow(x, 4), x));
}

TEST(LocalRing, NonUnitErrors) {
  LocalRing R(LocalRingParams{3, 1, 1, {}, 4, {}});
  EXPECT_THROW(R.inv(R.from_int(3)), NotAUnit);
  EXPECT_THROW(R.val(R.zero()), PrecisionExhausted);
}

TEST(LocalRing, ReduceIsHomomorphismAndUnitsInvert) {
  std::mt19937_64 rng(11);
  for (auto lp : {LocalRingParams{3, 1, 1, {}, 6, {}}, LocalRingParams{2, 2, 1, {}, 5, {}}, LocalRingParams{3, 1, 2, {}, 6, {}},
                  LocalRingParams{2, 2, 2, {}, 6, {}}}) {
    LocalRing R(lp);
    std::uniform_int_distribution<long> d(-500, 500);
    auto rnd = [&] {
      LocalRingElem x = R.from_int(d(rng));
      return R.add(x, R.mul(R.lift(R.residue_field()->generator()), R.from_int(d(rng))));
    };
    for (int i = 0; i < 50; ++i) {
      const auto a = rnd(), b = rnd(), c = rnd();
      const auto& kf = *R.residue_field();
      EXPECT_EQ(R.reduce(R.mul(a, b)), kf.mul(R.reduce(a), R.reduce(b)));
      EXPECT_EQ(R.reduce(R.add(a, b)), kf.add(R.reduce(a), R.reduce(b)));
      EXPECT_TRUE(R.equal_exact(R.mul(a, R.add(b, c)), R.add(R.mul(a, b), R.mul(a, c))));
      EXPECT_TRUE(R.equal_exact(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c))));
      if (R.is_unit(a)) {
        const auto one = R.mul(a, R.inv(a));
        EXPECT_TRUE(R.equal_at(one, R.one(), one.known_prec));
      }
    }
  }
}
