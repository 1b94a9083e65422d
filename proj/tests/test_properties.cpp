#include <gtest/gtest.h>

#include <iostream>

#include "properties.hpp"

TEST(Properties, RandomEtaleModules) {
  const std::uint64_t seed = props::seed_from_env();
  const props::Outcome r = props::run_suite(seed, 220);
  EXPECT_GE(r.cases, 200);
  for (const auto& [clause, n] : r.checked) {
    std::cout << clause << ": " << n << " checks\n";
    EXPECT_GT(n, 0) << clause;
  }
  for (const auto& f : r.failures) ADD_FAILURE() << f;
  EXPECT_TRUE(r.ok()) << "seed " << seed;
}

TEST(Properties, SeedIsReproducible) {
  const props::Outcome a = props::run_suite(5, 6), b = props::run_suite(5, 6);
  EXPECT_EQ(a.checked, b.checked);
  EXPECT_EQ(a.failures, b.failures);
}
