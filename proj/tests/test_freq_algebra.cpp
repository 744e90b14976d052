#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oscillode/errors.hpp"
#include "oscillode/freq_algebra.hpp"
#include "oscillode/problems.hpp"

namespace oscillode {
namespace {

FrequencySystem worked_frequencies() {
  const FrequencyBasis basis = sqrt2_basis();
  return FrequencySystem(basis, {basis.make({1, 0}), basis.make({0, 1}), basis.make({-1, -1})});
}

TEST(Partitions, NondecreasingWithOrderingCounts) {
  const std::vector<Partition> parts = ordered_partitions(2, 4);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].parts, (std::vector<int>{1, 3}));
  EXPECT_EQ(parts[0].theta, 2);
  EXPECT_EQ(parts[1].parts, (std::vector<int>{2, 2}));
  EXPECT_EQ(parts[1].theta, 1);
  EXPECT_THROW(ordered_partitions(0, 3), std::invalid_argument);
  EXPECT_THROW(ordered_partitions(4, 3), std::invalid_argument);
}

TEST(Partitions, ThetaSumsToCompositionCount) {
  for (int total = 1; total <= 8; ++total) {
    for (int n = 1; n <= total; ++n) {
      std::int64_t theta_sum = 0;
      for (const Partition& p : ordered_partitions(n, total)) {
        EXPECT_TRUE(std::is_sorted(p.parts.begin(), p.parts.end()));
        theta_sum += p.theta;
      }
      // stars and bars: C(total - 1, n - 1)
      std::int64_t binom = 1;
      for (int k = 1; k <= n - 1; ++k) binom = binom * (total - k) / k;
      EXPECT_EQ(theta_sum, binom);
      EXPECT_EQ(static_cast<std::int64_t>(compositions(n, total).size()), binom);
    }
  }
}

TEST(Partitions, DistinctPermutations) {
  const int a[] = {1, 1, 2};
  const int b[] = {3, 3, 3};
  const int c[] = {0, 1, 2, 3};
  EXPECT_EQ(distinct_permutations(a), 3);
  EXPECT_EQ(distinct_permutations(b), 1);
  EXPECT_EQ(distinct_permutations(c), 24);
}

TEST(FrequencyBasis, ExactFormatting) {
  const FrequencyBasis basis = sqrt2_basis();
  EXPECT_EQ(basis.format(basis.make({-1, -1})), "-1 - √2");
  EXPECT_EQ(basis.format(basis.make({0, 2})), "2√2");
  EXPECT_EQ(basis.format(basis.make({0, 0})), "0");
  EXPECT_EQ(basis.format(basis.make({-1, 1})), "-1 + √2");
  EXPECT_EQ(basis.format(basis.make({Rational(1, 2), Rational(-3, 2)})), "1/2 - (3/2)√2");
}

TEST(FrequencySystem, RejectsZeroBaseFrequency) {
  const FrequencyBasis basis = sqrt2_basis();
  EXPECT_THROW(FrequencySystem(basis, {basis.make({0, 0})}), std::invalid_argument);
}

TEST(FrequencySystem, RejectsDuplicateBaseFrequencies) {
  const FrequencyBasis basis = sqrt2_basis();
  const FrequencySystem system(basis, {basis.make({1, 0}), basis.make({1, 0})});
  EXPECT_THROW(build_index_chain(system, 1), std::invalid_argument);
}

struct TableRow {
  const char* name;
  const char* sigma;
  double value;
};

// Ordered elements of U_4 for kappa = 1, √2, -1 - √2.
const TableRow kTable[] = {
    {"0", "0", 0.0},
    {"1", "1", 1.0},
    {"2", "√2", std::sqrt(2.0)},
    {"3", "-1 - √2", -1.0 - std::sqrt(2.0)},
    {"(1, 1)", "2", 2.0},
    {"(1, 2)", "1 + √2", 1.0 + std::sqrt(2.0)},
    {"(1, 3)", "-√2", -std::sqrt(2.0)},
    {"(2, 2)", "2√2", 2.0 * std::sqrt(2.0)},
    {"(2, 3)", "-1", -1.0},
    {"(3, 3)", "-2 - 2√2", -2.0 - 2.0 * std::sqrt(2.0)},
    {"(1, 1, 1)", "3", 3.0},
    {"(1, 1, 2)", "2 + √2", 2.0 + std::sqrt(2.0)},
    {"(1, 1, 3)", "1 - √2", 1.0 - std::sqrt(2.0)},
    {"(1, 2, 2)", "1 + 2√2", 1.0 + 2.0 * std::sqrt(2.0)},
    {"(1, 3, 3)", "-1 - 2√2", -1.0 - 2.0 * std::sqrt(2.0)},
    {"(2, 2, 2)", "3√2", 3.0 * std::sqrt(2.0)},
    {"(2, 2, 3)", "-1 + √2", -1.0 + std::sqrt(2.0)},
    {"(2, 3, 3)", "-2 - √2", -2.0 - std::sqrt(2.0)},
    {"(3, 3, 3)", "-3 - 3√2", -3.0 - 3.0 * std::sqrt(2.0)},
};

TEST(IndexSets, WorkedExampleMatchesTable) {
  const FrequencySystem system = worked_frequencies();
  const std::vector<IndexSet> chain = build_index_chain(system, 4);
  const IndexSet& u4 = chain[4];
  ASSERT_EQ(u4.size(), std::size(kTable));
  for (std::size_t i = 0; i < u4.size(); ++i) {
    EXPECT_EQ(u4.labels[i].name(), kTable[i].name);
    EXPECT_EQ(system.basis().format(u4.labels[i].sigma), kTable[i].sigma);
    EXPECT_NEAR(u4.labels[i].sigma.value, kTable[i].value, 1e-12);
  }
}

TEST(IndexSets, EachLevelExtendsThePrevious) {
  const FrequencySystem system = worked_frequencies();
  // pairs first appear at level 3 and triples at level 4
  const std::vector<IndexSet> chain = build_index_chain(system, 4);
  const std::size_t sizes[] = {3, 4, 4, 10, 19};
  for (std::size_t r = 0; r < chain.size(); ++r) {
    EXPECT_EQ(chain[r].size(), sizes[r]) << "level " << r;
    if (r >= 2) {
      for (std::size_t i = 0; i < chain[r - 1].size(); ++i) {
        EXPECT_EQ(chain[r].labels[i].name(), chain[r - 1].labels[i].name());
      }
    }
  }
}

TEST(IndexSets, MemristorLevelThreeOmitsCancellingPairs) {
  const RegisteredProblem memristor = make_memristor();
  const std::vector<IndexSet> chain = build_index_chain(memristor.problem->frequencies, 3);
  const IndexSet& u3 = chain[3];
  EXPECT_EQ(u3.size(), 13u);
  std::vector<std::string> names;
  for (const FrequencyLabel& label : u3.labels) names.push_back(label.name());
  EXPECT_EQ(std::count(names.begin(), names.end(), "(1, 2)"), 0);
  EXPECT_EQ(std::count(names.begin(), names.end(), "(3, 4)"), 0);
  EXPECT_EQ(std::count(names.begin(), names.end(), "(1, 1)"), 1);
  EXPECT_EQ(std::count(names.begin(), names.end(), "(3, 3)"), 1);
}

TEST(IndexSets, SmallDenominatorInFloatMode) {
  const FrequencyBasis basis = FrequencyBasis::floating(1e-12);
  // kappa_1 + kappa_3 = 1e-10 falls below delta_min = 1e-6.
  const FrequencySystem system(basis, {basis.make(1.0), basis.make(2.0 - 1e-10), basis.make(-1.0 + 1e-10)},
                               1e-6);
  try {
    build_index_chain(system, 4);
    FAIL() << "expected SmallDenominator";
  } catch (const SmallDenominator& e) {
    EXPECT_LT(e.magnitude(), 1e-6);
    EXPECT_FALSE(e.tuple().empty());
  }
}

TEST(IndexSets, FloatModeAgreesWithExactModeWhenSeparated) {
  const FrequencySystem exact = worked_frequencies();
  const FrequencyBasis basis = FrequencyBasis::floating(1e-12);
  const FrequencySystem floating(basis, {basis.make(1.0), basis.make(std::sqrt(2.0)), basis.make(-1.0 - std::sqrt(2.0))});
  const auto a = build_index_chain(exact, 4);
  const auto b = build_index_chain(floating, 4);
  ASSERT_EQ(a[4].size(), b[4].size());
  for (std::size_t i = 0; i < a[4].size(); ++i) {
    EXPECT_EQ(a[4].labels[i].name(), b[4].labels[i].name());
    EXPECT_NEAR(a[4].labels[i].sigma.value, b[4].labels[i].sigma.value, 1e-12);
  }
}

// Independent oracle: enumerate every tuple in {0..M}^n, keep those that are
// rearrangements of `source` whose integer-coordinate sum equals the target.
std::int64_t brute_force_rho(const std::vector<std::vector<int>>& kappas, const std::vector<int>& target,
                             std::vector<int> source) {
  const int M = static_cast<int>(kappas.size()) - 1;
  const std::size_t n = source.size();
  std::sort(source.begin(), source.end());
  std::int64_t count = 0;
  std::vector<int> tuple(n, 0);
  while (true) {
    std::vector<int> sorted = tuple;
    std::sort(sorted.begin(), sorted.end());
    if (sorted == source) {
      std::vector<int> total(kappas[0].size(), 0);
      for (int m : tuple) {
        for (std::size_t k = 0; k < total.size(); ++k) total[k] += kappas[static_cast<std::size_t>(m)][k];
      }
      if (total == target) ++count;
    }
    std::size_t i = 0;
    for (; i < n; ++i) {
      if (++tuple[i] <= M) break;
      tuple[i] = 0;
    }
    if (i == n) break;
  }
  return count;
}

TEST(IndexSets, RhoMatchesPermutationOracle) {
  std::mt19937 rng(7);
  const FrequencyBasis basis = FrequencyBasis::exact({{"1", 1.0}, {"√2", std::sqrt(2.0)}, {"√3", std::sqrt(3.0)}});
  int matched = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int M = std::uniform_int_distribution<int>(1, 4)(rng);
    // small coordinates make accidental resonances common
    std::vector<std::vector<int>> coords(1, std::vector<int>(3, 0));
    std::vector<Frequency> kappas;
    while (static_cast<int>(kappas.size()) < M) {
      std::vector<int> c(3);
      for (int& x : c) x = std::uniform_int_distribution<int>(-1, 1)(rng);
      if (c == std::vector<int>(3, 0)) continue;
      coords.push_back(c);
      kappas.push_back(basis.make({c[0], c[1], c[2]}));
    }
    const FrequencySystem system(basis, kappas);

    const int length = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<int> source(static_cast<std::size_t>(length));
    for (int& m : source) m = std::uniform_int_distribution<int>(0, M)(rng);
    const int target_length = std::uniform_int_distribution<int>(1, 4)(rng);
    std::vector<int> target_indices(static_cast<std::size_t>(target_length));
    for (int& m : target_indices) m = std::uniform_int_distribution<int>(0, M)(rng);
    if (trial % 3 == 0) target_indices = source;  // guarantee plenty of hits

    const FrequencyLabel target = system.canonicalize(target_indices);
    std::vector<int> target_coords(3, 0);
    for (int m : target_indices) {
      for (std::size_t k = 0; k < 3; ++k) target_coords[k] += coords[static_cast<std::size_t>(m)][k];
    }
    const std::int64_t expected = brute_force_rho(coords, target_coords, source);
    EXPECT_EQ(system.rho(target, source), expected) << "trial " << trial;
    if (expected > 0) ++matched;
  }
  EXPECT_GT(matched, 300);
}

TEST(IndexTable, GoldenFile) {
  const FrequencySystem system = worked_frequencies();
  const auto chain = build_index_chain(system, 4);
  std::ifstream file(std::string(OSCILLODE_GOLDEN_DIR) + "/worked_example_U4.txt", std::ios::binary);
  ASSERT_TRUE(file);
  std::stringstream golden;
  golden << file.rdbuf();
  EXPECT_EQ(format_index_table(system, chain[4], 3), golden.str());
}

}  // namespace
}  // namespace oscillode
