#include <gtest/gtest.h>

#include <sstream>

#include "dbmatch/detector.hpp"
#include "dbmatch/errors.hpp"
#include "dbmatch/infotheory.hpp"
#include "test_support.hpp"

namespace dbmatch::detector {
namespace {

struct Instance {
  Database d1;
  Database d2;
};

// Seed batch through a random deletion pattern, occasionally with d2 replaced
// by an unrelated matrix of the same shape.
Instance random_instance(Rng& rng, std::size_t max_n, std::size_t max_b) {
  const std::size_t n = 1 + rng.below(max_n);
  const std::size_t b = 1 + rng.below(max_b);
  const std::size_t q = 2 + rng.below(2);
  const auto d1 = testing::random_database(rng, b, n, q);
  const auto flags = testing::random_flags(rng, n, rng.uniform01());
  auto d2 = delete_columns(d1, flags);
  if (rng.below(8) == 0) d2 = testing::random_database(rng, b, d2.cols(), q);
  return {d1, d2};
}

TEST(CountEmbeddings, HandComputedExamples) {
  // Columns of d1: a a a, d2: a a -> C(3, 2) embeddings.
  const Database d1(1, 3, 2, {1, 1, 1});
  const Database d2(1, 2, 2, {1, 1});
  EXPECT_EQ(count_embeddings(d1, d2), 3);
  EXPECT_EQ(count_embeddings(d1, Database(1, 0, 2, {})), 1);
  EXPECT_EQ(count_embeddings(d1, Database(1, 1, 2, {0})), 0);
  EXPECT_EQ(count_embeddings(Database(2, 4, 2, {0, 1, 0, 1, 1, 1, 1, 1}), Database(2, 2, 2, {0, 1, 1, 1})), 3);
  EXPECT_THROW(count_embeddings(d1, Database(2, 1, 2, {0, 0})), ArgumentError);
}

// Property: the DP count equals the number of consistent deletion patterns.
TEST(CountEmbeddings, AgreesWithEnumeration) {
  Rng rng(100);
  for (int i = 0; i < 1500; ++i) {
    const auto inst = random_instance(rng, 12, 3);
    ASSERT_EQ(count_embeddings(inst.d1, inst.d2), testing::enumerate_patterns(inst.d1, inst.d2).total) << i;
  }
}

TEST(CountEmbeddings, LibraryBruteForceAgrees) {
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const auto inst = random_instance(rng, 10, 3);
    EXPECT_EQ(brute_force_embeddings(inst.d1, inst.d2), testing::enumerate_patterns(inst.d1, inst.d2).total);
  }
}

TEST(CountEmbeddings, HandlesLargeInstancesExactly) {
  // All-equal columns: S = C(n, K), far beyond 64 bits for n = 200.
  const Database d1(1, 200, 2, std::vector<Symbol>(200, 1));
  const Database d2(1, 100, 2, std::vector<Symbol>(100, 1));
  BigCount expected = 1;
  for (unsigned i = 0; i < 100; ++i) expected = expected * (200 - i) / (i + 1);
  EXPECT_EQ(count_embeddings(d1, d2), expected);
}

// Property: exact rational posteriors equal the enumeration average, the
// naive route, and sum to n - K.
TEST(Posterior, AgreesWithBayesEnumeration) {
  Rng rng(200);
  int checked = 0;
  for (int i = 0; i < 1500; ++i) {
    const auto inst = random_instance(rng, 12, 3);
    const auto e = testing::enumerate_patterns(inst.d1, inst.d2);
    if (e.total == 0) {
      EXPECT_THROW(posterior_deletions(inst.d1, inst.d2), InconsistencyError);
      continue;
    }
    const auto post = posterior_deletions(inst.d1, inst.d2);
    const auto naive = posterior_deletions_naive(inst.d1, inst.d2);
    ASSERT_EQ(post.size(), inst.d1.cols());
    BigCount sum_num = 0;
    for (std::size_t j = 0; j < post.size(); ++j) {
      ASSERT_EQ(post[j], (Posterior{e.deleted[j], e.total})) << i << ' ' << j;
      ASSERT_EQ(post[j], naive[j]);
      ASSERT_EQ(post[j].denominator, e.total);
      sum_num += post[j].numerator;
    }
    EXPECT_EQ(sum_num, e.total * (inst.d1.cols() - inst.d2.cols()));
    ++checked;
  }
  EXPECT_GT(checked, 1000);
}

TEST(Posterior, AbsentColumnIsCertainlyDeleted) {
  Rng rng(300);
  for (int i = 0; i < 500; ++i) {
    const auto inst = random_instance(rng, 12, 4);
    if (count_embeddings(inst.d1, inst.d2) == 0) continue;
    const auto post = posterior_deletions(inst.d1, inst.d2);
    for (std::size_t j = 0; j < inst.d1.cols(); ++j) {
      bool present = false;
      for (std::size_t t = 0; t < inst.d2.cols() && !present; ++t) {
        bool eq = true;
        for (std::size_t r = 0; r < inst.d1.rows(); ++r) eq = eq && inst.d1.at(r, j) == inst.d2.at(r, t);
        present = eq;
      }
      if (!present) {
        EXPECT_TRUE(post[j].is_one());
      }
    }
  }
}

TEST(Posterior, FullyDeletedAndUndeletedBatches) {
  const Database d1(2, 3, 2, {0, 1, 1, 1, 0, 1});
  const auto all = posterior_deletions(d1, Database(2, 0, 2, {}));
  for (const auto& p : all) EXPECT_TRUE(p.is_one());
  const auto none = posterior_deletions(d1, d1);
  for (const auto& p : none) EXPECT_TRUE(p.is_zero());
  const Database same(1, 2, 2, {1, 1});
  const auto half = posterior_deletions(same, Database(1, 1, 2, {1}));
  EXPECT_DOUBLE_EQ(half[0].value(), 0.5);
}

TEST(Verdicts, FRequiresCertaintyAndTypicality) {
  const auto bern = Distribution::bernoulli(0.5);
  // Column 0 is absent from d2, columns 1 and 2 are identical, column 3 unique.
  const Database d1(2, 4, 2, {0, 1, 1, 0, 0, 0, 0, 1});
  SeedBatch batch{d1, Database(2, 2, 2, {1, 0, 0, 1}), {}};
  const auto v = detect_f(batch, bern, 0.0);
  EXPECT_EQ(v[0], Verdict::kDeleted);
  EXPECT_EQ(v[1], Verdict::kInconclusive);
  EXPECT_EQ(v[2], Verdict::kInconclusive);
  EXPECT_EQ(v[3], Verdict::kRetained);
  const auto g = detect_g(batch, bern, 0.0);
  EXPECT_EQ(g[0], Verdict::kDeleted);
  EXPECT_EQ(g[3], Verdict::kInconclusive);
  // A skewed distribution makes the deleted column atypical.
  EXPECT_EQ(detect_f(batch, Distribution({0.99, 0.01}), 0.01)[0], Verdict::kInconclusive);
}

TEST(Verdicts, GImpliesF) {
  Rng rng(400);
  const auto bern = Distribution::bernoulli(0.5);
  for (int i = 0; i < 1500; ++i) {
    auto inst = random_instance(rng, 12, 4);
    if (count_embeddings(inst.d1, inst.d2) == 0) continue;
    const SeedBatch batch{inst.d1, inst.d2, {}};
    const double eps = 0.1 * static_cast<double>(rng.below(6));
    const auto f = detect_f(batch, bern, eps);
    const auto g = detect_g(batch, bern, eps);
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (g[j] == Verdict::kDeleted) {
        ASSERT_EQ(f[j], Verdict::kDeleted);
      }
    }
  }
}

TEST(Verdicts, NeverWrongOnRealBatches) {
  Rng rng(500);
  const auto bern = Distribution::bernoulli(0.5);
  for (int i = 0; i < 500; ++i) {
    const auto c1 = sample_database(bern, 6, 30, rng.next());
    const auto exp = apply_deletion_channel(c1, 0.5, 0.0, rng.next());
    const auto batch = extract_seed_batch(exp, 6, rng.next());
    const auto f = detect_f(batch, bern, 0.5);
    for (std::size_t j = 0; j < f.size(); ++j) {
      if (f[j] == Verdict::kDeleted) {
        EXPECT_TRUE(exp.deletion.flags[j]);
      }
      if (f[j] == Verdict::kRetained) {
        EXPECT_FALSE(exp.deletion.flags[j]);
      }
    }
  }
}

TEST(BruteForce, GuardTrips) {
  const Database d1(1, 40, 2, std::vector<Symbol>(40, 0));
  const Database d2(1, 20, 2, std::vector<Symbol>(20, 0));
  EXPECT_THROW(brute_force_embeddings(d1, d2), GuardError);
  EXPECT_THROW(brute_force_posterior(d1, d2), GuardError);
}

TEST(FaultInjection, SkipFirstColumnIsDetectable) {
  Rng rng(600);
  bool differs = false;
  for (int i = 0; i < 200 && !differs; ++i) {
    const auto inst = random_instance(rng, 8, 2);
    differs = detail::count_embeddings(inst.d1, inst.d2, detail::DpFault::kSkipFirstColumn) !=
              testing::enumerate_patterns(inst.d1, inst.d2).total;
  }
  EXPECT_TRUE(differs);
}

TEST(EmpiricalDetection, DominatesBoundAndIsDeterministic) {
  const auto bern = Distribution::bernoulli(0.5);
  const auto a = empirical_detection_probability(bern, 64, 12, 0.5, 200, 0.05, 7, 1);
  const auto b = empirical_detection_probability(bern, 64, 12, 0.5, 200, 0.05, 7, 4);
  EXPECT_EQ(a.detected, b.detected);
  EXPECT_EQ(a.deleted, b.deleted);
  const auto bound = info::detection_probability_bound(64, 12, 0.5, 1.0, 0.05);
  EXPECT_GE(a.estimate + (a.ci.high - a.ci.low) / 2, bound.raw);
  EXPECT_THROW(empirical_detection_probability(bern, 4, 2, 0.0, 10, 0.05, 1), InconsistencyError);
}

TEST(VerdictsCsv, Layout) {
  std::ostringstream out;
  write_verdicts_csv(out, {Verdict::kDeleted, Verdict::kRetained}, {Posterior{1, 1}, Posterior{0, 1}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "index,verdict,numerator,denominator");
}

}  // namespace
}  // namespace dbmatch::detector
