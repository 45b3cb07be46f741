#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dbmatch/big_count.hpp"
#include "dbmatch/detector.hpp"
#include "dbmatch/model.hpp"

namespace dbmatch::oracles {

/// Counts length-n q-ary strings containing `fixed` as a subsequence by
/// enumerating all q^n strings. Throws GuardError if q^n > 2^24.
BigCount supersequence_count_brute_force(std::size_t n, std::span<const Symbol> fixed, std::size_t q);

struct SuiteConfig {
  std::uint64_t seed = 1;
  std::size_t cases = 1000;
  std::size_t max_n = 12;
  std::size_t max_batch = 3;
  /// Largest n for the exhaustive supersequence enumeration.
  std::size_t max_supersequence_n = 12;
  /// Largest n for the bound-versus-exact sweep.
  std::size_t max_bound_n = 20;
  /// Lifts the n <= 12 enumeration guard.
  bool allow_large = false;
  detector::detail::DpFault fault = detector::detail::DpFault::kNone;
};

struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  /// Dump of the first failing instance.
  std::string counterexample;
};

struct SuiteReport {
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Exhaustive small-instance verification: S against enumeration, the
/// prefix/suffix posteriors against Bayes-by-enumeration and the naive
/// route, sum of posteriors = n - K, column absence implies posterior 1,
/// g-Deleted implies f-Deleted, exact F against enumeration, and the F
/// upper bound. Instances include fully deleted batches.
SuiteReport run_suite(const SuiteConfig& cfg);

}  // namespace dbmatch::oracles
