#pragma once

#include <cstdint>

namespace dbmatch {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion; [0, 1] when total == 0.
Interval wilson_interval(std::uint64_t successes, std::uint64_t total, double z = kZ95);

/// One-sided Fisher exact test of H1: p1 > p2 given x1 of n1 and x2 of n2
/// successes. Returns P(X1 >= x1) under the hypergeometric null.
double fisher_exact_greater(std::uint64_t x1, std::uint64_t n1, std::uint64_t x2, std::uint64_t n2);

}  // namespace dbmatch
