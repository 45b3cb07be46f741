#include "dbmatch/stats.hpp"

#include <algorithm>
#include <cmath>

namespace dbmatch {

namespace {

double log_choose(std::uint64_t n, std::uint64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace

Interval wilson_interval(std::uint64_t successes, std::uint64_t total, double z) {
  if (total == 0) return {0.0, 1.0};
  const double n = static_cast<double>(total);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double center = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  // The endpoints are exact at the boundaries; the formula only rounds to them.
  const double low = successes == 0 ? 0.0 : std::max(0.0, center - half);
  const double high = successes == total ? 1.0 : std::min(1.0, center + half);
  return {low, high};
}

double fisher_exact_greater(std::uint64_t x1, std::uint64_t n1, std::uint64_t x2, std::uint64_t n2) {
  const std::uint64_t total = n1 + n2;
  const std::uint64_t successes = x1 + x2;
  const std::uint64_t hi = std::min(n1, successes);
  const double log_denominator = log_choose(total, n1);
  double p = 0.0;
  for (std::uint64_t x = x1; x <= hi; ++x) {
    if (successes - x > n2 || n1 - x > total - successes) continue;
    p += std::exp(log_choose(successes, x) + log_choose(total - successes, n1 - x) - log_denominator);
  }
  return std::min(1.0, p);
}

}  // namespace dbmatch
