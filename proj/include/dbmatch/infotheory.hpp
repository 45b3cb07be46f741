#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "dbmatch/big_count.hpp"
#include "dbmatch/model.hpp"

namespace dbmatch::info {

/// All logarithms are base 2.
double entropy(const Distribution& dist);
double binary_entropy(double x);

struct RateParams {
  Distribution dist;
  double delta = 0.0;
  double alpha = 0.0;
};

struct RateResult {
  /// Positive part of the achievable-rate expression, bits per column.
  double rate = 0.0;
  /// The expression before taking the positive part.
  double raw = 0.0;
  /// False when delta >= 1 - 1/q, where the achievability argument does not
  /// apply; the value is still reported so curves can span [0, 1).
  bool regime_ok = true;
};

/// [(1-a*d)(H(X) - Hb((1-d)/(1-a*d))) - (1-a)*d*log2(q-1)]^+
/// Throws ArgumentError outside 0 <= delta < 1, 0 <= alpha <= 1.
RateResult achievable_rate(const RateParams& params);

/// Rate with no deletion location information: [H - Hb(d) - d log2(q-1)]^+.
double rate_without_location(const Distribution& dist, double delta);
/// Rate with every deletion location revealed: (1-d) H.
double rate_with_full_location(const Distribution& dist, double delta);
/// The rearranged form [(1-d)H - (1-a)d(log2(q-1) - H) - (1-a d)Hb(.)]^+,
/// algebraically equal to achievable_rate.
double achievable_rate_rearranged(const Distribution& dist, double delta, double alpha);

struct TypicalityParams {
  double epsilon = 0.0;
  std::size_t length = 0;
};

/// Absolute slack added to the typicality comparison so that sequences whose
/// empirical distribution equals dist are accepted despite rounding.
inline constexpr double kTypicalityTolerance = 1e-12;

/// Weak typicality |-(1/L) log2 p(x^L) - H(X)| <= eps, evaluated from symbol
/// counts in log space. A sequence containing a zero-probability symbol is
/// never typical. The empty sequence is typical.
bool is_typical(std::span<const Symbol> sequence, const Distribution& dist, const TypicalityParams& params);

/// Same test from a symbol histogram (counts.size() == q, sum = length).
bool is_typical_counts(std::span<const std::uint32_t> counts, const Distribution& dist, double epsilon);

/// Number of length-n q-ary strings containing a fixed length-k string as a
/// subsequence: sum_{i=k}^{n} C(n,i) (q-1)^(n-i). Throws ArgumentError if
/// k > n or q < 2.
BigCount supersequence_count_exact(std::size_t n, std::size_t k, std::size_t q);

/// log2(n 2^{n Hb(k/n)} (q-1)^{n-k}). Throws ArgumentError outside the
/// bound's regime k >= n/q (or for n == 0).
double supersequence_count_bound_log2(std::size_t n, std::size_t k, std::size_t q);

/// Smallest B >= 0 with B >= (1/H) log2(n(1-d)/(1-a)). Returns nullopt when
/// alpha_target == 1 (no finite batch suffices). Throws ArgumentError for
/// alpha_target > 1 or entropy_bits <= 0.
std::optional<std::uint64_t> min_seed_batch_size(std::size_t n, double delta, double alpha_target,
                                                 double entropy_bits);

struct DetectionBound {
  double raw = 0.0;      ///< 1 - eps - n 2^{-B(H-eps)} (1-d), possibly negative
  double clamped = 0.0;  ///< raw clamped to [0, 1]
  bool trivial() const noexcept { return raw <= 0.0; }
};

/// Lower bound on P(column declared deleted | column deleted) for a batch of
/// B seed rows. Throws ArgumentError for B == 0 or epsilon < 0.
DetectionBound detection_probability_bound(std::size_t n, std::size_t batch, double delta, double entropy_bits,
                                           double epsilon);

}  // namespace dbmatch::info
