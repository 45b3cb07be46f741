#include "dbmatch/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dbmatch/errors.hpp"

namespace dbmatch {

double log2_count(const BigCount& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const std::size_t top = boost::multiprecision::msb(value);
  if (top < 62) return std::log2(value.convert_to<double>());
  // Keep 62 significant bits; the discarded tail changes log2 by < 2^-61.
  const std::size_t shift = top - 61;
  const BigCount head = value >> shift;
  return std::log2(head.convert_to<double>()) + static_cast<double>(shift);
}

namespace info {

namespace {

void check_probability(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ArgumentError(std::string(what) + " must lie in [0, 1]");
  }
}

void check_channel(double delta, double alpha) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ArgumentError("deletion probability must satisfy 0 <= delta < 1");
  check_probability(alpha, "detection probability");
}

double log2_q_minus_one(const Distribution& dist) {
  return std::log2(static_cast<double>(dist.alphabet_size() - 1));
}

}  // namespace

double entropy(const Distribution& dist) {
  double h = 0.0;
  for (double p : dist.probabilities()) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

double binary_entropy(double x) {
  check_probability(x, "binary entropy argument");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

RateResult achievable_rate(const RateParams& params) {
  check_channel(params.delta, params.alpha);
  const double d = params.delta;
  const double a = params.alpha;
  const double h = entropy(params.dist);
  const double kept_fraction = 1.0 - a * d;
  const double ratio = std::clamp((1.0 - d) / kept_fraction, 0.0, 1.0);

  RateResult out;
  out.raw = kept_fraction * (h - binary_entropy(ratio)) - (1.0 - a) * d * log2_q_minus_one(params.dist);
  out.rate = std::max(out.raw, 0.0);
  out.regime_ok = d < 1.0 - 1.0 / static_cast<double>(params.dist.alphabet_size());
  return out;
}

double rate_without_location(const Distribution& dist, double delta) {
  check_channel(delta, 0.0);
  return std::max(entropy(dist) - binary_entropy(delta) - delta * log2_q_minus_one(dist), 0.0);
}

double rate_with_full_location(const Distribution& dist, double delta) {
  check_channel(delta, 1.0);
  return (1.0 - delta) * entropy(dist);
}

double achievable_rate_rearranged(const Distribution& dist, double delta, double alpha) {
  check_channel(delta, alpha);
  const double h = entropy(dist);
  const double kept_fraction = 1.0 - alpha * delta;
  const double ratio = std::clamp((1.0 - delta) / kept_fraction, 0.0, 1.0);
  const double value = (1.0 - delta) * h - (1.0 - alpha) * delta * (log2_q_minus_one(dist) - h) -
                       kept_fraction * binary_entropy(ratio);
  return std::max(value, 0.0);
}

bool is_typical_counts(std::span<const std::uint32_t> counts, const Distribution& dist, double epsilon) {
  if (epsilon < 0.0) throw ArgumentError("typicality slack must be nonnegative");
  const auto surprisal = dist.surprisal();
  std::uint64_t length = 0;
  double total = 0.0;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    if (counts[s] == 0) continue;
    if (s >= surprisal.size() || !std::isfinite(surprisal[s])) return false;
    length += counts[s];
    total += static_cast<double>(counts[s]) * surprisal[s];
  }
  if (length == 0) return true;
  const double rate = total / static_cast<double>(length);
  return std::abs(rate - entropy(dist)) <= epsilon + kTypicalityTolerance;
}

bool is_typical(std::span<const Symbol> sequence, const Distribution& dist, const TypicalityParams& params) {
  if (sequence.size() != params.length) {
    throw ArgumentError("sequence length " + std::to_string(sequence.size()) + " differs from the typicality length " +
                        std::to_string(params.length));
  }
  std::vector<std::uint32_t> counts(kMaxAlphabet, 0);
  for (Symbol s : sequence) ++counts[s];
  return is_typical_counts(counts, dist, params.epsilon);
}

BigCount supersequence_count_exact(std::size_t n, std::size_t k, std::size_t q) {
  if (k > n) throw ArgumentError("supersequence count needs k <= n");
  if (q < 2) throw ArgumentError("supersequence count needs q >= 2");
  // Walk i from n down to k: C(n,i) grows as C(n,i-1) = C(n,i) * i / (n-i+1).
  BigCount binom = 1;
  BigCount power = 1;
  BigCount total = 0;
  for (std::size_t i = n;; --i) {
    total += binom * power;
    if (i == k) break;
    binom = binom * i / (n - i + 1);
    power *= (q - 1);
  }
  return total;
}

double supersequence_count_bound_log2(std::size_t n, std::size_t k, std::size_t q) {
  if (q < 2) throw ArgumentError("supersequence bound needs q >= 2");
  if (n == 0 || k > n) throw ArgumentError("supersequence bound needs 1 <= n and k <= n");
  if (k * q < n) {
    throw ArgumentError("supersequence bound only holds for k >= n/q (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ", q=" + std::to_string(q) + ")");
  }
  const double nd = static_cast<double>(n);
  return std::log2(nd) + nd * binary_entropy(static_cast<double>(k) / nd) +
         static_cast<double>(n - k) * std::log2(static_cast<double>(q - 1));
}

std::optional<std::uint64_t> min_seed_batch_size(std::size_t n, double delta, double alpha_target,
                                                 double entropy_bits) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw ArgumentError("deletion probability must lie in [0, 1]");
  if (!(alpha_target >= 0.0 && alpha_target <= 1.0)) throw ArgumentError("target detection probability must lie in [0, 1]");
  if (!(entropy_bits > 0.0)) throw ArgumentError("entropy must be positive for a finite batch size");
  if (alpha_target == 1.0) return std::nullopt;
  const double argument = static_cast<double>(n) * (1.0 - delta) / (1.0 - alpha_target);
  if (argument <= 1.0) return 0;
  // Values within 1e-9 of an integer are treated as that integer, so exact
  // powers of two are not pushed up by rounding in log2.
  const double needed = std::log2(argument) / entropy_bits;
  return static_cast<std::uint64_t>(std::max(0.0, std::ceil(needed - 1e-9)));
}

DetectionBound detection_probability_bound(std::size_t n, std::size_t batch, double delta, double entropy_bits,
                                           double epsilon) {
  if (batch == 0) throw ArgumentError("detection bound needs a batch of at least one row");
  if (!(epsilon >= 0.0)) throw ArgumentError("epsilon must be nonnegative");
  DetectionBound out;
  out.raw = 1.0 - epsilon -
            static_cast<double>(n) * std::exp2(-static_cast<double>(batch) * (entropy_bits - epsilon)) * (1.0 - delta);
  out.clamped = std::clamp(out.raw, 0.0, 1.0);
  return out;
}

}  // namespace info
}  // namespace dbmatch
