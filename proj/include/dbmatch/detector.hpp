#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dbmatch/big_count.hpp"
#include "dbmatch/model.hpp"
#include "dbmatch/stats.hpp"

namespace dbmatch::detector {

/// Number of column deletion patterns turning d1 into d2.
using EmbeddingCount = BigCount;

/// Exact posterior deletion probability numerator / denominator. The pair is
/// not reduced; comparisons use cross-multiplication.
struct Posterior {
  BigCount numerator;
  BigCount denominator;

  bool is_zero() const { return numerator == 0; }
  bool is_one() const { return numerator == denominator; }
  double value() const;
  friend bool operator==(const Posterior& a, const Posterior& b) {
    return a.numerator * b.denominator == b.numerator * a.denominator;
  }
};

using PosteriorVector = std::vector<Posterior>;

enum class Verdict { kDeleted, kRetained, kInconclusive };

const char* verdict_name(Verdict v) noexcept;

/// Number of strictly increasing maps from d2's K columns into d1's n
/// columns that hit equal columns, by the subsequence-occurrence dynamic
/// program over column identities. Throws ArgumentError when the row counts
/// or alphabets differ.
EmbeddingCount count_embeddings(const Database& d1, const Database& d2);

/// P(column j deleted | d1, d2) = S(d1 without column j, d2) / S(d1, d2),
/// for all j from one prefix/suffix pass. Throws InconsistencyError when
/// S(d1, d2) == 0.
PosteriorVector posterior_deletions(const SeedBatch& batch);
PosteriorVector posterior_deletions(const Database& d1, const Database& d2);

/// Reference route: n + 1 separate count_embeddings evaluations.
PosteriorVector posterior_deletions_naive(const Database& d1, const Database& d2);

/// Deleted when the posterior is exactly 1 and column j of d1 is
/// epsilon-typical (length B); Retained when it is exactly 0 and typical;
/// Inconclusive otherwise.
std::vector<Verdict> detect_f(const SeedBatch& batch, const Distribution& dist, double epsilon);
std::vector<Verdict> verdicts_from_posteriors(const Database& d1, const PosteriorVector& posteriors,
                                              const Distribution& dist, double epsilon);

/// Deleted when column j of d1 equals no column of d2 and is
/// epsilon-typical; Inconclusive otherwise.
std::vector<Verdict> detect_g(const SeedBatch& batch, const Distribution& dist, double epsilon);

/// Default guard for the enumeration oracles: C(n, K) <= 10^6.
inline constexpr std::uint64_t kBruteForceLimit = 1'000'000;

/// Enumerates every K-subset of d1's columns. Throws GuardError if C(n, K)
/// exceeds `limit`.
EmbeddingCount brute_force_embeddings(const Database& d1, const Database& d2,
                                      std::uint64_t limit = kBruteForceLimit);

/// Uniform average of the deletion indicator over all consistent patterns.
/// The i.i.d. Bern(delta) prior gives every pattern with n - K deletions
/// the same weight, so delta cancels. Throws GuardError over the limit and
/// InconsistencyError when no pattern is consistent.
PosteriorVector brute_force_posterior(const Database& d1, const Database& d2,
                                      std::uint64_t limit = kBruteForceLimit);

struct DetectionEstimate {
  std::uint64_t detected = 0;  ///< Deleted verdicts at truly deleted columns
  std::uint64_t deleted = 0;   ///< truly deleted columns over all trials
  double estimate = 0.0;
  Interval ci;
};

/// Monte Carlo estimate of P(f says Deleted | column deleted): each trial
/// draws a B x n batch, a Bern(delta) deletion pattern, and runs detect_f.
/// Counts are pooled over trials and columns; the interval is Wilson 95%.
/// Throws InconsistencyError when no trial deleted any column.
DetectionEstimate empirical_detection_probability(const Distribution& dist, std::size_t n, std::size_t batch,
                                                  double delta, std::size_t trials, double epsilon,
                                                  std::uint64_t rng_seed, std::size_t threads = 1);

/// Header "index,verdict,numerator,denominator", one line per column.
void write_verdicts_csv(std::ostream& out, const std::vector<Verdict>& verdicts, const PosteriorVector& posteriors);

namespace detail {

/// Mutations used to check that the oracle harness catches DP faults.
enum class DpFault { kNone, kSkipFirstColumn };

EmbeddingCount count_embeddings(const Database& d1, const Database& d2, DpFault fault);

}  // namespace detail

}  // namespace dbmatch::detector
